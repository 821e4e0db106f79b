// SPDX-License-Identifier: MIT OR Apache-2.0

//! Twisted-periodic coefficient functions of arclength.
//!
//! A coefficient is stored as `c(s) = e^{i θ s / L} Σ_k a_k e^{2π i k s / L}`
//! with a finite set of retained frequencies `|k| ≤ max_freq`. The twist angle
//! `θ` makes `c(s + L) = e^{iθ} c(s)` hold exactly, and products stay exact
//! because twists simply add.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative amplitude floor below which Fourier modes are discarded.
pub const AMPLITUDE_FLOOR: f64 = 1e-17;

/// Default retained bandwidth (number of frequencies, split evenly around 0).
pub const DEFAULT_BANDWIDTH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicCoefficient {
    period: f64,
    twist: f64,
    max_freq: i64,
    modes: BTreeMap<i64, Complex64>,
}

impl PeriodicCoefficient {
    pub fn zero(period: f64, twist: f64, max_freq: i64) -> Self {
        Self {
            period,
            twist,
            max_freq,
            modes: BTreeMap::new(),
        }
    }

    pub fn constant(period: f64, max_freq: i64, value: Complex64) -> Self {
        let mut c = Self::zero(period, 0.0, max_freq);
        if value != Complex64::new(0.0, 0.0) {
            c.modes.insert(0, value);
        }
        c
    }

    pub fn real_constant(period: f64, max_freq: i64, value: f64) -> Self {
        Self::constant(period, max_freq, Complex64::new(value, 0.0))
    }

    pub fn from_modes<I>(period: f64, twist: f64, max_freq: i64, modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut c = Self::zero(period, twist, max_freq);
        for (k, a) in modes {
            if k.abs() <= max_freq {
                *c.modes.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        c.prune();
        c
    }

    /// Builds a coefficient from equispaced samples `c(l L / N)`, `l = 0..N`.
    pub fn from_samples(period: f64, twist: f64, max_freq: i64, samples: &[Complex64]) -> Self {
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples
            .iter()
            .enumerate()
            .map(|(l, v)| {
                let s = period * l as f64 / n as f64;
                v * Complex64::from_polar(1.0, -twist * s / period)
            })
            .collect();
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let half = (n as i64 - 1) / 2;
        let top = half.min(max_freq);
        let modes = (-top..=top).map(|k| {
            let idx = k.rem_euclid(n as i64) as usize;
            (k, buf[idx] / n as f64)
        });
        Self::from_modes(period, twist, max_freq, modes)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn twist(&self) -> f64 {
        self.twist
    }

    /// Phase factor `ρ` with `c(s + L) = ρ c(s)`.
    pub fn rho(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.twist)
    }

    pub fn max_freq(&self) -> i64 {
        self.max_freq
    }

    pub fn modes(&self) -> &BTreeMap<i64, Complex64> {
        &self.modes
    }

    pub fn mode(&self, k: i64) -> Complex64 {
        self.modes.get(&k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub(crate) fn set_twist(&mut self, twist: f64) {
        self.twist = twist;
    }

    pub fn with_max_freq(mut self, max_freq: i64) -> Self {
        self.max_freq = max_freq;
        self.modes.retain(|k, _| k.abs() <= max_freq);
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Sum of absolute amplitudes; bounds `sup |c|`.
    pub fn l1(&self) -> f64 {
        self.modes.values().map(|a| a.norm()).sum()
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.modes {
            acc += a * Complex64::from_polar(1.0, (TAU * *k as f64) * s / self.period);
        }
        acc * Complex64::from_polar(1.0, self.twist * s / self.period)
    }

    fn prune(&mut self) {
        let top = self.max_abs();
        let floor = top * AMPLITUDE_FLOOR;
        let max_freq = self.max_freq;
        self.modes
            .retain(|k, a| k.abs() <= max_freq && a.norm() > floor && a.norm() > 0.0);
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.modes.values_mut() {
            *a *= c;
        }
        out.prune();
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `self += c · other`; the twist of `self` is kept.
    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (k, a) in &other.modes {
            *self.modes.entry(*k).or_insert(Complex64::new(0.0, 0.0)) += a * c;
        }
        self.prune();
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, Complex64::new(1.0, 0.0));
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, Complex64::new(-1.0, 0.0));
        out
    }

    /// Pointwise product; twists add and bandwidth is the smaller of the two.
    pub fn mul(&self, other: &Self) -> Self {
        let max_freq = self.max_freq.min(other.max_freq);
        let mut modes: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k1, a1) in &self.modes {
            for (k2, a2) in &other.modes {
                let k = k1 + k2;
                if k.abs() <= max_freq {
                    *modes.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a1 * a2;
                }
            }
        }
        let mut out = Self {
            period: self.period,
            twist: self.twist + other.twist,
            max_freq,
            modes,
        };
        out.prune();
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            period: self.period,
            twist: -self.twist,
            max_freq: self.max_freq,
            modes: self.modes.iter().map(|(k, a)| (-k, a.conj())).collect(),
        }
    }

    /// Real part as a function of `s`; only meaningful for untwisted coefficients.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).scale_real(0.5)
    }

    fn wavenumber(&self, k: i64) -> f64 {
        (TAU * k as f64 + self.twist) / self.period
    }

    /// Exact `d/ds`.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for (k, a) in out.modes.iter_mut() {
            let w = (TAU * *k as f64 + self.twist) / self.period;
            *a *= Complex64::new(0.0, w);
        }
        out.prune();
        out
    }

    /// `∫_0^L c(s) ds`.
    pub fn integral_over_period(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.modes {
            let w = self.wavenumber(*k) * self.period;
            if w == 0.0 {
                acc += a * self.period;
            } else {
                let phase = Complex64::from_polar(1.0, w) - 1.0;
                acc += a * phase / Complex64::new(0.0, w) * self.period;
            }
        }
        acc
    }

    /// `∫_0^s c(t) dt` evaluated at a single point.
    pub fn integral_to(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.modes {
            let w = self.wavenumber(*k);
            if w == 0.0 {
                acc += a * s;
            } else {
                acc += a * (Complex64::from_polar(1.0, w * s) - 1.0) / Complex64::new(0.0, w);
            }
        }
        acc
    }

    /// Average over one period.
    pub fn mean(&self) -> Complex64 {
        self.integral_over_period() / self.period
    }

    /// The twisted-periodic solution `q` of `q' = self` with the same twist.
    ///
    /// For an untwisted coefficient the zero mode must vanish and the constant
    /// of integration is set to zero.
    pub fn antiderivative(&self) -> Result<Self> {
        let mut out = Self::zero(self.period, self.twist, self.max_freq);
        for (k, a) in &self.modes {
            let w = self.wavenumber(*k);
            if w == 0.0 {
                if a.norm() > 1e-11 * self.max_abs().max(1.0) {
                    return Err(Error::Consistency(format!(
                        "untwisted coefficient with nonzero mean {a} has no periodic antiderivative"
                    )));
                }
                continue;
            }
            out.modes.insert(*k, a / Complex64::new(0.0, w));
        }
        out.prune();
        Ok(out)
    }

    /// True when the coefficient is a real-valued function of `s`.
    pub fn is_real(&self, tol: f64) -> bool {
        if self.twist != 0.0 {
            return self.is_zero();
        }
        self.modes
            .iter()
            .all(|(k, a)| (a - self.mode(-k).conj()).norm() <= tol)
    }

    /// Largest deviation between two coefficients, mode by mode.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (k, a) in &self.modes {
            d = d.max((a - other.mode(*k)).norm());
        }
        for (k, b) in &other.modes {
            if !self.modes.contains_key(k) {
                d = d.max(b.norm());
            }
        }
        d
    }
}

/// Frequencies retained for a bandwidth given as a count of frequencies.
pub fn max_freq_for_bandwidth(bandwidth: usize) -> i64 {
    (bandwidth / 2) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn twisted_evaluation_picks_up_rho() {
        let q = PeriodicCoefficient::from_modes(2.0, 0.7, 8, [(0, c(1.0, 0.5)), (3, c(-0.2, 0.1))]);
        for s in [0.0, 0.3, 1.1] {
            let lhs = q.eval(s + 2.0);
            let rhs = q.rho() * q.eval(s);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn samples_round_trip() {
        let q = PeriodicCoefficient::from_modes(3.0, -1.3, 10, [(-2, c(0.3, 0.0)), (1, c(0.0, 2.0))]);
        let n = 32;
        let samples: Vec<_> = (0..n).map(|l| q.eval(3.0 * l as f64 / n as f64)).collect();
        let back = PeriodicCoefficient::from_samples(3.0, -1.3, 10, &samples);
        assert!(back.distance(&q) < 1e-13);
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let q = PeriodicCoefficient::from_modes(1.5, 0.4, 8, [(0, c(1.0, 0.0)), (-1, c(0.2, 0.3))]);
        let back = q.derivative().antiderivative().unwrap();
        assert!(back.distance(&q) < 1e-13);
    }

    #[test]
    fn integral_matches_quadrature() {
        let q = PeriodicCoefficient::from_modes(2.0, 0.9, 8, [(0, c(1.0, -1.0)), (2, c(0.5, 0.0))]);
        let n = 20000;
        let h = 2.0 / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..n {
            acc += q.eval((l as f64 + 0.5) * h) * h;
        }
        assert!((acc - q.integral_over_period()).norm() < 1e-7);
        assert!((q.integral_to(2.0) - q.integral_over_period()).norm() < 1e-12);
    }
}
