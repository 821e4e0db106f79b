// SPDX-License-Identifier: MIT OR Apache-2.0

//! A second, hand-assembled route to `f₀` for surfaces.
//!
//! Everything here works sample by sample on the frame grid with
//! constant-coefficient polynomials in one complex variable, so it shares no
//! code with the graded operator machinery beyond the frame itself.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::germ::MetricGerm;
use crate::jacobi::JacobiFrame;
use crate::symbol::{Monomial, PeriodicCoefficient, WeylPolynomial};

/// `Σ c_{ab} z^a z̄^b` with numeric coefficients.
#[derive(Clone, Debug, Default)]
struct Poly1 {
    terms: BTreeMap<(u32, u32), Complex64>,
}

fn falling(x: u32, k: u32) -> f64 {
    if k > x {
        return 0.0;
    }
    (0..k).map(|i| (x - i) as f64).product()
}

fn choose(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

impl Poly1 {
    fn linear(cz: Complex64, czbar: Complex64) -> Self {
        let mut p = Self::default();
        p.push((1, 0), cz);
        p.push((0, 1), czbar);
        p
    }

    fn constant(c: Complex64) -> Self {
        let mut p = Self::default();
        p.push((0, 0), c);
        p
    }

    fn push(&mut self, key: (u32, u32), c: Complex64) {
        *self.terms.entry(key).or_default() += c;
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(*k, *c);
        }
        out
    }

    fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &other.terms {
                out.push((a + c, b + d), c1 * c2);
            }
        }
        out
    }

    fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// `P_k(z^a z̄^b, z^c z̄^d) = Σ_j (-1)^j C(k,j) [a]_{k-j}[b]_j[c]_j[d]_{k-j} z^{a+c-k} z̄^{b+d-k}`.
    fn transvectant(&self, other: &Self, k: u32) -> Self {
        let mut out = Self::default();
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &other.terms {
                if a + c < k || b + d < k {
                    continue;
                }
                let mut w = 0.0;
                for j in 0..=k {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    w += sign
                        * choose(k, j)
                        * falling(*a, k - j)
                        * falling(*b, j)
                        * falling(*c, j)
                        * falling(*d, k - j);
                }
                if w != 0.0 {
                    out.push((a + c - k, b + d - k), c1 * c2 * w);
                }
            }
        }
        out
    }

    fn max_degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    fn star(&self, other: &Self) -> Self {
        let top = self.max_degree().min(other.max_degree());
        let mut out = Self::default();
        let mut fact = 1.0;
        for k in 0..=top {
            if k > 0 {
                fact *= k as f64;
            }
            out = out.add(&self.transvectant(other, k).scale(Complex64::new(1.0 / fact, 0.0)));
        }
        out
    }

    fn bracket(&self, other: &Self) -> Self {
        let top = self.max_degree().min(other.max_degree());
        let mut out = Self::default();
        let mut fact = 1.0;
        for k in 1..=top {
            fact *= k as f64;
            if k % 2 == 1 {
                out = out.add(&self.transvectant(other, k).scale(Complex64::new(2.0 / fact, 0.0)));
            }
        }
        out
    }

    fn diagonal(&self) -> BTreeMap<u32, Complex64> {
        self.terms
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|((a, _), c)| (*a, *c))
            .collect()
    }
}

/// `f₀` for a surface, assembled from the quartic jets, the cubic
/// generator and the frame.
pub fn f0_direct_dim2(g: &MetricGerm, fr: &JacobiFrame) -> Result<WeylPolynomial> {
    if g.transverse_dim() != 1 || fr.dim() != 1 {
        return Err(Error::DimensionMismatch {
            left: g.transverse_dim(),
            right: 1,
        });
    }
    if g.max_jet_order() < 4 {
        return Err(Error::InsufficientJets {
            needed: 4,
            available: g.max_jet_order() as usize,
        });
    }
    let length = g.length();
    let max_freq = g.max_freq();
    let goo = g.inverse_metric(0, 0);
    let tau = goo.coefficient(&[2]);
    let tau_s = tau.derivative();
    let tau_nu = goo.coefficient(&[3]).scale_real(3.0);
    let quartic = goo.coefficient(&[4]);
    let alpha = fr.alpha()[0];
    let samples = fr.grid.len() - 1;
    let sqrt_l = length.sqrt();
    let r2 = std::f64::consts::SQRT_2;

    let mut big_x = Vec::with_capacity(samples);
    let mut h_tilde = Vec::with_capacity(samples);
    for l in 0..samples {
        let s = fr.grid[l];
        let y = fr.y[l][(0, 0)];
        let yd = fr.ydot[l][(0, 0)];
        let x = Poly1::linear(y.conj() / (r2 * sqrt_l), y / (r2 * sqrt_l));
        let xi = Poly1::linear(yd.conj() * sqrt_l / r2, yd * sqrt_l / r2);
        let k = tau.eval(s);
        let h = xi
            .pow(2)
            .scale(Complex64::new(0.5 / length, 0.0))
            .add(&x.pow(2).scale(k * length * 0.5));
        big_x.push(x);
        h_tilde.push(h);
    }

    // cubic term and its generator from the monodromy-fixed integral
    let cubic: Vec<Poly1> = (0..samples)
        .map(|l| big_x[l].pow(3).scale(tau_nu.eval(fr.grid[l]) * (length / 3.0)))
        .collect();
    let mut generator: Vec<Poly1> = vec![Poly1::default(); samples];
    let mut keys: Vec<(u32, u32)> = cubic.iter().flat_map(|p| p.terms.keys().copied()).collect();
    keys.sort();
    keys.dedup();
    for (a, b) in keys {
        let theta = -(a as f64 - b as f64) * alpha;
        let vals: Vec<Complex64> = cubic
            .iter()
            .map(|p| p.terms.get(&(a, b)).copied().unwrap_or_default())
            .collect();
        let d = PeriodicCoefficient::from_samples(length, theta, max_freq, &vals);
        let divisor = Complex64::from_polar(1.0, theta) - 1.0;
        if divisor.norm() < 1e-6 {
            return Err(Error::Resonance {
                exponent: vec![a as i32 - b as i32],
                divisor: divisor.norm(),
                step: Some(3),
            });
        }
        let minus_il = Complex64::new(0.0, -length);
        let q0 = minus_il * d.integral_over_period() / divisor;
        for (l, slot) in generator.iter_mut().enumerate() {
            let q = q0 + minus_il * d.integral_to(fr.grid[l]);
            // Q = (i/2) q
            slot.push((a, b), q * Complex64::new(0.0, 0.5));
        }
    }

    let mut total: BTreeMap<u32, Complex64> = BTreeMap::new();
    for l in 0..samples {
        let s = fr.grid[l];
        let x2 = big_x[l].pow(2);
        let h = &h_tilde[l];
        let mut d4 = big_x[l].pow(4).scale(quartic.eval(s) * length * length);
        d4 = d4.add(&x2.star(h).scale(-2.0 * length * tau.eval(s)));
        d4 = d4.add(&x2.scale(Complex64::new(0.0, -length) * tau_s.eval(s)));
        d4 = d4.add(&h.star(h));
        d4 = d4.add(&Poly1::constant(-tau.eval(s) * 0.5));
        let corr = generator[l].bracket(&cubic[l]).scale(Complex64::new(0.0, 0.5));
        for (e, c) in d4.add(&corr).diagonal() {
            *total.entry(e).or_default() += c / samples as f64;
        }
    }
    let mut out = WeylPolynomial::zero(1, length, max_freq).with_alpha(&[alpha]);
    for (e, c) in total {
        if c.norm() > 0.0 {
            out.add_term(
                Monomial::new(vec![e as u16], vec![e as u16]),
                PeriodicCoefficient::constant(length, max_freq, c),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_bracket_of_coordinates() {
        let z = Poly1::linear(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let zb = Poly1::linear(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let b = z.bracket(&zb);
        assert_eq!(b.terms.get(&(0, 0)).copied(), Some(Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn hand_square_of_action() {
        // |z|²#|z|² = |z|⁴ - 1
        let a = Poly1::linear(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            .mul(&Poly1::linear(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)));
        let sq = a.star(&a);
        assert_eq!(sq.terms.get(&(2, 2)).copied(), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(sq.terms.get(&(0, 0)).copied(), Some(Complex64::new(-1.0, 0.0)));
        assert!(sq.terms.get(&(1, 1)).map_or(true, |c| c.norm() == 0.0));
    }
}
