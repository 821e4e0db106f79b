// SPDX-License-Identifier: MIT OR Apache-2.0

//! Independent oracles shared by the integration suites. Nothing here calls
//! into the Moyal or trace machinery it is used to check.

#![allow(dead_code)]

use num_complex::Complex64;
use qbnf::germ::{germ_from_curvature_2d, CurvatureData2D, MetricGerm};
use qbnf::random::{random_elliptic_germ_2d, rng_from_seed, RandomGermSpec};
use qbnf::symbol::{Monomial, WeylPolynomial};
use qbnf::jacobi::JacobiFrame;

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug)]
pub struct Mat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Largest entry of the leading `block × block` corner.
    pub fn block_max(&self, block: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..block {
            for j in 0..block {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    pub fn block_distance(&self, other: &Self, block: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..block {
            for j in 0..block {
                m = m.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        m
    }
}

/// `Op(z) = √2 a` (lowering, `true`) or `Op(z̄) = √2 a†` applied to `v`,
/// truncated to the first `v.len()` Hermite states.
fn apply_ladder(lowering: bool, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for q in 1..n {
        let w = (2.0 * q as f64).sqrt();
        if lowering {
            out[q - 1] = v[q] * w;
        } else {
            out[q] = v[q - 1] * w;
        }
    }
    out
}

/// Weyl quantization of `z^m z̄^k`: the mean over all orderings of the factors.
pub fn weyl_monomial(m: usize, k: usize, n: usize) -> Mat {
    let total = m + k;
    let mut out = Mat::zeros(n);
    let words: Vec<u32> = (0u32..(1u32 << total))
        .filter(|mask| mask.count_ones() as usize == m)
        .collect();
    let weight = 1.0 / words.len() as f64;
    for j in 0..n {
        for mask in &words {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[j] = Complex64::new(1.0, 0.0);
            // the rightmost factor acts first
            for bit in (0..total).rev() {
                v = apply_ladder(mask & (1 << bit) != 0, &v);
            }
            for i in 0..n {
                out.data[i * n + j] += v[i] * weight;
            }
        }
    }
    out
}

/// Weyl quantization of an `s`-independent symbol in one degree of freedom.
pub fn weyl_quantize(p: &WeylPolynomial, n: usize) -> Mat {
    let mut out = Mat::zeros(n);
    for (mono, coeff) in p.terms() {
        let op = weyl_monomial(mono.m[0] as usize, mono.n[0] as usize, n);
        out.add_scaled(&op, coeff.mode(0));
    }
    out
}

/// Conjugate-symmetric `Σ c_{mn} z^m z̄^n`, `m + n ≤ degree`, from a flat list of reals.
pub fn symbol_from_reals(values: &[f64], degree: u16) -> WeylPolynomial {
    let mut p = WeylPolynomial::zero(1, 1.0, 0);
    let mut it = values.iter().cycle();
    for m in 0..=degree {
        for k in m..=(degree - m) {
            let re = *it.next().unwrap();
            let im = if m == k { 0.0 } else { *it.next().unwrap() };
            let c = Complex64::new(re, im);
            p = p.add(&WeylPolynomial::monomial(1, 1.0, 0, Monomial::new(vec![m], vec![k]), c));
            if m != k {
                let mirror = Monomial::new(vec![k], vec![m]);
                p = p.add(&WeylPolynomial::monomial(1, 1.0, 0, mirror, c.conj()));
            }
        }
    }
    p
}

/// `Σ_{q ≥ 0} f(q + ½) e^{i(α + iδ)(q + ½)}` extrapolated to `δ → 0`.
///
/// The damped sum is analytic in `δ` within `min(α, 2π - α)` of the origin,
/// so Neville extrapolation from `δ_j = j·step`, `j = 1..=levels`, converges.
/// Small `δ` is avoided: the terms then grow to `~δ^{-deg f}` and the sum
/// loses all accuracy to phase rounding.
pub fn damped_trace(f: impl Fn(f64) -> f64, alpha: f64, step: f64, levels: usize) -> Complex64 {
    let sum = |d: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        let terms = (80.0 / d) as usize;
        for q in 0..terms {
            let t = q as f64 + 0.5;
            acc += f(t) * Complex64::from_polar((-d * t).exp(), alpha * t);
        }
        acc
    };
    let xs: Vec<f64> = (1..=levels).map(|j| j as f64 * step).collect();
    let mut table: Vec<Complex64> = xs.iter().map(|&d| sum(d)).collect();
    for k in 1..levels {
        for i in 0..levels - k {
            // value at δ = 0 of the interpolant through xs[i..=i+k]
            table[i] = (table[i + 1] * xs[i] - table[i] * xs[i + k]) / (xs[i] - xs[i + k]);
        }
    }
    table[0]
}

/// `count` seeded elliptic dimension-2 germs.
pub fn random_germs(seed: u64, count: usize) -> Vec<(CurvatureData2D, MetricGerm, JacobiFrame)> {
    let mut rng = rng_from_seed(seed);
    let spec = RandomGermSpec::default();
    (0..count)
        .map(|_| random_elliptic_germ_2d(&mut rng, &spec, 1e-6))
        .collect()
}

/// Random germs with jets through `max_jet_order`.
pub fn random_germs_with_jets(seed: u64, count: usize, max_jet_order: u32) -> Vec<(CurvatureData2D, MetricGerm, JacobiFrame)> {
    let mut rng = rng_from_seed(seed);
    let spec = RandomGermSpec {
        max_jet_order,
        ..RandomGermSpec::default()
    };
    (0..count)
        .map(|_| random_elliptic_germ_2d(&mut rng, &spec, 1e-6))
        .collect()
}

pub fn rebuild(c: &CurvatureData2D, max_jet_order: u32, max_freq: i64) -> MetricGerm {
    germ_from_curvature_2d(c, max_jet_order, max_freq).expect("germ rebuilds")
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
