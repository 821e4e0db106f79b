// SPDX-License-Identifier: MIT OR Apache-2.0

//! Polynomial Weyl symbols in the complex transverse coordinates
//! `z_j = x_j + i ξ_j` with arclength-dependent coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::coefficient::PeriodicCoefficient;
use crate::error::{Error, Result};

/// Exponent pair `(m, n)` of the monomial `z^m z̄^n`, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub m: Vec<u16>,
    pub n: Vec<u16>,
}

impl Monomial {
    pub fn new(m: Vec<u16>, n: Vec<u16>) -> Self {
        debug_assert_eq!(m.len(), n.len());
        Self { m, n }
    }

    pub fn one(dim: usize) -> Self {
        Self::new(vec![0; dim], vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn degree(&self) -> u32 {
        self.m.iter().chain(&self.n).map(|&e| e as u32).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.m == self.n
    }

    /// `m - n` as a signed vector.
    pub fn exponent(&self) -> Vec<i32> {
        self.m
            .iter()
            .zip(&self.n)
            .map(|(&a, &b)| a as i32 - b as i32)
            .collect()
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.n.clone(), self.m.clone())
    }

    /// Twist angle of this monomial's coefficient: `-(m - n)·α`.
    pub fn twist(&self, alpha: &[f64]) -> f64 {
        if self.is_diagonal() {
            return 0.0;
        }
        self.exponent()
            .iter()
            .zip(alpha)
            .map(|(&e, a)| -(e as f64) * a)
            .sum()
    }

    pub fn label(&self) -> String {
        format!("m={:?},n={:?}", self.m, self.n)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.m.cmp(&other.m))
            .then_with(|| self.n.cmp(&other.n))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite sum of monomials `z^m z̄^n` with twisted-periodic coefficients.
///
/// The coefficient of `z^m z̄^n` always carries the twist `-(m - n)·α`, so
/// that `a(s + L, z) = a(s, e^{-iα} z)` holds for every symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylPolynomial {
    dim: usize,
    period: f64,
    max_freq: i64,
    alpha: Vec<f64>,
    terms: BTreeMap<Monomial, PeriodicCoefficient>,
}

impl WeylPolynomial {
    pub fn zero(dim: usize, period: f64, max_freq: i64) -> Self {
        Self {
            dim,
            period,
            max_freq,
            alpha: vec![0.0; dim],
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, period: f64, max_freq: i64, value: Complex64) -> Self {
        let mut p = Self::zero(dim, period, max_freq);
        p.add_term(
            Monomial::one(dim),
            PeriodicCoefficient::constant(period, max_freq, value),
        );
        p
    }

    /// Monomial with a constant coefficient.
    pub fn monomial(
        dim: usize,
        period: f64,
        max_freq: i64,
        mono: Monomial,
        value: Complex64,
    ) -> Self {
        let mut p = Self::zero(dim, period, max_freq);
        p.add_term(mono, PeriodicCoefficient::constant(period, max_freq, value));
        p
    }

    /// The coordinate `z_j`.
    pub fn z(dim: usize, period: f64, max_freq: i64, j: usize) -> Self {
        let mut m = vec![0; dim];
        m[j] = 1;
        Self::monomial(dim, period, max_freq, Monomial::new(m, vec![0; dim]), Complex64::new(1.0, 0.0))
    }

    /// The coordinate `z̄_j`.
    pub fn zbar(dim: usize, period: f64, max_freq: i64, j: usize) -> Self {
        let mut n = vec![0; dim];
        n[j] = 1;
        Self::monomial(dim, period, max_freq, Monomial::new(vec![0; dim], n), Complex64::new(1.0, 0.0))
    }

    /// `x_j = (z_j + z̄_j) / 2`.
    pub fn x(dim: usize, period: f64, max_freq: i64, j: usize) -> Self {
        Self::z(dim, period, max_freq, j)
            .add(&Self::zbar(dim, period, max_freq, j))
            .scale_real(0.5)
    }

    /// `ξ_j = (z_j - z̄_j) / 2i`.
    pub fn xi(dim: usize, period: f64, max_freq: i64, j: usize) -> Self {
        Self::z(dim, period, max_freq, j)
            .sub(&Self::zbar(dim, period, max_freq, j))
            .scale(Complex64::new(0.0, -0.5))
    }

    /// `|z_j|^2`.
    pub fn action2(dim: usize, period: f64, max_freq: i64, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        Self::monomial(dim, period, max_freq, Monomial::new(e.clone(), e), Complex64::new(1.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn max_freq(&self) -> i64 {
        self.max_freq
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Declares the Floquet angles that fix the coefficient twists.
    pub fn with_alpha(mut self, alpha: &[f64]) -> Self {
        assert_eq!(alpha.len(), self.dim);
        self.alpha = alpha.to_vec();
        let alpha = self.alpha.clone();
        for (mono, c) in self.terms.iter_mut() {
            c.set_twist(mono.twist(&alpha));
        }
        self
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, PeriodicCoefficient> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Option<&PeriodicCoefficient> {
        self.terms.get(mono)
    }

    /// Coefficient of `z^m z̄^n` for constant-coefficient symbols (its mean).
    pub fn constant_coefficient(&self, mono: &Monomial) -> Complex64 {
        self.terms.get(mono).map(|c| c.mode(0)).unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).min().unwrap_or(0)
    }

    /// Adds `coeff · z^m z̄^n`; the coefficient's twist is reset to the canonical one.
    pub fn add_term(&mut self, mono: Monomial, mut coeff: PeriodicCoefficient) {
        assert_eq!(mono.dim(), self.dim, "monomial dimension");
        coeff.set_twist(mono.twist(&self.alpha));
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                existing.add_scaled(&coeff, Complex64::new(1.0, 0.0));
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                if !coeff.is_zero() {
                    self.terms.insert(mono, coeff);
                }
            }
        }
    }

    pub(crate) fn add_term_scaled(&mut self, mono: Monomial, coeff: &PeriodicCoefficient, c: Complex64) {
        let twist = mono.twist(&self.alpha);
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                existing.add_scaled(coeff, c);
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                let mut fresh = coeff.scale(c);
                fresh.set_twist(twist);
                if !fresh.is_zero() {
                    self.terms.insert(mono, fresh);
                }
            }
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if (self.period - other.period).abs() > 1e-12 * self.period.abs().max(1.0) {
            return Err(Error::PeriodMismatch {
                left: self.period,
                right: other.period,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term_scaled(mono.clone(), c, Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term_scaled(mono.clone(), c, Complex64::new(-1.0, 0.0));
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (mono, coeff) in &other.terms {
            self.add_term_scaled(mono.clone(), coeff, c);
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            out.add_term_scaled(mono.clone(), coeff, c);
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Multiplies every coefficient by an untwisted function of `s`.
    pub fn scale_by_function(&self, f: &PeriodicCoefficient) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            out.add_term(mono.clone(), coeff.mul(f));
        }
        out
    }

    /// Pointwise product of symbols (the zeroth transvectant).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.m.iter().zip(&mb.m).map(|(a, b)| a + b).collect();
                let n = ma.n.iter().zip(&mb.n).map(|(a, b)| a + b).collect();
                out.add_term(Monomial::new(m, n), ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(self.dim, self.period, self.max_freq, Complex64::new(1.0, 0.0))
            .with_alpha(&self.alpha);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// The symbol of the adjoint operator: `ā(z) = conj(a(z))`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            out.add_term(mono.swapped(), coeff.conj());
        }
        out
    }

    /// Largest violation of `coefficient(n,m) = conj(coefficient(m,n))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Keeps the `m = n` monomials (the torus average).
    pub fn diagonal_part(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            if mono.is_diagonal() {
                out.terms.insert(mono.clone(), coeff.clone());
            }
        }
        out
    }

    pub fn off_diagonal_part(&self) -> Self {
        self.sub(&self.diagonal_part())
    }

    /// Keeps monomials whose total degree lies in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            let d = mono.degree();
            if d >= lo && d <= hi {
                out.terms.insert(mono.clone(), coeff.clone());
            }
        }
        out
    }

    pub fn truncate_degree(&self, max_degree: u32) -> Self {
        self.degree_range(0, max_degree)
    }

    /// Coefficient-wise `∂/∂s`.
    pub fn ds(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            out.add_term(mono.clone(), coeff.derivative());
        }
        out
    }

    /// Coefficient-wise period average (twisted coefficients average to their integral / L).
    pub fn s_average(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for (mono, coeff) in &self.terms {
            if mono.is_diagonal() {
                let c = PeriodicCoefficient::constant(self.period, self.max_freq, coeff.mean());
                out.add_term(mono.clone(), c);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise Fourier distance.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (mono, c) in &self.terms {
            d = d.max(match other.terms.get(mono) {
                Some(o) => c.distance(o),
                None => c.max_abs(),
            });
        }
        for (mono, c) in &other.terms {
            if !self.terms.contains_key(mono) {
                d = d.max(c.max_abs());
            }
        }
        d
    }

    pub fn eval(&self, s: f64, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (mono, coeff) in &self.terms {
            let mut v = coeff.eval(s);
            for j in 0..self.dim {
                v *= z[j].powu(mono.m[j] as u32) * z[j].conj().powu(mono.n[j] as u32);
            }
            acc += v;
        }
        acc
    }

    pub fn with_max_freq(&self, max_freq: i64) -> Self {
        let mut out = Self { terms: BTreeMap::new(), max_freq, ..self.clone() };
        for (mono, coeff) in &self.terms {
            out.add_term(mono.clone(), coeff.clone().with_max_freq(max_freq));
        }
        out
    }

    /// Stable JSON form: one entry per monomial in graded-lex order.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Mode {
            freq: i64,
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Term {
            m: Vec<u16>,
            n: Vec<u16>,
            twist: f64,
            fourier: Vec<Mode>,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(mono, c)| Term {
                m: mono.m.clone(),
                n: mono.n.clone(),
                twist: c.twist(),
                fourier: c
                    .modes()
                    .iter()
                    .map(|(k, a)| Mode {
                        freq: *k,
                        re: a.re,
                        im: a.im,
                    })
                    .collect(),
            })
            .collect();
        serde_json::json!({ "dim": self.dim, "period": self.period, "terms": terms })
    }
}
