// SPDX-License-Identifier: MIT OR Apache-2.0

//! Linear symplectic changes of variables acting on Weyl symbols.
//!
//! For linear symplectic maps the Weyl calculus is exactly covariant, so the
//! conjugated operator has the substituted symbol and no correction terms.

use num_complex::Complex64;
use nalgebra::DMatrix;

use super::coefficient::PeriodicCoefficient;
use super::poly::{Monomial, WeylPolynomial};
use crate::error::{Error, Result};

/// `z_old_j = Σ_k A_jk(s) z_k + B_jk(s) z̄_k`, with `z̄_old` given by conjugation.
///
/// Column `k` of `A` carries twist `-α_k` and column `k` of `B` carries `+α_k`.
#[derive(Clone, Debug)]
pub struct ComplexLinearMap {
    pub dim: usize,
    pub period: f64,
    pub max_freq: i64,
    pub alpha: Vec<f64>,
    pub a: Vec<Vec<PeriodicCoefficient>>,
    pub b: Vec<Vec<PeriodicCoefficient>>,
}

impl ComplexLinearMap {
    pub fn identity(dim: usize, period: f64, max_freq: i64) -> Self {
        let zero = PeriodicCoefficient::zero(period, 0.0, max_freq);
        let one = PeriodicCoefficient::real_constant(period, max_freq, 1.0);
        let a = (0..dim)
            .map(|j| (0..dim).map(|k| if j == k { one.clone() } else { zero.clone() }).collect())
            .collect();
        let b = vec![vec![zero; dim]; dim];
        Self {
            dim,
            period,
            max_freq,
            alpha: vec![0.0; dim],
            a,
            b,
        }
    }

    /// The real matrix `(x, ξ) = M(s) (x', ξ')` at one arclength value.
    pub fn real_matrix(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let a = self.a[j][k].eval(s);
                let b = self.b[j][k].eval(s);
                // z_old = A z + B z̄ with z = x' + iξ'.
                let dx = a + b; // coefficient of x'
                let dxi = (a - b) * Complex64::new(0.0, 1.0); // coefficient of ξ'
                m[(j, k)] = dx.re;
                m[(j, n + k)] = dxi.re;
                m[(n + j, k)] = dx.im;
                m[(n + j, n + k)] = dxi.im;
            }
        }
        m
    }

    /// Largest `‖MᵀJM - J‖` over `samples` equispaced arclength values.
    pub fn symplectic_defect(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..samples {
            let s = self.period * l as f64 / samples as f64;
            worst = worst.max(symplectic_defect(&self.real_matrix(s)));
        }
        worst
    }

    fn linear_form(&self, j: usize) -> WeylPolynomial {
        let mut p = WeylPolynomial::zero(self.dim, self.period, self.max_freq).with_alpha(&self.alpha);
        for k in 0..self.dim {
            let mut e = vec![0u16; self.dim];
            e[k] = 1;
            p.add_term(Monomial::new(e.clone(), vec![0; self.dim]), self.a[j][k].clone());
            p.add_term(Monomial::new(vec![0; self.dim], e), self.b[j][k].clone());
        }
        p
    }
}

/// `‖MᵀJM - J‖_max` for the standard symplectic form.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let n2 = m.nrows();
    let n = n2 / 2;
    let mut j = DMatrix::<f64>::zeros(n2, n2);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    (m.transpose() * &j * m - j).abs().max()
}

/// Substitutes `z_old = A z + B z̄` into an untwisted symbol.
pub fn substitute(a: &WeylPolynomial, map: &ComplexLinearMap) -> Result<WeylPolynomial> {
    if a.dim() != map.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: map.dim,
        });
    }
    if a.alpha().iter().any(|&v| v != 0.0) {
        return Err(Error::Consistency(
            "substitution expects an untwisted symbol".to_string(),
        ));
    }
    let dim = map.dim;
    let forms: Vec<WeylPolynomial> = (0..dim).map(|j| map.linear_form(j)).collect();
    let conj_forms: Vec<WeylPolynomial> = forms.iter().map(|f| f.adjoint()).collect();
    let max_deg = a.degree() as usize;
    let mut pow_z: Vec<Vec<WeylPolynomial>> = Vec::with_capacity(dim);
    let mut pow_zb: Vec<Vec<WeylPolynomial>> = Vec::with_capacity(dim);
    let unit = WeylPolynomial::constant(dim, map.period, map.max_freq, Complex64::new(1.0, 0.0))
        .with_alpha(&map.alpha);
    for j in 0..dim {
        let mut pz = vec![unit.clone()];
        let mut pzb = vec![unit.clone()];
        for e in 1..=max_deg {
            pz.push(pz[e - 1].mul(&forms[j]));
            pzb.push(pzb[e - 1].mul(&conj_forms[j]));
        }
        pow_z.push(pz);
        pow_zb.push(pzb);
    }
    let mut out = WeylPolynomial::zero(dim, map.period, map.max_freq).with_alpha(&map.alpha);
    for (mono, coeff) in a.terms() {
        let mut term = unit.clone();
        for j in 0..dim {
            if mono.m[j] > 0 {
                term = term.mul(&pow_z[j][mono.m[j] as usize]);
            }
            if mono.n[j] > 0 {
                term = term.mul(&pow_zb[j][mono.n[j] as usize]);
            }
        }
        out = out.add(&term.scale_by_function(coeff));
    }
    Ok(out)
}

/// A real `2n × 2n` arclength-dependent matrix with untwisted Fourier entries,
/// acting as `(x, ξ) = M(s) (x', ξ')`.
#[derive(Clone, Debug)]
pub struct RealSymplecticMap {
    pub dim: usize,
    pub period: f64,
    pub max_freq: i64,
    pub entries: Vec<Vec<PeriodicCoefficient>>,
}

impl RealSymplecticMap {
    pub fn constant(m: &DMatrix<f64>, period: f64, max_freq: i64) -> Self {
        let n2 = m.nrows();
        let entries = (0..n2)
            .map(|r| {
                (0..n2)
                    .map(|c| PeriodicCoefficient::real_constant(period, max_freq, m[(r, c)]))
                    .collect()
            })
            .collect();
        Self {
            dim: n2 / 2,
            period,
            max_freq,
            entries,
        }
    }

    pub fn matrix(&self, s: f64) -> DMatrix<f64> {
        let n2 = 2 * self.dim;
        DMatrix::from_fn(n2, n2, |r, c| self.entries[r][c].eval(s).re)
    }

    /// Equivalent complex form `z_old = A z + B z̄`.
    pub fn to_complex(&self) -> ComplexLinearMap {
        let n = self.dim;
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        let mut a = vec![vec![PeriodicCoefficient::zero(self.period, 0.0, self.max_freq); n]; n];
        let mut b = a.clone();
        for j in 0..n {
            for k in 0..n {
                // z_old_j = (M11 + i M21) x' + (M12 + i M22) ξ'
                let cx = self.entries[j][k]
                    .add(&self.entries[n + j][k].scale(Complex64::new(0.0, 1.0)));
                let cxi = self.entries[j][n + k]
                    .add(&self.entries[n + j][n + k].scale(Complex64::new(0.0, 1.0)));
                // x' = (z + z̄)/2, ξ' = (z - z̄)/(2i)
                a[j][k] = cx.scale(half).add(&cxi.scale(minus_half_i));
                b[j][k] = cx.scale(half).sub(&cxi.scale(minus_half_i));
            }
        }
        ComplexLinearMap {
            dim: n,
            period: self.period,
            max_freq: self.max_freq,
            alpha: vec![0.0; n],
            a,
            b,
        }
    }
}

/// Substitutes a real symplectic change of variables, checking `MᵀJM = J`.
pub fn linear_symplectic_substitute(
    a: &WeylPolynomial,
    m: &RealSymplecticMap,
) -> Result<WeylPolynomial> {
    let samples = (4 * m.max_freq as usize + 8).max(16);
    let mut defect: f64 = 0.0;
    for l in 0..samples {
        let s = m.period * l as f64 / samples as f64;
        defect = defect.max(symplectic_defect(&m.matrix(s)));
    }
    if defect > 1e-8 {
        return Err(Error::NonSymplectic { defect });
    }
    substitute(a, &m.to_complex())
}
