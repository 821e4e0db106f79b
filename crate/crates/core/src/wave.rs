// SPDX-License-Identifier: MIT OR Apache-2.0

//! Wave invariants from the Birkhoff ladder.
//!
//! The regularized trace `T(α) = Π_j e^{iα_j/2} / (1 - e^{iα_j})` and its
//! derivatives are rational in `β_j = (1 - e^{iα_j})^{-1}` times `e^{iα_j/2}`:
//! `Σ_q (q+½)^e e^{i(q+½)α} = e^{iα/2} G_e(β)` with `G_0 = β` and
//! `G_{e+1} = G_e/2 + (β² - β) G_e'`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::jacobi::JacobiFrame;
use crate::normal_form::{spectral_function, QbnfResult, SpectralPolynomial};

/// Default cutoff on `|1 - e^{iα_j}|`.
pub const TRACE_RESONANCE_TOL: f64 = 1e-8;

/// Conventions printed with every wave invariant.
pub const CONVENTION_LEDGER: &[&str] = &[
    "Moyal calibration: z = x + iξ, z#z̄ - z̄#z = 2, Op(|z|²) = 2Î with Î = q + 1/2 on Hermite state q",
    "Floquet branch: α_j in (0, 2π) with Im(ȳ·ẏ) > 0; eigenfield phase fixed by its largest component",
    "curvature: Y'' + τ Y = 0, g^{oo} = 1 + τ y² + O(y³)",
    "trace: T(α) = Π e^{iα_j/2}/(1 - e^{iα_j}) = Π (-2i sin(α_j/2))^{-1}",
    "a_γk = (1/i)·[coefficient of (L D_s)^{-1}] evaluated on T; c_γ = i^σ L |det(I - P_γ)|^{-1/2}",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceDistribution {
    pub alpha: f64,
    pub value: Complex64,
}

pub fn beta(alpha: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, alpha)).inv()
}

/// `T(α)` for one oscillator.
pub fn trace_distribution(alpha: f64) -> Result<TraceDistribution> {
    check_alpha(alpha)?;
    Ok(TraceDistribution {
        alpha,
        value: Complex64::from_polar(1.0, alpha / 2.0) * beta(alpha),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    let gap = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, alpha)).norm();
    if gap < TRACE_RESONANCE_TOL {
        return Err(Error::Resonance {
            exponent: vec![1],
            divisor: gap,
            step: None,
        });
    }
    Ok(())
}

/// Coefficients of `G_e` in powers of `β`, for `e = 0..=top`.
pub fn trace_polynomials(top: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0, 1.0]];
    for e in 0..top {
        let g = &out[e];
        let mut next = vec![0.0; g.len() + 1];
        for (k, &c) in g.iter().enumerate() {
            next[k] += 0.5 * c;
            if k > 0 {
                // (β² - β) · k c β^{k-1}
                next[k + 1] += k as f64 * c;
                next[k] -= k as f64 * c;
            }
        }
        out.push(next);
    }
    out
}

fn horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// `Σ_q F(q + ½) e^{i(q+½)·α}` in closed form.
pub fn hermite_trace(f: &SpectralPolynomial, alpha: &[f64]) -> Result<Complex64> {
    if f.dim != alpha.len() {
        return Err(Error::DimensionMismatch {
            left: f.dim,
            right: alpha.len(),
        });
    }
    for &a in alpha {
        check_alpha(a)?;
    }
    let top = f.degree() as usize;
    let table = trace_polynomials(top);
    let sums: Vec<Vec<Complex64>> = alpha
        .iter()
        .map(|&a| {
            let b = beta(a);
            let phase = Complex64::from_polar(1.0, a / 2.0);
            table.iter().map(|g| phase * horner(g, b)).collect()
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (e, c) in &f.terms {
        let mut term = *c;
        for (j, &k) in e.iter().enumerate() {
            term *= sums[j][k as usize];
        }
        acc += term;
    }
    Ok(acc)
}

/// Laurent polynomial in `X = L D_s` with spectral-polynomial coefficients.
#[derive(Clone, Debug)]
struct Laurent {
    dim: usize,
    terms: BTreeMap<i32, SpectralPolynomial>,
}

impl Laurent {
    fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    fn single(power: i32, p: SpectralPolynomial) -> Self {
        let mut out = Self::zero(p.dim);
        if !p.is_zero() {
            out.terms.insert(power, p);
        }
        out
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, p) in &other.terms {
            let sum = out
                .terms
                .get(k)
                .cloned()
                .unwrap_or_else(|| SpectralPolynomial::zero(self.dim))
                .add(p);
            if sum.is_zero() {
                out.terms.remove(k);
            } else {
                out.terms.insert(*k, sum);
            }
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (k1, p1) in &self.terms {
            for (k2, p2) in &other.terms {
                out = out.add(&Self::single(k1 + k2, p1.mul(p2)));
            }
        }
        out
    }

    fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, p) in &self.terms {
            out = out.add(&Self::single(*k, p.scale(c)));
        }
        out
    }

    fn coefficient(&self, power: i32) -> SpectralPolynomial {
        self.terms
            .get(&power)
            .cloned()
            .unwrap_or_else(|| SpectralPolynomial::zero(self.dim))
    }
}

/// `𝓕_{k,-1}`: `(1/i)` times the `X^{-1}` coefficient of
/// `[(X + H_α)/L + 𝓟]^k e^{iL𝓟}` with `𝓟 = Σ_ν p̃_ν X^{-ν}`.
pub fn derivative_polynomial(q: &QbnfResult, k: usize) -> Result<SpectralPolynomial> {
    if q.p_tilde.len() < k + 1 {
        return Err(Error::Truncation(format!(
            "wave invariant of order {k} needs p̃ through index {}, have {}",
            k + 1,
            q.p_tilde.len()
        )));
    }
    let dim = q.dim;
    let length = q.length;
    let mut ladder = Laurent::zero(dim);
    for nu in 1..=k + 1 {
        let sf = spectral_function(&q.p_tilde[nu - 1])?;
        ladder = ladder.add(&Laurent::single(-(nu as i32), sf));
    }
    let mut base = Laurent::single(1, SpectralPolynomial::constant(dim, Complex64::new(1.0 / length, 0.0)));
    base = base.add(&Laurent::single(
        0,
        SpectralPolynomial::linear(&q.alpha).scale(Complex64::new(1.0 / length, 0.0)),
    ));
    base = base.add(&ladder);
    let mut prefactor = Laurent::single(0, SpectralPolynomial::constant(dim, Complex64::new(1.0, 0.0)));
    for _ in 0..k {
        prefactor = prefactor.mul(&base);
    }
    // each power of 𝓟 lowers the X-degree by at least one
    let exponent_arg = ladder.scale(Complex64::new(0.0, length));
    let mut exponential = Laurent::single(0, SpectralPolynomial::constant(dim, Complex64::new(1.0, 0.0)));
    let mut power = exponential.clone();
    for n in 1..=k + 1 {
        power = power.mul(&exponent_arg).scale(Complex64::new(1.0 / n as f64, 0.0));
        exponential = exponential.add(&power);
    }
    let full = prefactor.mul(&exponential);
    Ok(full.coefficient(-1).scale(Complex64::new(0.0, -1.0)))
}

#[derive(Clone, Debug)]
pub struct WaveInvariantReport {
    pub k: usize,
    pub a: Complex64,
    pub alpha: Vec<f64>,
    pub beta: Vec<Complex64>,
    pub morse_index: usize,
    /// `c_γ = i^σ L |det(I - P_γ)|^{-1/2}`.
    pub principal: Complex64,
    /// `a · L / c_γ`.
    pub factored: Complex64,
    pub trace: Complex64,
    pub lifted_rotation: f64,
    pub length: f64,
}

impl WaveInvariantReport {
    pub fn to_json(&self) -> serde_json::Value {
        let cplx = |c: Complex64| json!({ "re": c.re, "im": c.im });
        json!({
            "k": self.k,
            "a": cplx(self.a),
            "alpha": self.alpha,
            "beta": self.beta.iter().map(|b| cplx(*b)).collect::<Vec<_>>(),
            "sigma": self.morse_index,
            "c_gamma": cplx(self.principal),
            "a_over_c_gamma_times_L": cplx(self.factored),
            "trace_T": cplx(self.trace),
            "lifted_rotation": self.lifted_rotation,
            "L": self.length,
            "conventions": CONVENTION_LEDGER,
        })
    }
}

/// `c_γ` for a primitive elliptic orbit.
pub fn principal_invariant(length: f64, alpha: &[f64], sigma: usize) -> Complex64 {
    let det: f64 = alpha
        .iter()
        .map(|a| 4.0 * (a / 2.0).sin().powi(2))
        .product();
    Complex64::new(0.0, 1.0).powu(sigma as u32) * length / det.sqrt()
}

/// `a_γk` with the frame's Floquet data.
pub fn wave_invariant(q: &QbnfResult, k: usize, fr: &JacobiFrame, sigma: usize) -> Result<WaveInvariantReport> {
    let alpha = fr.alpha().to_vec();
    let f = derivative_polynomial(q, k)?;
    let a = hermite_trace(&f, &alpha)?;
    let trace = hermite_trace(&SpectralPolynomial::constant(alpha.len(), Complex64::new(1.0, 0.0)), &alpha)?;
    let principal = principal_invariant(q.length, &alpha, sigma);
    Ok(WaveInvariantReport {
        k,
        a,
        beta: alpha.iter().map(|&x| beta(x)).collect(),
        alpha,
        morse_index: sigma,
        principal,
        factored: a * q.length / principal,
        trace,
        lifted_rotation: fr.lifted_rotation,
        length: q.length,
    })
}

/// `a_γ0` as a function of the rotation angle with the ladder held fixed.
pub fn principal_residue_at(q: &QbnfResult, alpha: &[f64]) -> Result<Complex64> {
    let mut shifted = q.clone();
    shifted.alpha = alpha.to_vec();
    let f = derivative_polynomial(&shifted, 0)?;
    hermite_trace(&f, alpha)
}

/// Basis used to fit `a_γ0 / (L T(α))` in a surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaBasis {
    /// `{2β² - β - 3/4, 1}`.
    #[default]
    Stated,
    /// `{8β² - 8β + 2, 1}`, the spectral function of `|z|⁴` traced against `T`.
    Derived,
}

impl BetaBasis {
    fn quartic(self, b: Complex64) -> Complex64 {
        match self {
            BetaBasis::Stated => 2.0 * b * b - b - 0.75,
            BetaBasis::Derived => 8.0 * b * b - 8.0 * b + 2.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BetaBasis::Stated => "2β²-β-3/4",
            BetaBasis::Derived => "8β²-8β+2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BetaFit {
    pub basis: BetaBasis,
    pub b4: f64,
    pub b0: f64,
    /// Largest pointwise misfit relative to the largest sample.
    pub residual: f64,
    /// `|z|⁴` and constant coefficients of `p̃₁`.
    pub expected_b4: f64,
    pub expected_b0: f64,
    pub condition: f64,
}

impl BetaFit {
    pub fn coefficient_error(&self) -> f64 {
        let rel = |fit: f64, want: f64| (fit - want).abs() / want.abs().max(1e-300);
        let e4 = if self.expected_b4.abs() > 1e-14 {
            rel(self.b4, self.expected_b4)
        } else {
            self.b4.abs()
        };
        e4.max(rel(self.b0, self.expected_b0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "basis": self.basis.label(),
            "B4": self.b4,
            "B0": self.b0,
            "residual": self.residual,
            "expected_B4": self.expected_b4,
            "expected_B0": self.expected_b0,
            "condition": self.condition,
        })
    }
}

/// Real least-squares fit of `a_γ0(α) / (L T(α))` over the sampled angles.
pub fn beta_form_check(q: &QbnfResult, alphas: &[f64], basis: BetaBasis) -> Result<BetaFit> {
    if q.dim != 1 {
        return Err(Error::DimensionMismatch { left: q.dim, right: 1 });
    }
    if alphas.len() < 2 {
        return Err(Error::FitFailure("need at least two angles".to_string()));
    }
    let rows = 2 * alphas.len();
    let mut design = nalgebra::DMatrix::<f64>::zeros(rows, 2);
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    let mut values = Vec::with_capacity(alphas.len());
    for (i, &a) in alphas.iter().enumerate() {
        let value = principal_residue_at(q, &[a])? / (q.length * trace_distribution(a)?.value);
        let phi = basis.quartic(beta(a));
        design[(2 * i, 0)] = phi.re;
        design[(2 * i + 1, 0)] = phi.im;
        design[(2 * i, 1)] = 1.0;
        design[(2 * i + 1, 1)] = 0.0;
        rhs[2 * i] = value.re;
        rhs[2 * i + 1] = value.im;
        values.push((phi, value));
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::FitFailure("ill-conditioned angle sample".to_string()));
    }
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let (b4, b0) = (sol[0], sol[1]);
    let scale = values.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max).max(1e-300);
    let residual = values
        .iter()
        .map(|(phi, v)| (phi * b4 + b0 - v).norm())
        .fold(0.0, f64::max)
        / scale;
    let p1 = q
        .p_tilde(1)
        .ok_or_else(|| Error::Truncation("p̃₁ missing".to_string()))?;
    let coeff = |e: u16| {
        p1.coefficient(&crate::symbol::Monomial::new(vec![e], vec![e]))
            .map(|c| c.mode(0).re)
            .unwrap_or(0.0)
    };
    Ok(BetaFit {
        basis,
        b4,
        b0,
        residual,
        expected_b4: coeff(2),
        expected_b0: coeff(0),
        condition: smax / smin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_at_half_turn() {
        let t = trace_distribution(std::f64::consts::PI).unwrap();
        assert!((t.value - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn second_trace_polynomial() {
        // G_2 / β = 2β² - 2β + 1/4
        let g = trace_polynomials(2);
        let want = [0.0, 0.25, -2.0, 2.0];
        for (a, b) in g[2].iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
