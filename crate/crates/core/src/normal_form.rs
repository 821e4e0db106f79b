// SPDX-License-Identifier: MIT OR Apache-2.0

//! The semiclassical normal form iteration and the Birkhoff ladder built on it.
//!
//! Starting from the conjugated model ladder `Σ ε^m 𝒟_m`, step `m ≥ 3` removes
//! the `s`-dependence and the off-diagonal part of the `D_s⁰` coefficient of
//! `𝒟_m` with the generator `e^{iε^{m-2} Q}`. Even steps leave behind the
//! diagonal average `f_{(m-4)/2}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::laplacian::ExpansionLadder;
use crate::symbol::{
    moyal_product, solve_twisted_ode_at_step, Calculus, Monomial, OdeMode, WeylPolynomial,
};

/// Diagnostics for one step of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    /// Ladder order `m` handled by this step.
    pub step: u32,
    /// Half-integer grade `2 - m/2` of the removed term.
    pub grade: f64,
    pub even: bool,
    pub rhs_norm: f64,
    pub generator_norm: f64,
    /// What remains of the `D_s⁰` part after conjugation, minus `f`.
    pub post_residual: f64,
}

impl StepTrace {
    fn to_json(&self) -> serde_json::Value {
        json!({
            "step": self.step,
            "grade": self.grade,
            "mode": if self.even { "even" } else { "odd" },
            "rhs_norm": self.rhs_norm,
            "generator_norm": self.generator_norm,
            "post_residual": self.post_residual,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ScnfResult {
    pub length: f64,
    pub alpha: Vec<f64>,
    pub dim: usize,
    pub order: usize,
    /// `f_k`, diagonal with constant coefficients.
    pub f: Vec<WeylPolynomial>,
    /// The generator `Q` indexed by ladder order `m` (grade `(m-2)/2`).
    pub generators: BTreeMap<u32, WeylPolynomial>,
    pub ladder_trace: Vec<StepTrace>,
    pub ladder: ExpansionLadder,
}

/// Constant diagonal coefficients of a normal form symbol, keyed by monomial.
pub fn diagonal_coefficients(p: &WeylPolynomial) -> Vec<(Monomial, Complex64)> {
    p.terms()
        .iter()
        .filter(|(m, _)| m.is_diagonal())
        .map(|(m, c)| (m.clone(), c.mode(0)))
        .collect()
}

fn coefficient_json(p: &WeylPolynomial) -> serde_json::Value {
    let entries: Vec<_> = diagonal_coefficients(p)
        .into_iter()
        .map(|(m, c)| json!({ "action_exponent": m.m, "re": c.re, "im": c.im }))
        .collect();
    serde_json::Value::Array(entries)
}

/// Largest exponent sum `Σ m_j` among monomials, i.e. the degree in the actions.
pub fn action_degree(p: &WeylPolynomial) -> u32 {
    p.terms()
        .keys()
        .map(|m| m.m.iter().map(|&e| e as u32).sum::<u32>().max(m.n.iter().map(|&e| e as u32).sum()))
        .max()
        .unwrap_or(0)
}

/// Largest departure from "diagonal with constant coefficients".
pub fn normal_form_defect(p: &WeylPolynomial) -> f64 {
    let mut worst: f64 = 0.0;
    for (mono, c) in p.terms() {
        if !mono.is_diagonal() {
            worst = worst.max(c.max_abs());
            continue;
        }
        let others: f64 = c
            .modes()
            .iter()
            .filter(|(k, _)| **k != 0)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        worst = worst.max(others);
    }
    worst
}

/// Largest imaginary part among the constant coefficients.
pub fn max_imaginary(p: &WeylPolynomial) -> f64 {
    diagonal_coefficients(p)
        .iter()
        .map(|(_, c)| c.im.abs())
        .fold(0.0, f64::max)
}

impl ScnfResult {
    /// `c_{k;j}`: constant coefficient of `|z|^{2j}` in `f_k`.
    pub fn c(&self, k: usize) -> Vec<(Monomial, Complex64)> {
        self.f.get(k).map(diagonal_coefficients).unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f: Vec<_> = self
            .f
            .iter()
            .enumerate()
            .map(|(k, p)| json!({ "k": k, "coefficients": coefficient_json(p) }))
            .collect();
        json!({
            "L": self.length,
            "alpha": self.alpha,
            "order": self.order,
            "f": f,
            "trace": self.ladder_trace.iter().map(StepTrace::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Runs steps `m = 3, ..., 4 + 2K` on a conjugated model ladder.
pub fn scnf_iterate(model: &ExpansionLadder, order: usize, resonance_tol: f64) -> Result<ScnfResult> {
    scnf_iterate_with(model, order, resonance_tol, Calculus::Quantum)
}

pub fn scnf_iterate_with(
    model: &ExpansionLadder,
    order: usize,
    resonance_tol: f64,
    calculus: Calculus,
) -> Result<ScnfResult> {
    let top = 4 + 2 * order as u32;
    if model.max_m < top {
        return Err(Error::Truncation(format!(
            "normal form to order {order} needs ladder terms through ε^{top}, have ε^{}",
            model.max_m
        )));
    }
    let alpha = model.alpha().to_vec();
    let mut operator = model.operator.clone();
    operator.max_order = top;
    let mut f = Vec::new();
    let mut generators = BTreeMap::new();
    let mut trace = Vec::new();
    for m in 3..=top {
        let even = m % 2 == 0;
        let rhs = operator.order(m).part(0);
        let mode = if even { OdeMode::Even } else { OdeMode::Odd };
        let (q, fk) = solve_twisted_ode_at_step(&rhs, &alpha, mode, resonance_tol, Some(m))?;
        let generator = q.scale(Complex64::new(0.0, 0.5));
        if !generator.is_zero() {
            operator = operator.conjugate_exp(&generator, m - 2, calculus)?;
        }
        let post_residual = operator.order(m).part(0).distance(&fk);
        trace.push(StepTrace {
            step: m,
            grade: 2.0 - m as f64 / 2.0,
            even,
            rhs_norm: rhs.max_abs(),
            generator_norm: generator.max_abs(),
            post_residual,
        });
        if even {
            f.push(fk);
        }
        generators.insert(m, generator);
    }
    Ok(ScnfResult {
        length: model.length,
        alpha,
        dim: model.dim,
        order,
        f,
        generators,
        ladder_trace: trace,
        ladder: ExpansionLadder {
            max_m: top,
            length: model.length,
            dim: model.dim,
            operator,
        },
    })
}

/// `p_k`, `p̃_k` and the Birkhoff coefficients `B_{k;j}`.
#[derive(Clone, Debug)]
pub struct QbnfResult {
    pub length: f64,
    pub alpha: Vec<f64>,
    pub dim: usize,
    /// `p[k-1] = p_k` for `k = 1..=K+1`.
    pub p: Vec<WeylPolynomial>,
    /// `p_tilde[k-1] = p̃_k`.
    pub p_tilde: Vec<WeylPolynomial>,
}

impl QbnfResult {
    pub fn p(&self, k: usize) -> Option<&WeylPolynomial> {
        k.checked_sub(1).and_then(|i| self.p.get(i))
    }

    pub fn p_tilde(&self, k: usize) -> Option<&WeylPolynomial> {
        k.checked_sub(1).and_then(|i| self.p_tilde.get(i))
    }

    /// `B_{k;j}` for `p̃_{k+1}`, keyed by the monomial `|z|^{2j}`.
    pub fn b(&self, k: usize) -> Vec<(Monomial, Complex64)> {
        self.p_tilde(k + 1).map(diagonal_coefficients).unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let block = |v: &[WeylPolynomial]| -> Vec<serde_json::Value> {
            v.iter()
                .enumerate()
                .map(|(i, p)| json!({ "k": i + 1, "coefficients": coefficient_json(p) }))
                .collect()
        };
        json!({
            "L": self.length,
            "alpha": self.alpha,
            "p": block(&self.p),
            "p_tilde": block(&self.p_tilde),
        })
    }
}

fn binomial_general(top: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (top - i as f64) / (i + 1) as f64;
    }
    acc
}

/// `H_α = Σ α_j |z_j|² / 2`.
pub fn rotation_hamiltonian(dim: usize, length: f64, max_freq: i64, alpha: &[f64]) -> WeylPolynomial {
    let mut h = WeylPolynomial::zero(dim, length, max_freq).with_alpha(alpha);
    for (j, a) in alpha.iter().enumerate() {
        let mut m = vec![0u16; dim];
        m[j] = 1;
        h = h.add(
            &WeylPolynomial::monomial(dim, length, max_freq, Monomial::new(m.clone(), m), Complex64::new(a / 2.0, 0.0))
                .with_alpha(alpha),
        );
    }
    h
}

/// Inverts `f_k = (2/L) p_{k+1} + Σ_{i+j=k} p_i # p_j` and re-expands
/// `Σ p_ν (L D_s + H_α)^{-ν}` in powers of `(L D_s)^{-1}`.
pub fn qbnf_assemble(s: &ScnfResult) -> Result<QbnfResult> {
    let length = s.length;
    let mut p: Vec<WeylPolynomial> = Vec::new();
    for (k, fk) in s.f.iter().enumerate() {
        let mut rest = fk.clone();
        for i in 1..k {
            let j = k - i;
            let prod = moyal_product(&p[i - 1], &p[j - 1])?;
            rest = rest.sub(&prod);
        }
        p.push(rest.scale_real(length / 2.0));
    }
    let template = s
        .f
        .first()
        .cloned()
        .unwrap_or_else(|| WeylPolynomial::zero(s.dim, length, 0).with_alpha(&s.alpha));
    let h = rotation_hamiltonian(s.dim, length, template.max_freq(), &s.alpha);
    let mut h_powers = vec![WeylPolynomial::constant(s.dim, length, template.max_freq(), Complex64::new(1.0, 0.0))
        .with_alpha(&s.alpha)];
    for j in 1..p.len() {
        let next = moyal_product(&h_powers[j - 1], &h)?;
        h_powers.push(next);
    }
    let mut p_tilde = Vec::new();
    for k in 1..=p.len() {
        let mut acc = template.sub(&template);
        for nu in 1..=k {
            let j = k - nu;
            let coeff = binomial_general(-(nu as f64), j as u32);
            let term = moyal_product(&p[nu - 1], &h_powers[j])?;
            acc = acc.add(&term.scale_real(coeff));
        }
        p_tilde.push(acc);
    }
    Ok(QbnfResult {
        length,
        alpha: s.alpha.clone(),
        dim: s.dim,
        p,
        p_tilde,
    })
}

/// A polynomial in the oscillator eigenvalues `t_j = q_j + 1/2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralPolynomial {
    pub dim: usize,
    pub terms: BTreeMap<Vec<u16>, Complex64>,
}

impl SpectralPolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut out = Self::zero(dim);
        if c != Complex64::new(0.0, 0.0) {
            out.terms.insert(vec![0; dim], c);
        }
        out
    }

    /// `Σ_j α_j t_j`, the spectral function of `H_α`.
    pub fn linear(coeffs: &[f64]) -> Self {
        let dim = coeffs.len();
        let mut out = Self::zero(dim);
        for (j, &a) in coeffs.iter().enumerate() {
            let mut e = vec![0u16; dim];
            e[j] = 1;
            if a != 0.0 {
                out.terms.insert(e, Complex64::new(a, 0.0));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_default() += c;
        }
        out.terms.retain(|_, c| c.norm() > 0.0);
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, v) in &self.terms {
            let w = v * c;
            if w.norm() > 0.0 {
                out.terms.insert(e.clone(), w);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_default() += c1 * c2;
            }
        }
        out.terms.retain(|_, c| c.norm() > 0.0);
        out
    }

    pub fn eval(&self, t: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(t).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as u32).sum())
            .max()
            .unwrap_or(0)
    }
}

/// `Op(|z|^{2e}) = F_e(Î)` in one dimension, as coefficients of `t^i`.
fn single_action_power(e: usize) -> Result<Vec<Vec<f64>>> {
    // powers[i] = (|z|²)^{#i}, whose quantization is (2t)^i
    let one = WeylPolynomial::constant(1, 1.0, 0, Complex64::new(1.0, 0.0));
    let action = WeylPolynomial::monomial(1, 1.0, 0, Monomial::new(vec![1], vec![1]), Complex64::new(1.0, 0.0));
    let mut powers = vec![one];
    for i in 1..=e {
        let next = moyal_product(&powers[i - 1], &action)?;
        powers.push(next);
    }
    // pointwise[i] expressed in the basis (|z|²)^{#l}
    let mut in_star_basis: Vec<Vec<f64>> = Vec::with_capacity(e + 1);
    for i in 0..=e {
        let mut row = vec![0.0; e + 1];
        row[i] = 1.0;
        for l in 0..i {
            let mono = Monomial::new(vec![l as u16], vec![l as u16]);
            let c = powers[i].constant_coefficient(&mono).re;
            if c != 0.0 {
                let lower = in_star_basis[l].clone();
                for (slot, v) in row.iter_mut().zip(lower) {
                    *slot -= c * v;
                }
            }
        }
        in_star_basis.push(row);
    }
    Ok(in_star_basis
        .into_iter()
        .map(|row| row.iter().enumerate().map(|(l, v)| v * 2f64.powi(l as i32)).collect())
        .collect())
}

/// Spectral function of a diagonal symbol with constant coefficients.
pub fn spectral_function(p: &WeylPolynomial) -> Result<SpectralPolynomial> {
    let dim = p.dim();
    let top = p
        .terms()
        .keys()
        .flat_map(|m| m.m.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    let table = single_action_power(top)?;
    let mut out = SpectralPolynomial { dim, terms: BTreeMap::new() };
    for (mono, coeff) in p.terms() {
        if !mono.is_diagonal() {
            return Err(Error::Consistency(format!(
                "spectral function of off-diagonal monomial {}",
                mono.label()
            )));
        }
        let c = coeff.mode(0);
        // tensor product of the one-dimensional expansions
        let mut partial: Vec<(Vec<u16>, f64)> = vec![(vec![], 1.0)];
        for &e in &mono.m {
            let row = &table[e as usize];
            let mut next = Vec::new();
            for (exps, v) in &partial {
                for (l, w) in row.iter().enumerate() {
                    if *w != 0.0 {
                        let mut ex = exps.clone();
                        ex.push(l as u16);
                        next.push((ex, v * w));
                    }
                }
            }
            partial = next;
        }
        for (exps, w) in partial {
            *out.terms.entry(exps).or_default() += c * w;
        }
    }
    out.terms.retain(|_, c| c.norm() > 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_action_quantizes_to_shifted_square() {
        // Op(|z|⁴) = 4t² + 1
        let p = WeylPolynomial::monomial(1, 1.0, 0, Monomial::new(vec![2], vec![2]), Complex64::new(1.0, 0.0));
        let f = spectral_function(&p).unwrap();
        for t in [0.5, 1.5, 4.5] {
            assert!((f.eval(&[t]).re - (4.0 * t * t + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_binomial_coefficients() {
        assert_eq!(binomial_general(-1.0, 2), 1.0);
        assert_eq!(binomial_general(-2.0, 1), -2.0);
        assert_eq!(binomial_general(-2.0, 2), 3.0);
    }
}
