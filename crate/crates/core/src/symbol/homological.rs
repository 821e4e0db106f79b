// SPDX-License-Identifier: MIT OR Apache-2.0

//! The twisted homological equation `L⁻¹ ∂_s q = -i (d - f)`.
//!
//! Each monomial decouples. A coefficient with twist `θ` has Fourier modes
//! `e^{i(2πk + θ)s/L}`, on which `∂_s` is diagonal, so the twisted-periodic
//! solution is unique whenever `e^{iθ} ≠ 1`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::coefficient::PeriodicCoefficient;
use super::poly::WeylPolynomial;
use crate::error::{Error, Result};

/// Default cutoff on `|1 - e^{i(m-n)·α}|`.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-6;

/// Whether the diagonal part of the right-hand side is absorbed into `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeMode {
    /// No diagonal average allowed; `f = 0`.
    Odd,
    /// `f` is the arclength mean of the diagonal part.
    Even,
}

/// Solves `L⁻¹ ∂_s q = -i(d - f)` monomial by monomial.
///
/// Returns `(q, f)`; the diagonal part of `q` has zero mean.
pub fn solve_twisted_ode(
    d: &WeylPolynomial,
    alpha: &[f64],
    mode: OdeMode,
    resonance_tol: f64,
) -> Result<(WeylPolynomial, WeylPolynomial)> {
    solve_twisted_ode_at_step(d, alpha, mode, resonance_tol, None)
}

pub(crate) fn solve_twisted_ode_at_step(
    d: &WeylPolynomial,
    alpha: &[f64],
    mode: OdeMode,
    resonance_tol: f64,
    step: Option<u32>,
) -> Result<(WeylPolynomial, WeylPolynomial)> {
    if alpha.len() != d.dim() {
        return Err(Error::DimensionMismatch {
            left: alpha.len(),
            right: d.dim(),
        });
    }
    let period = d.period();
    let max_freq = d.max_freq();
    let mut q = WeylPolynomial::zero(d.dim(), period, max_freq).with_alpha(alpha);
    let mut f = WeylPolynomial::zero(d.dim(), period, max_freq).with_alpha(alpha);
    let scale = d.max_abs().max(1.0);
    for (mono, coeff) in d.terms() {
        let theta = mono.twist(alpha);
        let mut rhs = coeff.clone();
        rhs.set_twist(theta);
        if mono.is_diagonal() {
            let mean = rhs.mean();
            match mode {
                OdeMode::Odd => {
                    if mean.norm() > 1e-10 * scale {
                        return Err(Error::Consistency(format!(
                            "diagonal monomial {} has nonzero mean {mean} in an odd step",
                            mono.label()
                        )));
                    }
                }
                OdeMode::Even => {
                    if mean.norm() > 0.0 {
                        f.add_term(
                            mono.clone(),
                            PeriodicCoefficient::constant(period, max_freq, mean),
                        );
                    }
                }
            }
            let fluct = rhs.sub(&PeriodicCoefficient::constant(period, max_freq, mean));
            let qc = fluct
                .antiderivative()?
                .scale(Complex64::new(0.0, -period));
            q.add_term(mono.clone(), qc);
        } else {
            let divisor = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta)).norm();
            if divisor < resonance_tol {
                return Err(Error::Resonance {
                    exponent: mono.exponent(),
                    divisor,
                    step,
                });
            }
            // q_k = -i L · rhs_k / (i (2πk + θ) / L) = -L² rhs_k / (2πk + θ)
            let modes = rhs.modes().iter().map(|(k, a)| {
                let w = TAU * *k as f64 + theta;
                (*k, -a * period * period / w)
            });
            let qc = PeriodicCoefficient::from_modes(period, theta, max_freq, modes);
            q.add_term(mono.clone(), qc);
        }
    }
    Ok((q, f))
}

/// `q(0)` from the monodromy condition `q(L) - q(0) = -iL ∫_0^L (d - f)` with
/// `q_mn(L) = e^{-i(m-n)·α} q_mn(0)`, for an arbitrary (not necessarily
/// twist-matched) right-hand side.
pub fn monodromy_initial_value(
    d: &WeylPolynomial,
    alpha: &[f64],
    resonance_tol: f64,
) -> Result<Vec<(super::poly::Monomial, Complex64)>> {
    let period = d.period();
    let mut out = Vec::new();
    for (mono, coeff) in d.terms() {
        if mono.is_diagonal() {
            continue;
        }
        let theta = mono.twist(alpha);
        let rho = Complex64::from_polar(1.0, theta);
        let divisor = rho - 1.0;
        if divisor.norm() < resonance_tol {
            return Err(Error::Resonance {
                exponent: mono.exponent(),
                divisor: divisor.norm(),
                step: None,
            });
        }
        let integral = coeff.integral_over_period();
        out.push((mono.clone(), Complex64::new(0.0, -period) * integral / divisor));
    }
    Ok(out)
}

/// Largest coefficient-wise residual of `L⁻¹ ∂_s q + i (d - f)`.
pub fn ode_residual(q: &WeylPolynomial, d: &WeylPolynomial, f: &WeylPolynomial) -> f64 {
    let lhs = q.ds().scale_real(1.0 / q.period());
    let rhs = d.sub(f).scale(Complex64::new(0.0, 1.0));
    lhs.add(&rhs).max_abs()
}

/// Largest violation of `q_mn(L) - q_mn(0) = -iL ∫_0^L (d - f)_mn` together with
/// the twist relation `q_mn(L) = e^{-i(m-n)·α} q_mn(0)`.
pub fn monodromy_residual(q: &WeylPolynomial, d: &WeylPolynomial, f: &WeylPolynomial) -> f64 {
    let period = q.period();
    let diff = d.sub(f);
    let mut worst: f64 = 0.0;
    let mut monos: Vec<_> = q.terms().keys().cloned().collect();
    monos.extend(diff.terms().keys().cloned());
    monos.sort();
    monos.dedup();
    for mono in monos {
        let q0 = q.coefficient(&mono).map(|c| c.eval(0.0)).unwrap_or_default();
        let ql = q.coefficient(&mono).map(|c| c.eval(period)).unwrap_or_default();
        let integral = diff
            .coefficient(&mono)
            .map(|c| c.integral_over_period())
            .unwrap_or_default();
        let rho = Complex64::from_polar(1.0, mono.twist(q.alpha()));
        worst = worst.max((ql - q0 + Complex64::new(0.0, period) * integral).norm());
        worst = worst.max((ql - rho * q0).norm());
    }
    worst
}
