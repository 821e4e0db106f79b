// SPDX-License-Identifier: MIT OR Apache-2.0

//! Classical Birkhoff normal form and a geodesic-flow twist oracle.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::germ::MetricGerm;
use crate::jacobi::JacobiFrame;
use crate::laplacian::{build_scaled_terms_with, conjugate_to_model_with};
use crate::normal_form::{diagonal_coefficients, scnf_iterate_with, ScnfResult};
use crate::symbol::{Calculus, WeylPolynomial};

#[derive(Clone, Debug)]
pub struct ClassicalNormalForm {
    pub alpha: Vec<f64>,
    pub length: f64,
    /// `∂²p₁/∂I_i∂I_j` of the quadratic action part of `p₁ = (L/2) f₀`.
    pub twist: DMatrix<f64>,
    /// `p₁` as a symbol in `z`.
    pub p1: WeylPolynomial,
    /// Classical `f_k`.
    pub higher: Vec<WeylPolynomial>,
}

impl ClassicalNormalForm {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..self.twist.nrows())
            .map(|i| (0..self.twist.ncols()).map(|j| self.twist[(i, j)]).collect())
            .collect();
        json!({ "alpha": self.alpha, "L": self.length, "twist": rows })
    }
}

/// Hessian in the actions `I_j = |z_j|²/2` of the degree-four diagonal part of `p`.
pub fn action_hessian(p: &WeylPolynomial) -> DMatrix<f64> {
    let n = p.dim();
    let mut h = DMatrix::zeros(n, n);
    for (mono, c) in diagonal_coefficients(p) {
        let e: Vec<usize> = mono.m.iter().map(|&v| v as usize).collect();
        if e.iter().sum::<usize>() != 2 {
            continue;
        }
        // |z_i|²|z_j|² = 4 I_i I_j
        let idx: Vec<usize> = e
            .iter()
            .enumerate()
            .flat_map(|(j, &k)| std::iter::repeat(j).take(k))
            .collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            h[(i, i)] += 8.0 * c.re;
        } else {
            h[(i, j)] += 4.0 * c.re;
            h[(j, i)] += 4.0 * c.re;
        }
    }
    h
}

/// Runs the normal form with the Poisson-level calculus.
pub fn classical_normal_form(g: &MetricGerm, fr: &JacobiFrame, order: usize, resonance_tol: f64) -> Result<ClassicalNormalForm> {
    let scnf = classical_scnf(g, fr, order, resonance_tol)?;
    let p1 = scnf.f[0].scale_real(scnf.length / 2.0);
    Ok(ClassicalNormalForm {
        alpha: scnf.alpha.clone(),
        length: scnf.length,
        twist: action_hessian(&p1),
        p1,
        higher: scnf.f,
    })
}

pub fn classical_scnf(g: &MetricGerm, fr: &JacobiFrame, order: usize, resonance_tol: f64) -> Result<ScnfResult> {
    let top = 4 + 2 * order as u32;
    let ladder = build_scaled_terms_with(g, top, Calculus::Classical)?;
    let model = conjugate_to_model_with(&ladder, fr, Calculus::Classical)?;
    scnf_iterate_with(&model, order, resonance_tol, Calculus::Classical)
}

/// Solves `(i m + ω) ĉ(m) = â(m)` mode by mode.
pub fn small_divisor_solve(
    modes: &BTreeMap<i64, Complex64>,
    omega: f64,
    tol: f64,
) -> Result<BTreeMap<i64, Complex64>> {
    let mut out = BTreeMap::new();
    for (&m, &a) in modes {
        let divisor = Complex64::new(omega, m as f64);
        if divisor.norm() < tol {
            return Err(Error::NearResonance(format!(
                "small divisor |i·{m} + {omega}| = {:.3e}",
                divisor.norm()
            )));
        }
        out.insert(m, a / divisor);
    }
    Ok(out)
}

/// One sample of the transverse flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSample {
    pub action: f64,
    pub period: f64,
    pub rotation: f64,
}

#[derive(Clone, Debug)]
pub struct TwistFit {
    pub samples: Vec<FlowSample>,
    pub rotation_at_zero: f64,
    pub twist: f64,
    pub residual: f64,
}

/// Arclength-independent jets of `g^{oo}` through order four.
fn warp_polynomial(g: &MetricGerm) -> Result<Vec<f64>> {
    let goo = g.inverse_metric(0, 0);
    let mut coeffs = Vec::new();
    for k in 0..=4u16 {
        let c = goo.coefficient(&[k]);
        let fluct = c
            .modes()
            .iter()
            .filter(|(m, _)| **m != 0)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        if fluct > 1e-12 {
            return Err(Error::IllPosed(
                "flow oracle needs arclength-independent jets (a surface of revolution)".to_string(),
            ));
        }
        coeffs.push(c.mode(0).re);
    }
    if g.max_jet_order() < 4 {
        return Err(Error::InsufficientJets {
            needed: 4,
            available: g.max_jet_order() as usize,
        });
    }
    Ok(coeffs)
}

fn eval_poly(c: &[f64], y: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for &a in c.iter().rev() {
        d = d * y + v;
        v = v * y + a;
    }
    (v, d)
}

/// `(y, η, ∮η dy)` with `dy/ds = η/G`, `dη/ds = -G'/(2G)` at unit tangential momentum.
fn rhs(c: &[f64], state: [f64; 3]) -> [f64; 3] {
    let (gv, gd) = eval_poly(c, state[0]);
    let dy = state[1] / gv;
    [dy, -gd / (2.0 * gv), state[1] * dy]
}

fn rk4(c: &[f64], s: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]];
    let k1 = rhs(c, s);
    let k2 = rhs(c, add(s, k1, h / 2.0));
    let k3 = rhs(c, add(s, k2, h / 2.0));
    let k4 = rhs(c, add(s, k3, h));
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Period and action of the transverse oscillation launched from `y = 0`
/// with momentum `eta0`.
pub fn flow_sample(g: &MetricGerm, eta0: f64, steps_per_period: usize) -> Result<FlowSample> {
    let c = warp_polynomial(g)?;
    let tau = c[2];
    if tau <= 0.0 {
        return Err(Error::NotElliptic(tau));
    }
    let h = std::f64::consts::TAU / tau.sqrt() / steps_per_period as f64;
    let mut state = [0.0, eta0, 0.0];
    let mut s = 0.0;
    let mut half_done = false;
    for _ in 0..(16 * steps_per_period) {
        let next = rk4(&c, state, h);
        if next[0] < 0.0 && state[0] >= 0.0 && s > 0.0 {
            half_done = true;
        }
        if half_done && state[0] < 0.0 && next[0] >= 0.0 {
            // secant refinement of the step that lands on y = 0
            let (mut lo, mut hi) = (0.0, h);
            let (mut ylo, mut yhi) = (state[0], next[0]);
            let mut dt = h;
            for _ in 0..60 {
                dt = lo - ylo * (hi - lo) / (yhi - ylo);
                let trial = rk4(&c, state, dt);
                if trial[0].abs() < 1e-15 {
                    break;
                }
                if trial[0] < 0.0 {
                    lo = dt;
                    ylo = trial[0];
                } else {
                    hi = dt;
                    yhi = trial[0];
                }
            }
            let end = rk4(&c, state, dt);
            let period = s + dt;
            let action = end[2] / std::f64::consts::TAU;
            let length = g.length();
            return Ok(FlowSample {
                action,
                period,
                rotation: std::f64::consts::TAU * length / period,
            });
        }
        state = next;
        s += h;
    }
    Err(Error::IntegrationFailure(format!(
        "no return to the geodesic for η₀ = {eta0}"
    )))
}

/// Fits `ρ(I) = ρ₀ + c I + d I²` over a fan of small actions and returns `c`.
pub fn twist_from_flow(g: &MetricGerm, momenta: &[f64]) -> Result<TwistFit> {
    if g.transverse_dim() != 1 {
        return Err(Error::DimensionMismatch {
            left: g.transverse_dim(),
            right: 1,
        });
    }
    if momenta.len() < 4 {
        return Err(Error::FitFailure("need at least four launch momenta".to_string()));
    }
    let samples: Vec<FlowSample> = momenta
        .iter()
        .map(|&e| flow_sample(g, e, 4000))
        .collect::<Result<_>>()?;
    let mut design = DMatrix::<f64>::zeros(samples.len(), 3);
    let mut rhs_v = nalgebra::DVector::<f64>::zeros(samples.len());
    for (i, smp) in samples.iter().enumerate() {
        design[(i, 0)] = 1.0;
        design[(i, 1)] = smp.action;
        design[(i, 2)] = smp.action * smp.action;
        rhs_v[i] = smp.rotation;
    }
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs_v, 1e-15)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let residual = (&design * &sol - &rhs_v).amax();
    Ok(TwistFit {
        samples,
        rotation_at_zero: sol[0],
        twist: sol[1],
        residual,
    })
}

/// Launch momenta for the default action fan.
pub fn default_fan() -> Vec<f64> {
    (1..=8).map(|k| 0.004 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_small_divisor_hits_only_mean() {
        let modes: BTreeMap<i64, Complex64> = [(0, Complex64::new(2.0, 0.0))].into_iter().collect();
        let out = small_divisor_solve(&modes, 0.5, 1e-9).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[&0] - Complex64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hessian_of_quartic_action() {
        let p = WeylPolynomial::monomial(
            1,
            1.0,
            0,
            crate::symbol::Monomial::new(vec![2], vec![2]),
            Complex64::new(0.25, 0.0),
        );
        // 0.25 |z|⁴ = I², Hessian 2
        assert!((action_hessian(&p)[(0, 0)] - 2.0).abs() < 1e-15);
    }
}
