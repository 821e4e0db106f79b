// SPDX-License-Identifier: MIT OR Apache-2.0

//! Laplace eigenvalues of surfaces of revolution `dr² + a(r)² dθ²` by
//! separation of variables, and a fit of their ladders against the
//! quasi-eigenvalue form.
//!
//! With `u = a^{-1/2} w(r) e^{ikθ}` the radial problem is
//! `-w'' + [k²/a² + (√a)''/√a] w = λ² w`, solved here by second-order finite
//! differences, Sturm bisection and Richardson extrapolation in the mesh.

use serde_json::json;

use crate::error::{Error, Result};
use crate::germ::Profile;

/// Discretization of the radial interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh {
    /// Dirichlet interval `[-radius, radius]` around the equator `r = 0`.
    pub radius: f64,
    /// Coarse spacing; the fine mesh uses half of it.
    pub spacing: f64,
}

impl Default for Mesh {
    fn default() -> Self {
        Self { radius: 0.9, spacing: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenLadder {
    pub k: i64,
    /// Extrapolated `λ_{kq}` for `q = 0..=q_max`.
    pub lambdas: Vec<f64>,
    /// Richardson estimate of the fine-mesh error per level.
    pub error_bounds: Vec<f64>,
    pub mesh: Mesh,
}

impl EigenLadder {
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .lambdas
            .iter()
            .zip(&self.error_bounds)
            .enumerate()
            .map(|(q, (l, e))| json!({ "q": q, "lambda": l, "error_bound": e }))
            .collect();
        json!({ "k": self.k, "levels": entries })
    }
}

/// `(√a)''/√a = a''/(2a) - a'²/(4a²)`.
fn potential(profile: &Profile, r: f64, k: f64) -> f64 {
    let a = profile.value(r);
    let d1 = profile.derivative(r, 1);
    let d2 = profile.derivative(r, 2);
    k * k / (a * a) + d2 / (2.0 * a) - d1 * d1 / (4.0 * a * a)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    let off2 = off * off;
    for (i, &a) in diag.iter().enumerate() {
        d = if i == 0 { a - x } else { a - x - off2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a.abs() + x.abs()).max(1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of `-w'' + V w` on the given mesh.
fn lowest_eigenvalues(profile: &Profile, k: f64, radius: f64, spacing: f64, count: usize) -> Result<Vec<f64>> {
    let n = (2.0 * radius / spacing).round() as usize - 1;
    let h = 2.0 * radius / (n + 1) as f64;
    let inv = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    for i in 1..=n {
        let r = -radius + i as f64 * h;
        let a = profile.value(r);
        if a <= 0.0 {
            return Err(Error::IllPosed(format!("profile vanishes at r = {r}")));
        }
        diag.push(2.0 * inv + potential(profile, r, k));
    }
    let off = -inv;
    let lo0 = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * inv;
    let hi0 = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * inv;
    let mut out = Vec::with_capacity(count);
    for target in 0..count {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, off, mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// `λ_{kq}`, `q = 0..=q_max`, with a two-mesh Richardson estimate.
pub fn rev_surface_eigenvalues(
    profile: &Profile,
    ks: &[i64],
    q_max: usize,
    mesh: Mesh,
    tol: f64,
) -> Result<Vec<EigenLadder>> {
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let coarse = lowest_eigenvalues(profile, k as f64, mesh.radius, mesh.spacing, q_max + 1)?;
        let fine = lowest_eigenvalues(profile, k as f64, mesh.radius, mesh.spacing / 2.0, q_max + 1)?;
        let mut lambdas = Vec::with_capacity(q_max + 1);
        let mut errors = Vec::with_capacity(q_max + 1);
        for (c, f) in coarse.iter().zip(&fine) {
            let extrapolated = (4.0 * f - c) / 3.0;
            let lam = extrapolated.sqrt();
            let lam_fine = f.sqrt();
            let bound = (lam - lam_fine).abs();
            if bound > tol {
                return Err(Error::Unconverged(format!(
                    "k = {k}: Richardson bound {bound:.3e} exceeds {tol:.1e}"
                )));
            }
            lambdas.push(lam);
            errors.push(bound);
        }
        out.push(EigenLadder {
            k,
            lambdas,
            error_bounds: errors,
            mesh,
        });
    }
    Ok(out)
}

/// One fitted level.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasimodeFit {
    pub q: usize,
    /// `L · A` from `λ - r ≈ A/r + B/r²`.
    pub p1: f64,
    pub second: f64,
    pub residual: f64,
    /// Change of `p1` when the upper half of the window is dropped.
    pub stability: f64,
    /// Levels whose nearest harmonic prediction is another `q`.
    pub ambiguous: Vec<i64>,
}

impl QuasimodeFit {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "q": self.q,
            "p1": self.p1,
            "second": self.second,
            "residual": self.residual,
            "stability": self.stability,
            "ambiguous_k": self.ambiguous,
        })
    }
}

/// `r_{kq} = (2πk + α̃ (q + ½)) / L`.
pub fn harmonic_level(k: i64, q: usize, lifted_alpha: f64, length: f64) -> f64 {
    (std::f64::consts::TAU * k as f64 + lifted_alpha * (q as f64 + 0.5)) / length
}

fn fit_window(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let m = points.len();
    if m < 3 {
        return Err(Error::FitFailure("need at least three ladder points".to_string()));
    }
    let mut design = nalgebra::DMatrix::<f64>::zeros(m, 2);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m);
    for (i, (r, y)) in points.iter().enumerate() {
        design[(i, 0)] = 1.0 / r;
        design[(i, 1)] = 1.0 / (r * r);
        rhs[i] = *y;
    }
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-15)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let residual = (&design * &sol - &rhs).amax();
    Ok((sol[0], sol[1], residual))
}

/// Fits `λ_{kq} - r_{kq}` against `1/r` and `1/r²` for each `q`.
pub fn quasimode_fit(
    ladders: &[EigenLadder],
    lifted_alpha: f64,
    length: f64,
    q_max: usize,
) -> Result<Vec<QuasimodeFit>> {
    let mut out = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let mut points = Vec::new();
        let mut ambiguous = Vec::new();
        for ladder in ladders {
            let Some(&lam) = ladder.lambdas.get(q) else {
                return Err(Error::FitFailure(format!("ladder k = {} lacks level {q}", ladder.k)));
            };
            let r = harmonic_level(ladder.k, q, lifted_alpha, length);
            let nearest = (0..ladder.lambdas.len())
                .min_by(|&a, &b| {
                    let da = (harmonic_level(ladder.k, a, lifted_alpha, length) - lam).abs();
                    let db = (harmonic_level(ladder.k, b, lifted_alpha, length) - lam).abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(q);
            if nearest != q {
                ambiguous.push(ladder.k);
            }
            points.push((r, lam - r));
        }
        let (a, b, residual) = fit_window(&points)?;
        let half = &points[..points.len() / 2 + 1];
        let (a_half, _, _) = fit_window(half)?;
        out.push(QuasimodeFit {
            q,
            p1: length * a,
            second: b,
            residual,
            stability: length * (a - a_half).abs(),
            ambiguous,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_of_identity_shift() {
        assert_eq!(sturm_count(&[1.0, 1.0, 1.0], 0.0, 1.5), 3);
        assert_eq!(sturm_count(&[1.0, 1.0, 1.0], 0.0, 0.5), 0);
    }
}
