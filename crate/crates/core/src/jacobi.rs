// SPDX-License-Identifier: MIT OR Apache-2.0

//! Jacobi fields along the geodesic: monodromy, Floquet data and the
//! normalized complex eigenfield frame.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::germ::MetricGerm;
use crate::symbol::{ComplexLinearMap, PeriodicCoefficient};

/// Tolerance on `|λ| = 1` for monodromy eigenvalues.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;

const MIN_STEPS: usize = 64;
const MAX_STEPS: usize = 1 << 19;
const STEP_TOL: f64 = 1e-13;

/// The linear Poincaré map in `(Y, Ẏ)` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Monodromy {
    pub matrix: DMatrix<f64>,
    /// RK4 steps per period that met the step-doubling tolerance.
    pub steps: usize,
}

impl Monodromy {
    pub fn symplectic_defect(&self) -> f64 {
        crate::symbol::symplectic_defect(&self.matrix)
    }

    /// `det(I - P)`.
    pub fn det_one_minus(&self) -> f64 {
        let n2 = self.matrix.nrows();
        (DMatrix::<f64>::identity(n2, n2) - &self.matrix).determinant()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloquetData {
    /// Rotation angles in `(0, 2π)`.
    pub alpha: Vec<f64>,
    /// Column `j` is `(Y_j(0), Ẏ_j(0))`, normalized so `Ȳᵀ Ẏ - Ẏ̄ᵀ Y = i`.
    pub eigvecs: DMatrix<Complex64>,
    /// `β_j = (1 - e^{iα_j})^{-1}`.
    pub beta: Vec<Complex64>,
    /// `min |1 - e^{i m·α}|` over `1 ≤ |m|₁ ≤ RESONANCE_WITNESS_ORDER`.
    pub resonance_witness: f64,
}

/// Largest `|m|₁` scanned for the non-resonance witness.
pub const RESONANCE_WITNESS_ORDER: i32 = 4;

/// Precomputed `K(s)` on an RK4 grid.
struct JacobiField {
    n: usize,
    k: Vec<Vec<PeriodicCoefficient>>,
}

impl JacobiField {
    fn at(&self, s: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.k[i][j].eval(s).re)
    }

    fn rhs(&self, s: f64, state: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let k = self.at(s);
        let mut out = DMatrix::<f64>::zeros(2 * n, state.ncols());
        out.rows_mut(0, n).copy_from(&state.rows(n, n));
        let acc = -(k * state.rows(0, n));
        out.rows_mut(n, n).copy_from(&acc);
        out
    }

    fn step(&self, s: f64, h: f64, state: &DMatrix<f64>) -> DMatrix<f64> {
        let k1 = self.rhs(s, state);
        let k2 = self.rhs(s + 0.5 * h, &(state + &k1 * (0.5 * h)));
        let k3 = self.rhs(s + 0.5 * h, &(state + &k2 * (0.5 * h)));
        let k4 = self.rhs(s + h, &(state + &k3 * h));
        state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    }

    /// Propagates `state` over `[s0, s1]` in `steps` equal steps.
    fn propagate(&self, state: &DMatrix<f64>, s0: f64, s1: f64, steps: usize) -> DMatrix<f64> {
        let h = (s1 - s0) / steps as f64;
        let mut x = state.clone();
        for i in 0..steps {
            x = self.step(s0 + i as f64 * h, h, &x);
        }
        x
    }

    /// States at `s_l = l L / samples`, `l = 0..=samples`, with `steps` total.
    fn sample(&self, initial: &DMatrix<f64>, length: f64, samples: usize, steps: usize) -> Vec<DMatrix<f64>> {
        let per = steps / samples;
        let mut out = Vec::with_capacity(samples + 1);
        let mut x = initial.clone();
        out.push(x.clone());
        for l in 0..samples {
            let s0 = length * l as f64 / samples as f64;
            let s1 = length * (l + 1) as f64 / samples as f64;
            x = self.propagate(&x, s0, s1, per);
            out.push(x.clone());
        }
        out
    }
}

fn field(g: &MetricGerm) -> JacobiField {
    JacobiField {
        n: g.transverse_dim(),
        k: g.jacobi_matrix(),
    }
}

/// Fundamental matrix over one period, with the step count chosen by step
/// doubling.
fn fundamental_over_period(f: &JacobiField, length: f64) -> Result<(DMatrix<f64>, usize)> {
    let n2 = 2 * f.n;
    let id = DMatrix::<f64>::identity(n2, n2);
    let mut steps = MIN_STEPS;
    let mut prev = f.propagate(&id, 0.0, length, steps);
    loop {
        let next_steps = steps * 2;
        if next_steps > MAX_STEPS {
            return Err(Error::IntegrationFailure(format!(
                "step-doubling did not converge within {MAX_STEPS} steps"
            )));
        }
        let next = f.propagate(&id, 0.0, length, next_steps);
        let err = (&next - &prev).abs().max() / 15.0;
        let scale = next.abs().max().max(1.0);
        if err <= STEP_TOL * scale {
            return Ok((next, next_steps));
        }
        prev = next;
        steps = next_steps;
    }
}

/// Time-`L` map of `Ÿ + K(s)Y = 0` composed with the holonomy.
pub fn integrate_monodromy(g: &MetricGerm) -> Result<Monodromy> {
    let f = field(g);
    let (phi, steps) = fundamental_over_period(&f, g.length())?;
    let n = f.n;
    let mut t2 = DMatrix::<f64>::zeros(2 * n, 2 * n);
    t2.view_mut((0, 0), (n, n)).copy_from(g.holonomy());
    t2.view_mut((n, n), (n, n)).copy_from(g.holonomy());
    Ok(Monodromy {
        matrix: t2 * phi,
        steps,
    })
}

fn null_vector(p: &DMatrix<Complex64>, lambda: Complex64) -> DMatrix<Complex64> {
    let n2 = p.nrows();
    let shifted = p - DMatrix::<Complex64>::identity(n2, n2) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    DMatrix::from_fn(n2, 1, |r, _| v_t[(idx, r)].conj())
}

/// `ȳᵀẏ` for a column `(y, ẏ)`.
fn sesquilinear(v: &DMatrix<Complex64>, n: usize) -> Complex64 {
    (0..n).map(|j| v[(j, 0)].conj() * v[(n + j, 0)]).sum()
}

pub fn floquet_decompose(m: &Monodromy, resonance_tol: f64) -> Result<FloquetData> {
    let n2 = m.matrix.nrows();
    let n = n2 / 2;
    let eig = m.matrix.complex_eigenvalues();
    for lam in eig.iter() {
        if (lam.norm() - 1.0).abs() > UNIT_CIRCLE_TOL {
            return Err(Error::NonElliptic { modulus: lam.norm() });
        }
    }
    for lam in eig.iter() {
        let d = (lam - 1.0).norm().min((lam + 1.0).norm());
        if d < resonance_tol.max(UNIT_CIRCLE_TOL) {
            return Err(Error::Degenerate { distance: d });
        }
    }
    let mut upper: Vec<Complex64> = eig.iter().copied().filter(|l| l.im > 0.0).collect();
    if upper.len() != n {
        return Err(Error::NonElliptic {
            modulus: eig.iter().map(|l| l.norm()).fold(0.0, f64::max),
        });
    }
    upper.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).expect("finite eigenvalues"));
    let pc = m.matrix.map(|v| Complex64::new(v, 0.0));
    let mut alpha = Vec::with_capacity(n);
    let mut eigvecs = DMatrix::<Complex64>::zeros(n2, n);
    for (j, lam) in upper.iter().enumerate() {
        let mut v = null_vector(&pc, *lam);
        let mut lambda = *lam;
        let mut omega = sesquilinear(&v, n).im;
        if omega < 0.0 {
            v = v.map(|c| c.conj());
            lambda = lambda.conj();
            omega = -omega;
        }
        if omega <= 1e-14 {
            return Err(Error::NearResonance(format!(
                "eigenvector for eigenvalue {lambda} spans no positive Lagrangian"
            )));
        }
        v /= Complex64::new((2.0 * omega).sqrt(), 0.0);
        // fix the phase: largest position component real and positive
        let (imax, _) = (0..n).fold((0, -1.0), |acc, i| {
            let a = v[(i, 0)].norm();
            if a > acc.1 {
                (i, a)
            } else {
                acc
            }
        });
        let phase = v[(imax, 0)] / v[(imax, 0)].norm();
        v /= phase;
        let mut a = lambda.arg();
        if a <= 0.0 {
            a += TAU;
        }
        alpha.push(a);
        eigvecs.set_column(j, &v.column(0));
    }
    for j in 0..n {
        for k in (j + 1)..n {
            for sign in [1.0, -1.0] {
                let d = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, alpha[j] + sign * alpha[k])).norm();
                if d < resonance_tol {
                    return Err(Error::NearResonance(format!(
                        "α_{} {} α_{} is within {d:.3e} of 2πZ",
                        j + 1,
                        if sign > 0.0 { "+" } else { "-" },
                        k + 1
                    )));
                }
            }
        }
    }
    let beta = alpha
        .iter()
        .map(|&a| Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, a)))
        .collect();
    Ok(FloquetData {
        resonance_witness: resonance_witness(&alpha, RESONANCE_WITNESS_ORDER),
        alpha,
        eigvecs,
        beta,
    })
}

/// `min |1 - e^{i m·α}|` over nonzero integer vectors with `|m|₁ ≤ order`.
pub fn resonance_witness(alpha: &[f64], order: i32) -> f64 {
    let mut best = f64::INFINITY;
    let mut m = vec![0i32; alpha.len()];
    fn rec(j: usize, budget: i32, m: &mut Vec<i32>, alpha: &[f64], best: &mut f64) {
        if j == alpha.len() {
            if m.iter().any(|&v| v != 0) {
                let phase: f64 = m.iter().zip(alpha).map(|(&mi, &a)| mi as f64 * a).sum();
                *best = best.min((Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase)).norm());
            }
            return;
        }
        for v in -budget..=budget {
            m[j] = v;
            rec(j + 1, budget - v.abs(), m, alpha, best);
        }
        m[j] = 0;
    }
    rec(0, order, &mut m, alpha, &mut best);
    best
}

/// Normalized eigenfields sampled on a grid and expanded in twisted Fourier series.
#[derive(Clone, Debug)]
pub struct JacobiFrame {
    pub length: f64,
    pub floquet: FloquetData,
    /// Sample points `s_l = lL/N`, `l = 0..=N`.
    pub grid: Vec<f64>,
    /// `Y(s_l)`: entry `(j, k)` is component `j` of eigenfield `k`.
    pub y: Vec<DMatrix<Complex64>>,
    pub ydot: Vec<DMatrix<Complex64>>,
    /// Twisted Fourier series of `Y_jk`, twist `α_k`.
    pub y_series: Vec<Vec<PeriodicCoefficient>>,
    pub ydot_series: Vec<Vec<PeriodicCoefficient>>,
    /// Continuous lift of `arg det Y` accumulated over one period.
    pub lifted_rotation: f64,
    max_freq: i64,
    jacobi: Vec<Vec<PeriodicCoefficient>>,
}

impl JacobiFrame {
    pub fn dim(&self) -> usize {
        self.floquet.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.floquet.alpha
    }

    /// `max_s ‖ȲᵀẎ - Ẏ̄ᵀY - iI‖` over the grid.
    pub fn wronskian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for (y, yd) in self.y.iter().zip(&self.ydot) {
            let w = y.adjoint() * yd - yd.adjoint() * y;
            let target = DMatrix::<Complex64>::identity(n, n) * Complex64::new(0.0, 1.0);
            worst = worst.max((w - target).map(|c| c.norm()).max());
        }
        worst
    }

    /// `‖Y(L) - Y(0) e^{iα}‖` with trivial holonomy.
    pub fn quasi_periodicity_defect(&self) -> f64 {
        let n = self.dim();
        let last = self.y.len() - 1;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let rho = Complex64::from_polar(1.0, self.floquet.alpha[k]);
            for j in 0..n {
                worst = worst.max((self.y[last][(j, k)] - rho * self.y[0][(j, k)]).norm());
                worst = worst.max((self.ydot[last][(j, k)] - rho * self.ydot[0][(j, k)]).norm());
            }
        }
        worst
    }

    /// `max ‖Ÿ + K Y‖` on the Fourier representation, sampled on the grid.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for &s in &self.grid {
            for k in 0..n {
                for j in 0..n {
                    let mut r = self.y_series[j][k].derivative().derivative().eval(s);
                    for i in 0..n {
                        r += self.jacobi[j][i].eval(s) * self.y_series[i][k].eval(s);
                    }
                    worst = worst.max(r.norm());
                }
            }
        }
        worst
    }

    /// Largest deviation between the sampled fields and their Fourier series.
    pub fn series_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for (l, &s) in self.grid.iter().enumerate() {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.y_series[j][k].eval(s) - self.y[l][(j, k)]).norm());
                    worst = worst.max((self.ydot_series[j][k].eval(s) - self.ydot[l][(j, k)]).norm());
                }
            }
        }
        worst
    }

    /// The weighted Wronskian matrix `𝒜_L(s)` acting as `(x, ξ) = 𝒜_L (x', ξ')`.
    pub fn wronskian_matrix(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim();
        let l = self.length;
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let y = self.y_series[j][k].eval(s);
                let yd = self.ydot_series[j][k].eval(s);
                let w = std::f64::consts::SQRT_2;
                m[(j, k)] = w * l.powf(-0.5) * y.re;
                m[(j, n + k)] = w * l.powf(-0.5) * y.im;
                m[(n + j, k)] = w * l.sqrt() * yd.re;
                m[(n + j, n + k)] = w * l.sqrt() * yd.im;
            }
        }
        m
    }

    /// `z_old = A z + B z̄` with `A = (L^{-1/2}Ȳ + iL^{1/2}Ẏ̄)/√2`,
    /// `B = (L^{-1/2}Y + iL^{1/2}Ẏ)/√2`.
    pub fn substitution_map(&self) -> ComplexLinearMap {
        let n = self.dim();
        let l = self.length;
        let i = Complex64::new(0.0, 1.0);
        let wy = Complex64::new(l.powf(-0.5) * FRAC_1_SQRT_2, 0.0);
        let wd = i * l.sqrt() * FRAC_1_SQRT_2;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            let mut ra = Vec::with_capacity(n);
            let mut rb = Vec::with_capacity(n);
            for k in 0..n {
                let y = &self.y_series[j][k];
                let yd = &self.ydot_series[j][k];
                ra.push(y.conj().scale(wy).add(&yd.conj().scale(wd)));
                rb.push(y.scale(wy).add(&yd.scale(wd)));
            }
            a.push(ra);
            b.push(rb);
        }
        ComplexLinearMap {
            dim: n,
            period: l,
            max_freq: self.max_freq,
            alpha: self.floquet.alpha.clone(),
            a,
            b,
        }
    }

    /// Largest symplectic defect of `𝒜_L` on the grid.
    pub fn wronskian_matrix_defect(&self) -> f64 {
        self.grid
            .iter()
            .map(|&s| crate::symbol::symplectic_defect(&self.wronskian_matrix(s)))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let samples: Vec<_> = self
            .grid
            .iter()
            .enumerate()
            .map(|(l, s)| {
                let y: Vec<Vec<[f64; 2]>> = (0..n)
                    .map(|j| (0..n).map(|k| [self.y[l][(j, k)].re, self.y[l][(j, k)].im]).collect())
                    .collect();
                let yd: Vec<Vec<[f64; 2]>> = (0..n)
                    .map(|j| (0..n).map(|k| [self.ydot[l][(j, k)].re, self.ydot[l][(j, k)].im]).collect())
                    .collect();
                serde_json::json!({ "s": s, "Y": y, "Ydot": yd })
            })
            .collect();
        serde_json::json!({
            "L": self.length,
            "alpha": self.floquet.alpha,
            "lifted_rotation": self.lifted_rotation,
            "samples": samples,
        })
    }
}

/// Number of grid samples used for the Fourier expansion of the frame.
pub fn frame_samples(max_freq: i64) -> usize {
    (4 * max_freq as usize).max(16)
}

pub fn build_frame(g: &MetricGerm, f: &FloquetData) -> Result<JacobiFrame> {
    if !g.has_trivial_holonomy() {
        return Err(Error::UnsupportedHolonomy);
    }
    let n = g.transverse_dim();
    if f.alpha.len() != n {
        return Err(Error::DimensionMismatch {
            left: f.alpha.len(),
            right: n,
        });
    }
    let jf = field(g);
    let length = g.length();
    let max_freq = g.max_freq();
    let samples = frame_samples(max_freq);
    let (_, conv_steps) = fundamental_over_period(&jf, length)?;
    let steps = conv_steps.max(samples).div_ceil(samples) * samples;
    let id = DMatrix::<f64>::identity(2 * n, 2 * n);
    let phis = jf.sample(&id, length, samples, steps);
    let v = &f.eigvecs;
    let mut grid = Vec::with_capacity(samples + 1);
    let mut y = Vec::with_capacity(samples + 1);
    let mut ydot = Vec::with_capacity(samples + 1);
    for (l, phi) in phis.iter().enumerate() {
        grid.push(length * l as f64 / samples as f64);
        let pc = phi.map(|x| Complex64::new(x, 0.0));
        let state = pc * v;
        y.push(state.rows(0, n).into_owned());
        ydot.push(state.rows(n, n).into_owned());
    }
    let series = |data: &[DMatrix<Complex64>], j: usize, k: usize| {
        let vals: Vec<Complex64> = data[..samples].iter().map(|m| m[(j, k)]).collect();
        PeriodicCoefficient::from_samples(length, f.alpha[k], max_freq, &vals)
    };
    let y_series = (0..n).map(|j| (0..n).map(|k| series(&y, j, k)).collect()).collect();
    let ydot_series = (0..n).map(|j| (0..n).map(|k| series(&ydot, j, k)).collect()).collect();
    let mut lifted = 0.0;
    let mut prev = y[0].determinant();
    for m in &y[1..] {
        let d = m.determinant();
        let mut step = (d / prev).arg();
        if step.abs() > PI {
            step -= TAU * step.signum();
        }
        lifted += step;
        prev = d;
    }
    let frame = JacobiFrame {
        length,
        floquet: f.clone(),
        grid,
        y,
        ydot,
        y_series,
        ydot_series,
        lifted_rotation: lifted,
        max_freq,
        jacobi: g.jacobi_matrix(),
    };
    let wd = frame.wronskian_defect();
    if wd > 1e-8 {
        return Err(Error::InvariantViolation(format!("Wronskian drift {wd:.3e}")));
    }
    Ok(frame)
}

/// Monodromy, Floquet data and frame in one call.
pub fn frame_from_germ(g: &MetricGerm, resonance_tol: f64) -> Result<JacobiFrame> {
    let m = integrate_monodromy(g)?;
    let f = floquet_decompose(&m, resonance_tol)?;
    build_frame(g, &f)
}

/// Relative threshold on singular values counted as conjugate-point zeros.
const CONJUGATE_TOL: f64 = 1e-7;

/// Conjugate points of `s = 0` in `(0, L]`, counted with multiplicity.
pub fn morse_index(g: &MetricGerm) -> Result<usize> {
    let jf = field(g);
    let n = jf.n;
    let length = g.length();
    let (_, conv_steps) = fundamental_over_period(&jf, length)?;
    let samples = 4096usize;
    let steps = conv_steps.max(samples).div_ceil(samples) * samples;
    let mut init = DMatrix::<f64>::zeros(2 * n, n);
    init.view_mut((n, 0), (n, n)).fill_with_identity();
    let states = jf.sample(&init, length, samples, steps);
    let per = steps / samples;
    let h = length / samples as f64;
    let sv = |x: &DMatrix<f64>| x.rows(0, n).into_owned().singular_values();
    let sigma_min = |x: &DMatrix<f64>| sv(x).min();
    let mins: Vec<f64> = states.iter().map(sigma_min).collect();
    let scale = states
        .iter()
        .map(|x| x.rows(0, n).abs().max())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut count = 0usize;
    for l in 1..=samples {
        let left = mins[l - 1];
        let here = mins[l];
        let right = if l < samples { mins[l + 1] } else { f64::INFINITY };
        if !(here <= left && here <= right) {
            continue;
        }
        // golden-section refinement of σ_min on [s_{l-1}, min(s_{l+1}, L)]
        let a0 = (l - 1) as f64 * h;
        let b0 = ((l + 1).min(samples)) as f64 * h;
        let base = &states[l - 1];
        let eval = |s: f64| {
            let sub = ((s - a0) / h * per as f64).ceil().max(1.0) as usize;
            jf.propagate(base, a0, s, sub)
        };
        let (mut a, mut b) = (a0, b0);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - gr * (b - a);
        let mut d = a + gr * (b - a);
        let mut fc = sigma_min(&eval(c));
        let mut fd = sigma_min(&eval(d));
        for _ in 0..80 {
            if (b - a) < 1e-13 * length {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = sigma_min(&eval(c));
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = sigma_min(&eval(d));
            }
        }
        let s_star = 0.5 * (a + b);
        let at = eval(s_star);
        let values = sv(&at);
        let mult = values.iter().filter(|&&v| v < CONJUGATE_TOL * scale).count();
        if mult == 0 {
            continue;
        }
        if s_star < 1e-9 * length {
            continue;
        }
        if (length - s_star).abs() < 1e-6 * length {
            return Err(Error::IllPosed(format!(
                "conjugate point at s = {s_star} within tolerance of s = L"
            )));
        }
        count += mult;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_block_floquet() {
        let (c, s) = (1f64.cos(), 1f64.sin());
        let m = Monodromy {
            matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            steps: 0,
        };
        let f = floquet_decompose(&m, 1e-6).unwrap();
        assert!((f.alpha[0] - 1.0).abs() < 1e-12);
        let v = f.eigvecs.column(0);
        assert!((v[1] / v[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }
}
