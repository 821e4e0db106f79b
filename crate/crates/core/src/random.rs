// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded random germs for property suites.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::germ::{germ_from_curvature_2d, CurvatureData2D, MetricGerm};
use crate::jacobi::{frame_from_germ, JacobiFrame};
use crate::symbol::PeriodicCoefficient;

/// Shape of the random curvature data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomGermSpec {
    pub length: f64,
    /// Highest Fourier mode of each random coefficient.
    pub modes: i64,
    pub max_freq: i64,
    /// Range of the mean Gauss curvature.
    pub tau_range: (f64, f64),
    /// Size of the fluctuating part of `τ`, relative to its mean.
    pub fluctuation: f64,
    /// Size of each higher normal derivative.
    pub jet_scale: f64,
    pub max_jet_order: u32,
}

impl Default for RandomGermSpec {
    fn default() -> Self {
        Self {
            length: std::f64::consts::TAU,
            modes: 3,
            max_freq: 24,
            tau_range: (0.2, 2.5),
            fluctuation: 0.25,
            jet_scale: 0.5,
            max_jet_order: 4,
        }
    }
}

/// A real band-limited coefficient `Σ_{|k| ≤ modes} c_k e^{2πiks/L}`.
pub fn random_real_coefficient(
    rng: &mut ChaCha8Rng,
    length: f64,
    modes: i64,
    max_freq: i64,
    mean: f64,
    amplitude: f64,
) -> PeriodicCoefficient {
    let mut entries = vec![(0, Complex64::new(mean, 0.0))];
    for k in 1..=modes {
        let decay = amplitude / (k * k) as f64;
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (0.5 * decay);
        entries.push((k, c));
        entries.push((-k, c.conj()));
    }
    PeriodicCoefficient::from_modes(length, 0.0, max_freq, entries)
}

/// Random surface curvature data; the germ and its frame may still fail
/// ellipticity, which [`random_elliptic_germ_2d`] filters out.
pub fn random_curvature_2d(rng: &mut ChaCha8Rng, spec: &RandomGermSpec) -> CurvatureData2D {
    let tau0 = rng.gen_range(spec.tau_range.0..spec.tau_range.1);
    let coeff = |rng: &mut ChaCha8Rng, mean: f64, amp: f64| {
        random_real_coefficient(rng, spec.length, spec.modes, spec.max_freq, mean, amp)
    };
    let tau = coeff(rng, tau0, spec.fluctuation * tau0);
    let draw = |rng: &mut ChaCha8Rng| {
        let m = rng.gen_range(-spec.jet_scale..spec.jet_scale);
        coeff(rng, m, spec.jet_scale)
    };
    let tau_nu = draw(rng);
    let tau_nunu = draw(rng);
    let higher = (5..=spec.max_jet_order.max(4)).map(|_| draw(rng)).collect();
    CurvatureData2D {
        length: spec.length,
        tau,
        tau_nu,
        tau_nunu,
        higher,
    }
}

/// Draws until the germ is elliptic, non-degenerate and non-resonant.
pub fn random_elliptic_germ_2d(
    rng: &mut ChaCha8Rng,
    spec: &RandomGermSpec,
    resonance_tol: f64,
) -> (CurvatureData2D, MetricGerm, JacobiFrame) {
    loop {
        let c = random_curvature_2d(rng, spec);
        let Ok(g) = germ_from_curvature_2d(&c, spec.max_jet_order, spec.max_freq) else {
            continue;
        };
        if let Ok(fr) = frame_from_germ(&g, resonance_tol) {
            let a = fr.alpha()[0];
            // keep well clear of the low-order resonances
            let clear = (1..=4).all(|k| {
                let phase = (k as f64 * a).rem_euclid(std::f64::consts::TAU);
                phase.min(std::f64::consts::TAU - phase) > 0.05
            });
            if clear {
                return (c, g, fr);
            }
        }
    }
}

/// A random symmetric band-limited `K(s)` of size `n`.
pub fn random_jacobi_matrix(
    rng: &mut ChaCha8Rng,
    n: usize,
    length: f64,
    modes: i64,
    max_freq: i64,
) -> Vec<Vec<PeriodicCoefficient>> {
    let mut k = vec![vec![PeriodicCoefficient::zero(length, 0.0, max_freq); n]; n];
    for i in 0..n {
        for j in i..n {
            let mean = if i == j { rng.gen_range(0.2..2.0) } else { rng.gen_range(-0.2..0.2) };
            let c = random_real_coefficient(rng, length, modes, max_freq, mean, 0.3);
            k[i][j] = c.clone();
            k[j][i] = c;
        }
    }
    k
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
