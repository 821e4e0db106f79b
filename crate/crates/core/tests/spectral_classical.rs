// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use qbnf::classical::{default_fan, flow_sample, small_divisor_solve, twist_from_flow};
use qbnf::germ::{germ_from_curvature_2d, germ_from_profile, Profile};
use qbnf::pipeline::{dynamics_comparison, spectral_comparison};
use qbnf::spectral::{rev_surface_eigenvalues, Mesh};
use qbnf::Error;

fn profile_germ(p: &Profile) -> qbnf::germ::MetricGerm {
    let c = germ_from_profile(p, 0.0, 8).unwrap();
    germ_from_curvature_2d(&c, 4, 8).unwrap()
}

#[test]
fn round_sphere_ladders_are_exact() {
    // λ² = l(l + 1) with l = k + q
    let ladders = rev_surface_eigenvalues(&Profile::sphere(), &[80, 120], 2, Mesh::default(), 1e-3).unwrap();
    for ladder in &ladders {
        for (q, &lam) in ladder.lambdas.iter().enumerate() {
            let l = (ladder.k + q as i64) as f64;
            let exact = (l * (l + 1.0)).sqrt();
            assert!((lam - exact).abs() < 1e-4, "k {} q {q}: {lam} vs {exact}", ladder.k);
            assert!(ladder.error_bounds[q] < 1e-3);
        }
    }
}

#[test]
fn ladder_fits_match_engine_within_five_percent() {
    for profile in [Profile::paraboloid(), Profile::quartic()] {
        let (_, checks) = spectral_comparison(&profile, 8, 1e-6).unwrap();
        assert_eq!(checks.len(), 2);
        for c in &checks {
            assert!(c.passed, "{profile:?}: {} = {} ({:?})", c.name, c.value, c.detail);
        }
    }
}

#[test]
fn twist_triangle_on_paraboloid() {
    let (body, checks) = dynamics_comparison(&profile_germ(&Profile::paraboloid()), 1e-6).unwrap();
    for c in &checks {
        assert!(c.passed, "{} = {:e}", c.name, c.value);
    }
    let tq = body["quantum_twist"].as_f64().unwrap();
    assert!((tq - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn flow_period_tends_to_harmonic_period() {
    let g = profile_germ(&Profile::quartic());
    let smp = flow_sample(&g, 1e-4, 4000).unwrap();
    // τ = 2 on the quartic equator
    let harmonic = std::f64::consts::TAU / 2f64.sqrt();
    assert!(common::relative(smp.period, harmonic) < 1e-6, "{}", smp.period);
    assert!(smp.action > 0.0);
}

#[test]
fn flow_oracle_rejects_arclength_dependent_germs() {
    for (_, g, _) in common::random_germs(61, 4) {
        let err = flow_sample(&g, 0.01, 1000).unwrap_err();
        assert!(matches!(err, Error::IllPosed(_)), "{err}");
    }
}

#[test]
fn flow_fit_needs_four_momenta() {
    let g = profile_germ(&Profile::paraboloid());
    let err = twist_from_flow(&g, &default_fan()[..3]).unwrap_err();
    assert!(matches!(err, Error::FitFailure(_)));
}

#[test]
fn small_divisor_solution_and_near_resonance() {
    let modes: BTreeMap<i64, Complex64> = (-3..=3)
        .map(|m| (m, Complex64::new(0.1 * m as f64 + 0.3, -0.2 * m as f64)))
        .collect();
    let omega = 0.7;
    let out = small_divisor_solve(&modes, omega, 1e-9).unwrap();
    for (m, a) in &modes {
        let back = out[m] * Complex64::new(omega, *m as f64);
        assert!((back - a).norm() < 1e-15);
    }
    let err = small_divisor_solve(&modes, 1e-12, 1e-9).unwrap_err();
    assert!(matches!(err, Error::NearResonance(_)));
}
