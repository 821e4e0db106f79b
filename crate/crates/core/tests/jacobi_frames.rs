// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qbnf::germ::{germ_from_curvature_2d, CurvatureData2D, MetricGerm};
use qbnf::jacobi::{frame_from_germ, integrate_monodromy, morse_index};
use qbnf::random::{random_jacobi_matrix, rng_from_seed};
use qbnf::symbol::PeriodicCoefficient;
use qbnf::Error;

fn constant_germ(taus: &[f64], length: f64) -> MetricGerm {
    let n = taus.len();
    let mut k = vec![vec![PeriodicCoefficient::zero(length, 0.0, 8); n]; n];
    for (i, &t) in taus.iter().enumerate() {
        k[i][i] = PeriodicCoefficient::real_constant(length, 8, t);
    }
    MetricGerm::from_jacobi_matrix(length, &k, 2, 8)
}

#[test]
fn constant_curvature_monodromy_is_a_rotation() {
    for (taus, length) in [(vec![0.7], TAU), (vec![2.3], 1.7), (vec![0.4, 1.9], TAU)] {
        let m = integrate_monodromy(&constant_germ(&taus, length)).unwrap().matrix;
        let n = taus.len();
        for (i, &t) in taus.iter().enumerate() {
            let w = t.sqrt();
            let (c, s) = ((w * length).cos(), (w * length).sin());
            assert!((m[(i, i)] - c).abs() < 1e-10);
            assert!((m[(i, n + i)] - s / w).abs() < 1e-10);
            assert!((m[(n + i, i)] + w * s).abs() < 1e-10);
            assert!((m[(n + i, n + i)] - c).abs() < 1e-10);
        }
    }
}

#[test]
fn constant_curvature_rotation_angle() {
    let tau: f64 = 0.7;
    let fr = frame_from_germ(&constant_germ(&[tau], TAU), 1e-6).unwrap();
    let expected = (tau.sqrt() * TAU).rem_euclid(TAU);
    assert!((fr.alpha()[0] - expected).abs() < 1e-10);
    assert!((fr.lifted_rotation - tau.sqrt() * TAU).abs() < 1e-8);
}

#[test]
fn morse_index_counts_conjugate_points() {
    // zeros of sin(√2 s) in (0, 2π]
    assert_eq!(morse_index(&constant_germ(&[2.0], TAU)).unwrap(), 2);
    assert_eq!(morse_index(&constant_germ(&[0.7], TAU)).unwrap(), 1);
    assert_eq!(morse_index(&constant_germ(&[2.0, 0.7], TAU)).unwrap(), 3);
}

#[test]
fn hyperbolic_orbit_is_rejected() {
    let err = frame_from_germ(&constant_germ(&[-0.5], TAU), 1e-6).unwrap_err();
    assert!(matches!(err, Error::NonElliptic { .. } | Error::NotElliptic(_)), "{err}");
}

#[test]
fn resonant_rotation_is_rejected() {
    // α = π: e^{iα} = -1
    let err = frame_from_germ(&constant_germ(&[0.25], TAU), 1e-6).unwrap_err();
    assert!(
        matches!(err, Error::Degenerate { .. } | Error::Resonance { .. } | Error::NearResonance(_)),
        "{err}"
    );
}

#[test]
fn curvature_germ_carries_tau_as_quadratic_jet() {
    let c = CurvatureData2D::constant(PI, 8, 1.3, 0.2, -0.1);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let goo = g.inverse_metric(0, 0);
    assert!((goo.coefficient(&[0]).mode(0).re - 1.0).abs() < 1e-14);
    assert!((goo.coefficient(&[2]).mode(0).re - 1.3).abs() < 1e-14);
    assert!((goo.coefficient(&[3]).mode(0).re - 0.2 / 3.0).abs() < 1e-14);
    assert!(g.validate().passed);
}

#[test]
fn germ_json_round_trip() {
    let c = CurvatureData2D::constant(PI, 8, 1.3, 0.2, -0.1);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let text = serde_json::to_string(&g.to_json()).unwrap();
    let back = MetricGerm::from_json_str(&text, 8).unwrap();
    let d = back.inverse_metric(0, 0).distance(g.inverse_metric(0, 0));
    assert!(d < 1e-15);
}

#[test]
fn missing_jets_are_reported() {
    let c = CurvatureData2D::constant(PI, 8, 1.3, 0.2, -0.1);
    let err = germ_from_curvature_2d(&c, 6, 8).unwrap_err();
    assert!(matches!(err, Error::InsufficientJets { needed: 6, available: 4 }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monodromy_is_symplectic(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = rng_from_seed(seed);
        let k = random_jacobi_matrix(&mut rng, n, TAU, 3, 16);
        let g = MetricGerm::from_jacobi_matrix(TAU, &k, 2, 16);
        let m = integrate_monodromy(&g).unwrap();
        prop_assert!(m.symplectic_defect() <= 1e-9);
    }

    #[test]
    fn elliptic_frames_keep_their_wronskian(seed in any::<u64>()) {
        let (_, g, fr) = common::random_germs(seed, 1).remove(0);
        prop_assert!(fr.wronskian_defect() <= 1e-9);
        prop_assert!(fr.quasi_periodicity_defect() <= 1e-8);
        prop_assert!(g.validate().passed);
        prop_assert!(fr.alpha()[0] > 0.0 && fr.alpha()[0] < TAU);
    }
}
