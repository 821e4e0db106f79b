// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use std::f64::consts::{PI, TAU};

use common::damped_trace;
use num_complex::Complex64;
use proptest::prelude::*;
use qbnf::germ::{germ_from_curvature_2d, CurvatureData2D};
use qbnf::normal_form::{qbnf_assemble, spectral_function, SpectralPolynomial};
use qbnf::pipeline::compute_germ;
use qbnf::wave::{
    beta, beta_form_check, derivative_polynomial, hermite_trace, principal_invariant,
    trace_distribution, wave_invariant, BetaBasis,
};

fn cubic(coeffs: &[f64]) -> SpectralPolynomial {
    let t = SpectralPolynomial::linear(&[1.0]);
    let mut out = SpectralPolynomial::zero(1);
    let mut power = SpectralPolynomial::constant(1, Complex64::new(1.0, 0.0));
    for &c in coeffs {
        out = out.add(&power.scale(Complex64::new(c, 0.0)));
        power = power.mul(&t);
    }
    out
}

#[test]
fn trace_at_half_turn() {
    assert!((trace_distribution(PI).unwrap().value - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    let linear = cubic(&[0.0, 1.0]);
    assert!(hermite_trace(&linear, &[PI]).unwrap().norm() < 1e-14);
}

#[test]
fn trace_matches_closed_sine_form() {
    for alpha in [0.3, 1.1, 2.9, 4.4, 6.0] {
        let t = trace_distribution(alpha).unwrap().value;
        let closed = Complex64::new(0.0, -2.0 * (alpha / 2.0).sin()).inv();
        assert!((t - closed).norm() < 1e-13);
    }
    assert!(trace_distribution(TAU).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_matches_damped_series(c in prop::collection::vec(-1.0f64..1.0, 4), alpha in 0.8f64..5.5) {
        let f = cubic(&c);
        let closed = hermite_trace(&f, &[alpha]).unwrap();
        let series = damped_trace(|t| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t, alpha, 0.02, 12);
        prop_assert!((closed - series).norm() <= 1e-6 * closed.norm().max(1.0), "{closed} vs {series}");
    }

    #[test]
    fn trace_is_conjugate_symmetric(c in prop::collection::vec(-1.0f64..1.0, 4), alpha in 0.4f64..5.9) {
        let f = cubic(&c);
        let plus = hermite_trace(&f, &[alpha]).unwrap();
        let minus = hermite_trace(&f, &[-alpha]).unwrap();
        prop_assert!((plus - minus.conj()).norm() <= 1e-10 * plus.norm().max(1.0));
    }
}

#[test]
fn two_oscillator_trace_factorizes() {
    let f = SpectralPolynomial::linear(&[1.0, 0.0]).mul(&SpectralPolynomial::linear(&[0.0, 1.0]));
    let (a1, a2) = (0.9, 2.3);
    let lhs = hermite_trace(&f, &[a1, a2]).unwrap();
    let one = hermite_trace(&cubic(&[0.0, 1.0]), &[a1]).unwrap();
    let two = hermite_trace(&cubic(&[0.0, 1.0]), &[a2]).unwrap();
    assert!((lhs - one * two).norm() < 1e-12);
}

#[test]
fn leading_invariant_is_scaled_trace_of_f0() {
    for (_, g, fr) in common::random_germs(41, 3) {
        let c = compute_germ(&g, 0, 1e-6).unwrap();
        let w = wave_invariant(&c.qbnf, 0, &fr, c.sigma).unwrap();
        let f0 = spectral_function(&c.scnf.f[0]).unwrap();
        let expected = hermite_trace(&f0, fr.alpha()).unwrap() * (g.length().powi(2) / 2.0);
        assert!((w.a - expected).norm() <= 1e-12 * expected.norm().max(1.0));
        assert!((w.factored - w.a * g.length() / w.principal).norm() < 1e-12);
    }
}

#[test]
fn zero_ladder_has_zero_invariants() {
    let c = CurvatureData2D::constant(TAU, 8, 0.3, 0.0, 0.0);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let mut s = compute_germ(&g, 0, 1e-6).unwrap().scnf;
    s.f = s.f.iter().map(|f| f.sub(f)).collect();
    let q = qbnf_assemble(&s).unwrap();
    assert!(derivative_polynomial(&q, 0).unwrap().is_zero());
}

#[test]
fn wave_invariant_is_scale_free() {
    for (c, g, _) in common::random_germs(43, 2) {
        let base = compute_germ(&g, 0, 1e-6).unwrap();
        let a0 = wave_invariant(&base.qbnf, 0, &base.frame, base.sigma).unwrap().a;
        for eps in [1.0 / 3.0, 2.0, 5.0] {
            let scaled = germ_from_curvature_2d(&c.rescale(eps), 4, g.max_freq()).unwrap();
            let r = compute_germ(&scaled, 0, 1e-6).unwrap();
            let a = wave_invariant(&r.qbnf, 0, &r.frame, r.sigma).unwrap().a;
            assert!((a - a0).norm() <= 1e-7 * a0.norm());
        }
    }
}

#[test]
fn first_order_invariant_scales_inversely() {
    for (c, g, _) in common::random_germs_with_jets(47, 2, 6) {
        let base = compute_germ(&g, 1, 1e-6).unwrap();
        let a1 = wave_invariant(&base.qbnf, 1, &base.frame, base.sigma).unwrap().a;
        let eps = 2.0;
        let scaled = germ_from_curvature_2d(&c.rescale(eps), 6, g.max_freq()).unwrap();
        let r = compute_germ(&scaled, 1, 1e-6).unwrap();
        let a = wave_invariant(&r.qbnf, 1, &r.frame, r.sigma).unwrap().a;
        assert!((a - a1 / eps).norm() <= 1e-7 * a1.norm());
    }
}

#[test]
fn iterated_orbit_invariant_from_base_ladder() {
    // f₀ is unchanged on γ^m while L → mL and α → mα
    let mut tested = 0;
    for (_, g, fr) in common::random_germs(53, 6) {
        let a = fr.alpha()[0];
        let clear = (1..=12).all(|j| {
            let p = (j as f64 * a).rem_euclid(TAU);
            p.min(TAU - p) > 0.05
        });
        if !clear {
            continue;
        }
        let base = compute_germ(&g, 0, 1e-6).unwrap();
        for m in [2u32, 3] {
            let it = compute_germ(&g.iterate(m), 0, 1e-6).unwrap();
            let direct = wave_invariant(&it.qbnf, 0, &it.frame, it.sigma).unwrap().a;
            let length = m as f64 * g.length();
            let f0 = spectral_function(&base.scnf.f[0]).unwrap();
            let predicted = hermite_trace(&f0, &[(m as f64 * a).rem_euclid(TAU)]).unwrap() * (length * length / 2.0);
            assert!((direct - predicted).norm() <= 1e-7 * direct.norm(), "m {m}");
        }
        tested += 1;
    }
    assert!(tested >= 2);
}

#[test]
fn principal_invariant_modulus() {
    let c = principal_invariant(2.0, &[1.2], 3);
    assert!((c.norm() - 2.0 / (2.0 * (0.6f64).sin())).abs() < 1e-14);
    assert!((c / c.norm() - Complex64::new(0.0, -1.0)).norm() < 1e-14);
}

#[test]
fn derived_beta_basis_fits_exactly() {
    let alphas: Vec<f64> = (0..12).map(|i| 0.3 + 0.47 * i as f64).collect();
    for (_, g, _) in common::random_germs(59, 2) {
        let c = compute_germ(&g, 0, 1e-6).unwrap();
        let fit = beta_form_check(&c.qbnf, &alphas, BetaBasis::Derived).unwrap();
        assert!(fit.residual <= 1e-8);
        assert!(fit.coefficient_error() <= 1e-6);
    }
}

#[test]
fn constant_symbol_has_no_quartic_beta_term() {
    let c = CurvatureData2D::constant(TAU, 8, 0.3, 0.0, 0.0);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let comp = compute_germ(&g, 0, 1e-6).unwrap();
    let alphas: Vec<f64> = (0..12).map(|i| 0.3 + 0.47 * i as f64).collect();
    for basis in [BetaBasis::Stated, BetaBasis::Derived] {
        let fit = beta_form_check(&comp.qbnf, &alphas, basis).unwrap();
        assert!(fit.b4.abs() < 1e-10);
        assert!(fit.residual < 1e-10);
    }
    assert!((beta(PI) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
}
