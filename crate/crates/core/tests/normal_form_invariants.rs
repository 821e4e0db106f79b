// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use qbnf::classical::{action_hessian, classical_scnf};
use qbnf::direct::f0_direct_dim2;
use qbnf::germ::{germ_from_curvature_2d, CurvatureData2D};
use qbnf::jacobi::frame_from_germ;
use qbnf::laplacian::{build_scaled_terms, conjugate_to_model, frame_transport_defect};
use qbnf::normal_form::{
    action_degree, max_imaginary, normal_form_defect, qbnf_assemble, scnf_iterate, spectral_function,
};
use qbnf::pipeline::compute_germ;
use qbnf::symbol::{Monomial, PeriodicCoefficient};
use qbnf::Error;

fn quadratic(f: &qbnf::symbol::WeylPolynomial) -> Complex64 {
    f.constant_coefficient(&Monomial::new(vec![1], vec![1]))
}

fn max_coefficient_gap(a: &[(Monomial, Complex64)], b: &[(Monomial, Complex64)], scale_b: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (mono, ca) in a {
        let cb = b.iter().find(|(m, _)| m == mono).map(|(_, c)| *c).unwrap_or_default();
        worst = worst.max((ca - cb * scale_b).norm());
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn quadratic_action_term_vanishes(seed in any::<u64>()) {
        let (_, g, _) = common::random_germs(seed, 1).remove(0);
        let c = compute_germ(&g, 0, 1e-6).unwrap();
        prop_assert!(quadratic(&c.scnf.f[0]).norm() <= 1e-8);
    }

    #[test]
    fn normal_forms_are_real_and_diagonal(seed in any::<u64>()) {
        let (_, g, _) = common::random_germs_with_jets(seed, 1, 6).remove(0);
        let c = compute_germ(&g, 1, 1e-6).unwrap();
        for f in &c.scnf.f {
            prop_assert!(max_imaginary(f) <= 1e-9);
            prop_assert!(normal_form_defect(f) <= 1e-9);
        }
        for p in c.qbnf.p_tilde.iter() {
            prop_assert!(max_imaginary(p) <= 1e-9);
        }
    }

    #[test]
    fn direct_and_iterative_paths_agree(seed in any::<u64>()) {
        let (_, g, fr) = common::random_germs(seed, 1).remove(0);
        let c = compute_germ(&g, 0, 1e-6).unwrap();
        let direct = f0_direct_dim2(&g, &fr).unwrap();
        prop_assert!(c.scnf.f[0].distance(&direct) <= 1e-8);
    }
}

#[test]
fn degree_bounds_hold_through_second_order() {
    for (_, g, _) in common::random_germs_with_jets(5, 3, 8) {
        let c = compute_germ(&g, 2, 1e-6).unwrap();
        for (k, f) in c.scnf.f.iter().enumerate() {
            assert!(action_degree(f) <= k as u32 + 2, "deg f_{k} = {}", action_degree(f));
        }
        for (k, p) in c.qbnf.p.iter().enumerate() {
            assert!(action_degree(p) <= k as u32 + 2);
        }
    }
}

#[test]
fn odd_steps_leave_no_diagonal_part() {
    let (_, g, _) = common::random_germs_with_jets(9, 1, 6).remove(0);
    let c = compute_germ(&g, 1, 1e-6).unwrap();
    for step in c.scnf.ladder_trace.iter().filter(|s| !s.even) {
        assert!(step.post_residual <= 1e-9, "step {} residual {:e}", step.step, step.post_residual);
    }
}

#[test]
fn conjugation_straightens_the_quadratic_term() {
    for (_, g, fr) in common::random_germs(21, 3) {
        let ladder = build_scaled_terms(&g, 4).unwrap();
        assert!(frame_transport_defect(&ladder, &fr).unwrap() <= 1e-10);
        assert!(ladder.parity_defect() <= 1e-12);
        let model = conjugate_to_model(&ladder, &fr).unwrap();
        // after conjugation the m = 2 term is (2/L) D_s with no transverse part
        let m2 = model.term(2);
        assert!(m2.part(0).max_abs() <= 1e-10);
        let ds = m2.part(1).constant_coefficient(&Monomial::one(1));
        assert!((ds - Complex64::new(2.0 / g.length(), 0.0)).norm() <= 1e-12);
    }
}

#[test]
fn metric_scaling_covariance() {
    for (c, g, _) in common::random_germs(3, 3) {
        let base = compute_germ(&g, 0, 1e-6).unwrap();
        for eps in [1.0 / 3.0, 2.0, 5.0] {
            let scaled = germ_from_curvature_2d(&c.rescale(eps), 4, g.max_freq()).unwrap();
            let r = compute_germ(&scaled, 0, 1e-6).unwrap();
            let w = eps.powi(-2);
            let scale = base.scnf.f[0].max_abs() * w;
            let gap = max_coefficient_gap(&r.scnf.c(0), &base.scnf.c(0), w);
            assert!(gap <= 1e-8 * scale, "eps {eps}: gap {gap:e}");
            // p̃₁ carries weight -1
            let gap = max_coefficient_gap(&r.qbnf.b(0), &base.qbnf.b(0), 1.0 / eps);
            assert!(gap <= 1e-8 * base.qbnf.p_tilde[0].max_abs() / eps);
            // the germ-level rescale agrees with the curvature-level one
            let direct = compute_germ(&g.rescale(eps), 0, 1e-6).unwrap();
            assert!(direct.scnf.f[0].distance(&r.scnf.f[0]) <= 1e-9 * scale);
        }
    }
}

#[test]
fn f0_ignores_fifth_order_jets() {
    for (c, _, _) in common::random_germs_with_jets(13, 3, 6) {
        let mut bumped = c.clone();
        bumped.higher[0] = bumped.higher[0].add(&PeriodicCoefficient::real_constant(c.length, 24, 0.7));
        let g0 = germ_from_curvature_2d(&c, 6, 24).unwrap();
        let g1 = germ_from_curvature_2d(&bumped, 6, 24).unwrap();
        let a = compute_germ(&g0, 0, 1e-6).unwrap();
        let b = compute_germ(&g1, 0, 1e-6).unwrap();
        assert!(a.scnf.f[0].distance(&b.scnf.f[0]) <= 1e-10);
        // the same bump does reach f₁
        let a1 = compute_germ(&g0, 1, 1e-6).unwrap();
        let b1 = compute_germ(&g1, 1, 1e-6).unwrap();
        assert!(a1.scnf.f[1].distance(&b1.scnf.f[1]) > 1e-6);
    }
}

#[test]
fn f1_ignores_seventh_order_jets() {
    for (c, _, _) in common::random_germs_with_jets(17, 2, 8) {
        let mut bumped = c.clone();
        bumped.higher[2] = bumped.higher[2].add(&PeriodicCoefficient::real_constant(c.length, 24, 0.7));
        let a = compute_germ(&germ_from_curvature_2d(&c, 8, 24).unwrap(), 1, 1e-6).unwrap();
        let b = compute_germ(&germ_from_curvature_2d(&bumped, 8, 24).unwrap(), 1, 1e-6).unwrap();
        assert!(a.scnf.f[1].distance(&b.scnf.f[1]) <= 1e-10);
    }
}

#[test]
fn iterated_orbit_rescales_the_ladder() {
    // quasimodes of γ^m are those of γ, so p_k(γ^m) = m^k p_k(γ) and f_k(γ^m) = m^k f_k(γ)
    let germs = common::random_germs_with_jets(11, 6, 6);
    let mut tested = 0;
    for (_, g, fr) in germs {
        let a = fr.alpha()[0];
        let clear = (1..=12).all(|j| {
            let p = (j as f64 * a).rem_euclid(TAU);
            p.min(TAU - p) > 0.05
        });
        if !clear {
            continue;
        }
        let base = compute_germ(&g, 1, 1e-6).unwrap();
        for m in [2u32, 3] {
            let it = compute_germ(&g.iterate(m), 1, 1e-6).unwrap();
            assert!((it.frame.alpha()[0] - (m as f64 * a).rem_euclid(TAU)).abs() < 1e-9);
            for k in 0..2 {
                let expected = base.scnf.f[k].scale_real((m as f64).powi(k as i32));
                let gap = it.scnf.f[k].distance(&expected);
                let tol = if k == 0 { 1e-9 } else { 1e-6 };
                assert!(gap <= tol * expected.max_abs().max(1.0), "m {m} f_{k}: {gap:e}");
            }
        }
        tested += 1;
    }
    assert!(tested >= 2);
}

#[test]
fn constant_curvature_without_normal_jets_has_constant_f0() {
    // A spindle a(r) = c cos r has curvature 1 and L = 2πc; with μ = k/c its
    // spectrum is √((μ+q)(μ+q+1)) = r - 1/(8r) + O(r⁻³), r = μ + q + 1/2, so
    // p₁ = -L/8 and f₀ = -1/4. Rescaling gives f₀ = -τ/4.
    for (tau, length) in [(1.0f64, TAU * 0.7), (1.0, TAU * 1.3), (0.3, TAU), (1.7, TAU)] {
        let c = CurvatureData2D::constant(length, 8, tau, 0.0, 0.0);
        let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
        let comp = compute_germ(&g, 0, 1e-6).unwrap();
        let f0 = &comp.scnf.f[0];
        assert!(f0.constant_coefficient(&Monomial::new(vec![2], vec![2])).norm() < 1e-12);
        assert!((f0.constant_coefficient(&Monomial::one(1)).re + tau / 4.0).abs() < 1e-12);
        assert!(comp.scnf.generators.get(&3).map_or(true, |q| q.max_abs() < 1e-14));
        let p1 = spectral_function(&comp.qbnf.p[0]).unwrap();
        for q in 0..4 {
            assert!((p1.eval(&[q as f64 + 0.5]).re + tau * length / 8.0).abs() < 1e-10);
        }
    }
}

#[test]
fn zero_normal_form_assembles_to_zero() {
    let c = CurvatureData2D::constant(TAU, 8, 0.3, 0.0, 0.0);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let mut s = compute_germ(&g, 0, 1e-6).unwrap().scnf;
    s.f = s.f.iter().map(|f| f.sub(f)).collect();
    let q = qbnf_assemble(&s).unwrap();
    assert!(q.p.iter().chain(&q.p_tilde).all(|p| p.max_abs() == 0.0));
}

#[test]
fn first_tilde_symbol_equals_first_symbol() {
    let (_, g, _) = common::random_germs(4, 1).remove(0);
    let c = compute_germ(&g, 1, 1e-6);
    // random_germs carries only fourth-order jets
    assert!(matches!(c, Err(Error::InsufficientJets { .. }) | Err(Error::Truncation(_))));
    let c = compute_germ(&g, 0, 1e-6).unwrap();
    assert!(c.qbnf.p_tilde[0].distance(&c.qbnf.p[0]) == 0.0);
    let p1 = c.scnf.f[0].scale_real(g.length() / 2.0);
    assert!(c.qbnf.p[0].distance(&p1) < 1e-15);
}

#[test]
fn classical_iteration_shares_the_quartic_term() {
    for (_, g, fr) in common::random_germs(31, 3) {
        let q = compute_germ(&g, 0, 1e-6).unwrap();
        let c = classical_scnf(&g, &fr, 0, 1e-6).unwrap();
        let quartic = Monomial::new(vec![2], vec![2]);
        let cq = q.scnf.f[0].constant_coefficient(&quartic);
        let cc = c.f[0].constant_coefficient(&quartic);
        assert!((cq - cc).norm() <= 1e-10 * cq.norm().max(1e-3));
        // twist = 4 L c₄ for p₁ = (L/2) f₀
        let twist = action_hessian(&q.qbnf.p[0])[(0, 0)];
        assert!((twist - 4.0 * g.length() * cq.re).abs() <= 1e-10 * twist.abs().max(1.0));
    }
}

#[test]
fn resonant_ladder_step_names_the_exponent() {
    // α = 2π/3: the cubic step hits m - n = ±3
    let c = CurvatureData2D::constant(TAU, 8, 1.0 / 9.0, 0.3, 0.1);
    let g = germ_from_curvature_2d(&c, 4, 8).unwrap();
    let err = match frame_from_germ(&g, 1e-6) {
        Err(e) => e,
        Ok(fr) => {
            let model = conjugate_to_model(&build_scaled_terms(&g, 4).unwrap(), &fr).unwrap();
            scnf_iterate(&model, 0, 1e-6).unwrap_err()
        }
    };
    match err {
        Error::Resonance { exponent, .. } => assert_eq!(exponent[0].abs(), 3),
        other => panic!("unexpected {other}"),
    }
}
