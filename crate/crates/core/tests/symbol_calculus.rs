// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{symbol_from_reals, weyl_quantize};
use num_complex::Complex64;
use proptest::prelude::*;
use qbnf::symbol::{
    commutator, commutator_with, moyal_product, moyal_product_with, transvectant, Calculus,
    PeriodicCoefficient, WeylPolynomial,
};

const MODES: usize = 60;
const BLOCK: usize = 20;

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 30)
}

fn z() -> WeylPolynomial {
    WeylPolynomial::z(1, 1.0, 0, 0)
}

fn zbar() -> WeylPolynomial {
    WeylPolynomial::zbar(1, 1.0, 0, 0)
}

fn constant(v: f64) -> WeylPolynomial {
    WeylPolynomial::constant(1, 1.0, 0, Complex64::new(v, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn product_quantizes_to_operator_product(a in coefficients(), b in coefficients()) {
        let (a, b) = (symbol_from_reals(&a, 4), symbol_from_reals(&b, 4));
        let lhs = weyl_quantize(&moyal_product(&a, &b).unwrap(), MODES);
        let rhs = weyl_quantize(&a, MODES).mul(&weyl_quantize(&b, MODES));
        let err = lhs.block_distance(&rhs, BLOCK) / rhs.block_max(BLOCK).max(1.0);
        prop_assert!(err <= 1e-8, "relative error {err:e}");
    }

    #[test]
    fn product_is_associative(a in coefficients(), b in coefficients(), c in coefficients()) {
        let (a, b, c) = (symbol_from_reals(&a, 3), symbol_from_reals(&b, 3), symbol_from_reals(&c, 3));
        let left = moyal_product(&moyal_product(&a, &b).unwrap(), &c).unwrap();
        let right = moyal_product(&a, &moyal_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.distance(&right) <= 1e-12 * left.max_abs().max(1.0));
    }

    #[test]
    fn adjoint_reverses_products(a in coefficients(), b in coefficients()) {
        let (a, b) = (symbol_from_reals(&a, 4), symbol_from_reals(&b, 4));
        let left = moyal_product(&a, &b).unwrap().adjoint();
        let right = moyal_product(&b.adjoint(), &a.adjoint()).unwrap();
        prop_assert!(left.distance(&right) <= 1e-12 * left.max_abs().max(1.0));
    }

    #[test]
    fn real_symbols_are_conjugate_symmetric(a in coefficients()) {
        prop_assert!(symbol_from_reals(&a, 4).conjugate_symmetry_defect() <= 1e-15);
    }

    #[test]
    fn classical_product_keeps_two_terms(a in coefficients(), b in coefficients()) {
        let (a, b) = (symbol_from_reals(&a, 4), symbol_from_reals(&b, 4));
        let classical = moyal_product_with(&a, &b, Calculus::Classical, None).unwrap();
        let expected = a.mul(&b).add(&transvectant(1, &a, &b).unwrap());
        prop_assert!(classical.distance(&expected) <= 1e-12 * expected.max_abs().max(1.0));
    }
}

#[test]
fn canonical_commutator_is_exactly_two() {
    let c = commutator(&z(), &zbar()).unwrap();
    assert_eq!(c.distance(&constant(2.0)), 0.0);
    let c = commutator_with(&z(), &zbar(), Calculus::Classical, None).unwrap();
    assert_eq!(c.distance(&constant(2.0)), 0.0);
}

#[test]
fn hermite_quantization_of_actions() {
    let action = WeylPolynomial::action2(1, 1.0, 0, 0);
    let op = weyl_quantize(&action, MODES);
    // Op(|z|²) = 2q + 1 on state q
    for q in 0..BLOCK {
        assert!((op.get(q, q) - Complex64::new(2.0 * q as f64 + 1.0, 0.0)).norm() < 1e-12);
    }
    let square = moyal_product(&action, &action).unwrap();
    let quartic = action.mul(&action);
    assert!(square.distance(&quartic.sub(&constant(1.0))) < 1e-14);
}

#[test]
fn periodic_coefficients_compose_pointwise() {
    let a = PeriodicCoefficient::from_modes(2.0, 0.0, 8, [(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))]);
    let p = WeylPolynomial::z(1, 2.0, 8, 0).scale_by_function(&a);
    let q = moyal_product(&p, &WeylPolynomial::zbar(1, 2.0, 8, 0)).unwrap();
    for s in [0.0, 0.3, 1.1] {
        let zv = [Complex64::new(0.4, -0.2)];
        let expected = a.eval(s) * (zv[0] * zv[0].conj() + 1.0);
        assert!((q.eval(s, &zv) - expected).norm() < 1e-12);
    }
}
