// SPDX-License-Identifier: MIT OR Apache-2.0

//! Transvectants and the Moyal product in complex coordinates.
//!
//! With `z = x + iξ` and the Weyl calculus at unit Planck constant, the Poisson
//! bivector equals `-2i (∂_z∂_w̄ - ∂_z̄∂_w)`, so the Moyal product reduces to
//! `a # b = Σ_k P_k(a, b) / k!` and `z # z̄ - z̄ # z = 2`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::poly::{Monomial, WeylPolynomial};
use crate::error::{Error, Result};

/// Which symbol calculus composes operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Calculus {
    /// Full Moyal product.
    #[default]
    Quantum,
    /// Product truncated after the first transvectant (Poisson level).
    Classical,
}

/// Selection of transvectant orders and their weights in a bilinear operation.
#[derive(Clone, Copy, Debug)]
enum Bilinear {
    /// Only order `k`, with the bidifferential normalization of `P_k`.
    Transvectant(u32),
    /// `Σ_k P_k / k!` for `k ≤ max_order`.
    Star { max_order: u32 },
    /// `a#b - b#a`: odd orders doubled.
    Commutator { max_order: u32 },
    /// `a#b + b#a`: even orders doubled.
    Anticommutator { max_order: u32 },
}

impl Bilinear {
    /// Weight applied to the elementary term of order `k` (already divided by `k!`).
    fn weight(self, k: u32) -> f64 {
        match self {
            Bilinear::Transvectant(order) => {
                if k == order {
                    factorial(k)
                } else {
                    0.0
                }
            }
            Bilinear::Star { max_order } => {
                if k <= max_order {
                    1.0
                } else {
                    0.0
                }
            }
            Bilinear::Commutator { max_order } => {
                if k <= max_order && k % 2 == 1 {
                    2.0
                } else {
                    0.0
                }
            }
            Bilinear::Anticommutator { max_order } => {
                if k <= max_order && k % 2 == 0 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }

    fn max_order(self) -> u32 {
        match self {
            Bilinear::Transvectant(k) => k,
            Bilinear::Star { max_order }
            | Bilinear::Commutator { max_order }
            | Bilinear::Anticommutator { max_order } => max_order,
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn falling(x: u16, k: u16) -> f64 {
    (0..k).map(|i| (x - i) as f64).product()
}

/// Per-dimension contraction choices `(a_j, b_j)` with their elementary weight
/// `(-1)^{b_j} ff(m1,a) ff(n2,a) ff(n1,b) ff(m2,b) / (a! b!)`.
fn contractions(
    ma: &Monomial,
    mb: &Monomial,
    max_order: u32,
) -> Vec<(Vec<u16>, Vec<u16>, u32, f64)> {
    let dim = ma.dim();
    let mut out: Vec<(Vec<u16>, Vec<u16>, u32, f64)> = vec![(Vec::new(), Vec::new(), 0, 1.0)];
    for j in 0..dim {
        let amax = ma.m[j].min(mb.n[j]);
        let bmax = ma.n[j].min(mb.m[j]);
        let mut next = Vec::new();
        for (av, bv, k, w) in &out {
            for a in 0..=amax {
                for b in 0..=bmax {
                    let order = k + a as u32 + b as u32;
                    if order > max_order {
                        continue;
                    }
                    let sign = if b % 2 == 1 { -1.0 } else { 1.0 };
                    let weight = sign
                        * falling(ma.m[j], a)
                        * falling(mb.n[j], a)
                        * falling(ma.n[j], b)
                        * falling(mb.m[j], b)
                        / (factorial(a as u32) * factorial(b as u32));
                    let mut av2 = av.clone();
                    av2.push(a);
                    let mut bv2 = bv.clone();
                    bv2.push(b);
                    next.push((av2, bv2, order, w * weight));
                }
            }
        }
        out = next;
    }
    out
}

fn bilinear(
    a: &WeylPolynomial,
    b: &WeylPolynomial,
    op: Bilinear,
    max_degree: Option<u32>,
) -> Result<WeylPolynomial> {
    a.check_compatible(b)?;
    if a.alpha() != b.alpha() && !a.is_zero() && !b.is_zero() {
        return Err(Error::Consistency(
            "operands carry different Floquet twists".to_string(),
        ));
    }
    let alpha = if a.is_zero() { b.alpha() } else { a.alpha() };
    let mut out = WeylPolynomial::zero(a.dim(), a.period(), a.max_freq().min(b.max_freq()))
        .with_alpha(alpha);
    let max_order = op.max_order();
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let mut partial: BTreeMap<Monomial, f64> = BTreeMap::new();
            for (av, bv, k, w) in contractions(ma, mb, max_order) {
                let weight = op.weight(k) * w;
                if weight == 0.0 {
                    continue;
                }
                let m: Vec<u16> = (0..a.dim())
                    .map(|j| ma.m[j] - av[j] + mb.m[j] - bv[j])
                    .collect();
                let n: Vec<u16> = (0..a.dim())
                    .map(|j| ma.n[j] - bv[j] + mb.n[j] - av[j])
                    .collect();
                let mono = Monomial::new(m, n);
                if let Some(d) = max_degree {
                    if mono.degree() > d {
                        continue;
                    }
                }
                *partial.entry(mono).or_insert(0.0) += weight;
            }
            if partial.is_empty() {
                continue;
            }
            let product = ca.mul(cb);
            for (mono, weight) in partial {
                if weight != 0.0 {
                    out.add_term_scaled(mono, &product, Complex64::new(weight, 0.0));
                }
            }
        }
    }
    Ok(out)
}

/// `P_k(a, b) = (∂_z·∂_w̄ - ∂_z̄·∂_w)^k a(z) b(w) |_{w=z}`.
pub fn transvectant(k: u32, a: &WeylPolynomial, b: &WeylPolynomial) -> Result<WeylPolynomial> {
    bilinear(a, b, Bilinear::Transvectant(k), None)
}

fn star_order(calculus: Calculus) -> u32 {
    match calculus {
        Calculus::Quantum => u32::MAX,
        Calculus::Classical => 1,
    }
}

/// The Moyal product `a # b`.
pub fn moyal_product(a: &WeylPolynomial, b: &WeylPolynomial) -> Result<WeylPolynomial> {
    moyal_product_with(a, b, Calculus::Quantum, None)
}

pub fn moyal_product_with(
    a: &WeylPolynomial,
    b: &WeylPolynomial,
    calculus: Calculus,
    max_degree: Option<u32>,
) -> Result<WeylPolynomial> {
    bilinear(
        a,
        b,
        Bilinear::Star {
            max_order: star_order(calculus),
        },
        max_degree,
    )
}

/// `a # b - b # a`.
pub fn commutator(a: &WeylPolynomial, b: &WeylPolynomial) -> Result<WeylPolynomial> {
    commutator_with(a, b, Calculus::Quantum, None)
}

pub fn commutator_with(
    a: &WeylPolynomial,
    b: &WeylPolynomial,
    calculus: Calculus,
    max_degree: Option<u32>,
) -> Result<WeylPolynomial> {
    bilinear(
        a,
        b,
        Bilinear::Commutator {
            max_order: star_order(calculus),
        },
        max_degree,
    )
}

/// `a # b + b # a`.
pub fn anticommutator(a: &WeylPolynomial, b: &WeylPolynomial) -> Result<WeylPolynomial> {
    bilinear(
        a,
        b,
        Bilinear::Anticommutator {
            max_order: u32::MAX,
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn zeroth_transvectant_is_product() {
        let z = WeylPolynomial::z(1, 1.0, 4, 0);
        let zb = WeylPolynomial::zbar(1, 1.0, 4, 0);
        let a = z.add(&zb.mul(&zb));
        let b = z.mul(&zb).add(&zb);
        assert!(transvectant(0, &a, &b).unwrap().distance(&a.mul(&b)) < 1e-15);
    }

    #[test]
    fn first_transvectant_of_coordinates() {
        let z = WeylPolynomial::z(1, 1.0, 4, 0);
        let zb = WeylPolynomial::zbar(1, 1.0, 4, 0);
        let unit = WeylPolynomial::constant(1, 1.0, 4, one());
        assert!(transvectant(1, &z, &zb).unwrap().distance(&unit) < 1e-15);
        assert!(transvectant(1, &zb, &z).unwrap().distance(&unit.scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn transvectant_vanishes_beyond_degree() {
        let z = WeylPolynomial::z(1, 1.0, 4, 0);
        let zb = WeylPolynomial::zbar(1, 1.0, 4, 0);
        let a = z.mul(&z).mul(&zb);
        assert!(transvectant(2, &a, &z).unwrap().is_zero());
        let sq = z.mul(&z).mul(&zb).mul(&zb);
        assert!(transvectant(1, &sq, &sq).unwrap().is_zero());
    }

    #[test]
    fn calibration_anchor() {
        let z = WeylPolynomial::z(1, 1.0, 4, 0);
        let zb = WeylPolynomial::zbar(1, 1.0, 4, 0);
        let two = WeylPolynomial::constant(1, 1.0, 4, Complex64::new(2.0, 0.0));
        assert!(commutator(&z, &zb).unwrap().distance(&two) < 1e-15);
    }

    #[test]
    fn squared_oscillator_symbol() {
        let r2 = WeylPolynomial::action2(1, 1.0, 4, 0);
        let sq = moyal_product(&r2, &r2).unwrap();
        let expected = r2.mul(&r2).sub(&WeylPolynomial::constant(1, 1.0, 4, one()));
        assert!(sq.distance(&expected) < 1e-15);
    }
}
