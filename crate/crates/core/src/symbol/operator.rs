// SPDX-License-Identifier: MIT OR Apache-2.0

//! Operators polynomial in the tangential derivative `D_s = -i ∂_s`.
//!
//! An [`OperatorSymbol`] stands for `Σ_j A_j(s) ∘ D_s^j` with the transverse
//! Weyl symbols `A_j` written to the left of `D_s`. A [`GradedOperator`] adds
//! the semiclassical grading `Σ_m ε^m 𝒪_m` with `ε = h^{1/2}`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::moyal::{commutator_with, moyal_product_with, Calculus};
use super::poly::WeylPolynomial;
use super::substitute::{substitute, ComplexLinearMap};
use crate::error::{Error, Result};

fn binomial(n: i32, k: i32) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `(-i ∂_s)^l` applied to the coefficients of a symbol.
pub fn ds_power(p: &WeylPolynomial, l: i32) -> WeylPolynomial {
    let mut out = p.clone();
    for _ in 0..l {
        out = out.ds().scale(Complex64::new(0.0, -1.0));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSymbol {
    template: WeylPolynomial,
    terms: BTreeMap<i32, WeylPolynomial>,
}

impl OperatorSymbol {
    /// The zero operator with the dimension, period and twists of `like`.
    pub fn zero_like(like: &WeylPolynomial) -> Self {
        let template = WeylPolynomial::zero(like.dim(), like.period(), like.max_freq())
            .with_alpha(like.alpha());
        Self {
            template,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: WeylPolynomial) -> Self {
        let mut out = Self::zero_like(&p);
        out.set(0, p);
        out
    }

    /// `c · D_s^power`.
    pub fn ds_monomial(like: &WeylPolynomial, power: i32, c: Complex64) -> Self {
        let mut out = Self::zero_like(like);
        let unit = WeylPolynomial::constant(like.dim(), like.period(), like.max_freq(), c)
            .with_alpha(like.alpha());
        out.set(power, unit);
        out
    }

    pub fn template(&self) -> &WeylPolynomial {
        &self.template
    }

    pub fn terms(&self) -> &BTreeMap<i32, WeylPolynomial> {
        &self.terms
    }

    /// Coefficient of `D_s^power`.
    pub fn part(&self, power: i32) -> WeylPolynomial {
        self.terms
            .get(&power)
            .cloned()
            .unwrap_or_else(|| self.template.clone())
    }

    pub fn set(&mut self, power: i32, p: WeylPolynomial) {
        if p.is_zero() {
            self.terms.remove(&power);
        } else {
            self.terms.insert(power, p);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> i32 {
        self.terms.keys().copied().max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, poly) in &other.terms {
            let sum = out.part(*p).add(poly);
            out.set(*p, sum);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero_like(&self.template);
        for (p, poly) in &self.terms {
            out.set(*p, poly.scale(c));
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Operator composition `self ∘ other`.
    pub fn compose(&self, other: &Self, calculus: Calculus) -> Result<Self> {
        let mut out = Self::zero_like(&self.template);
        for (&j, a) in &self.terms {
            for (&k, b) in &other.terms {
                if j < 0 {
                    return Err(Error::Consistency(
                        "composition with negative tangential powers on the left".to_string(),
                    ));
                }
                for l in 0..=j {
                    let db = ds_power(b, l);
                    if db.is_zero() {
                        continue;
                    }
                    let prod = moyal_product_with(a, &db, calculus, None)?;
                    let power = j - l + k;
                    let acc = out.part(power).add(&prod.scale_real(binomial(j, l)));
                    out.set(power, acc);
                }
            }
        }
        Ok(out)
    }

    /// `[self, other]`; the `l = 0` terms pair into exact symbol commutators.
    pub fn commutator(&self, other: &Self, calculus: Calculus) -> Result<Self> {
        let mut out = Self::zero_like(&self.template);
        for (&j, a) in &self.terms {
            for (&k, b) in &other.terms {
                if j < 0 || k < 0 {
                    return Err(Error::Consistency(
                        "commutator with negative tangential powers".to_string(),
                    ));
                }
                let bracket = commutator_with(a, b, calculus, None)?;
                let acc = out.part(j + k).add(&bracket);
                out.set(j + k, acc);
                for l in 1..=j {
                    let db = ds_power(b, l);
                    if db.is_zero() {
                        continue;
                    }
                    let prod = moyal_product_with(a, &db, calculus, None)?;
                    let acc = out.part(j - l + k).add(&prod.scale_real(binomial(j, l)));
                    out.set(j - l + k, acc);
                }
                for l in 1..=k {
                    let da = ds_power(a, l);
                    if da.is_zero() {
                        continue;
                    }
                    let prod = moyal_product_with(b, &da, calculus, None)?;
                    let acc = out.part(k - l + j).sub(&prod.scale_real(binomial(k, l)));
                    out.set(k - l + j, acc);
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Conjugation by a metaplectic frame: each coefficient is substituted and
    /// `D_s` is replaced by `shift`.
    pub fn conjugate_by_frame(
        &self,
        map: &ComplexLinearMap,
        shift: &OperatorSymbol,
        calculus: Calculus,
    ) -> Result<Self> {
        let unit = WeylPolynomial::constant(map.dim, map.period, map.max_freq, Complex64::new(1.0, 0.0))
            .with_alpha(&map.alpha);
        let mut out = Self::zero_like(&unit);
        let mut shift_pow = OperatorSymbol::from_poly(unit.clone());
        for power in 0..=self.max_power().max(0) {
            if power > 0 {
                shift_pow = shift_pow.compose(shift, calculus)?;
            }
            if let Some(a) = self.terms.get(&power) {
                let sub = OperatorSymbol::from_poly(substitute(a, map)?);
                out = out.add(&sub.compose(&shift_pow, calculus)?);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let parts: Vec<_> = self
            .terms
            .iter()
            .map(|(p, poly)| serde_json::json!({ "ds_power": p, "symbol": poly.to_json() }))
            .collect();
        serde_json::Value::Array(parts)
    }
}

/// `Σ_m ε^m 𝒪_m`, truncated at `ε^{max_order}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator {
    pub max_order: u32,
    template: WeylPolynomial,
    terms: BTreeMap<u32, OperatorSymbol>,
}

impl GradedOperator {
    pub fn zero_like(like: &WeylPolynomial, max_order: u32) -> Self {
        Self {
            max_order,
            template: OperatorSymbol::zero_like(like).template,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(order: u32, op: OperatorSymbol, max_order: u32) -> Self {
        let mut out = Self::zero_like(op.template(), max_order);
        out.set(order, op);
        out
    }

    pub fn template(&self) -> &WeylPolynomial {
        &self.template
    }

    pub fn terms(&self) -> &BTreeMap<u32, OperatorSymbol> {
        &self.terms
    }

    pub fn order(&self, m: u32) -> OperatorSymbol {
        self.terms
            .get(&m)
            .cloned()
            .unwrap_or_else(|| OperatorSymbol::zero_like(&self.template))
    }

    pub fn set(&mut self, m: u32, op: OperatorSymbol) {
        if op.is_zero() || m > self.max_order {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, op);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, op) in &other.terms {
            let sum = out.order(*m).add(op);
            out.set(*m, sum);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero_like(&self.template, self.max_order);
        for (m, op) in &self.terms {
            out.set(*m, op.scale(c));
        }
        out
    }

    pub fn compose(&self, other: &Self, calculus: Calculus) -> Result<Self> {
        let max_order = self.max_order.min(other.max_order);
        let mut out = Self::zero_like(&self.template, max_order);
        for (&m1, a) in &self.terms {
            for (&m2, b) in &other.terms {
                if m1 + m2 > max_order {
                    continue;
                }
                let prod = a.compose(b, calculus)?;
                let sum = out.order(m1 + m2).add(&prod);
                out.set(m1 + m2, sum);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self, calculus: Calculus) -> Result<Self> {
        let max_order = self.max_order.min(other.max_order);
        let mut out = Self::zero_like(&self.template, max_order);
        for (&m1, a) in &self.terms {
            for (&m2, b) in &other.terms {
                if m1 + m2 > max_order {
                    continue;
                }
                let bracket = a.commutator(b, calculus)?;
                let sum = out.order(m1 + m2).add(&bracket);
                out.set(m1 + m2, sum);
            }
        }
        Ok(out)
    }

    /// `e^{iε^j Q} 𝒪 e^{-iε^j Q}` expanded as `Σ_k (i ad)^k / k!`.
    pub fn conjugate_exp(&self, generator: &WeylPolynomial, j: u32, calculus: Calculus) -> Result<Self> {
        if j == 0 {
            return Err(Error::Consistency(
                "generator must carry a positive grade".to_string(),
            ));
        }
        let g = GradedOperator::single(j, OperatorSymbol::from_poly(generator.clone()), self.max_order);
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 1u32;
        loop {
            term = g
                .commutator(&term, calculus)?
                .scale(Complex64::new(0.0, 1.0 / k as f64));
            if term.terms.is_empty() {
                break;
            }
            out = out.add(&term);
            k += 1;
            if k * j > self.max_order {
                break;
            }
        }
        Ok(out)
    }

    /// Applies the same frame conjugation to every grade.
    pub fn conjugate_by_frame(
        &self,
        map: &ComplexLinearMap,
        shift: &OperatorSymbol,
        calculus: Calculus,
    ) -> Result<Self> {
        let unit = WeylPolynomial::zero(map.dim, map.period, map.max_freq).with_alpha(&map.alpha);
        let mut out = Self::zero_like(&unit, self.max_order);
        for (m, op) in &self.terms {
            out.set(*m, op.conjugate_by_frame(map, shift, calculus)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let parts: Vec<_> = self
            .terms
            .iter()
            .map(|(m, op)| serde_json::json!({ "order": m, "operator": op.to_json() }))
            .collect();
        serde_json::Value::Array(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::coefficient::PeriodicCoefficient;
    use crate::symbol::poly::Monomial;

    #[test]
    fn ds_commutes_through_coefficients() {
        // [D_s, a(s)] = -i a'(s)
        let l = 2.0;
        let coeff = PeriodicCoefficient::from_modes(l, 0.0, 8, [(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))]);
        let mut a = WeylPolynomial::zero(1, l, 8);
        a.add_term(Monomial::new(vec![1], vec![1]), coeff);
        let ds = OperatorSymbol::ds_monomial(&a, 1, Complex64::new(1.0, 0.0));
        let op_a = OperatorSymbol::from_poly(a.clone());
        let comm = ds.commutator(&op_a, Calculus::Quantum).unwrap();
        let expected = OperatorSymbol::from_poly(a.ds().scale(Complex64::new(0.0, -1.0)));
        assert!(comm.distance(&expected) < 1e-14);
    }
}
