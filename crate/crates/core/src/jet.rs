// SPDX-License-Identifier: MIT OR Apache-2.0

//! Truncated Taylor series in the transverse variables with arclength-periodic
//! coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::PeriodicCoefficient;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    nvars: usize,
    order: u32,
    period: f64,
    max_freq: i64,
    terms: BTreeMap<Vec<u16>, PeriodicCoefficient>,
}

fn degree(beta: &[u16]) -> u32 {
    beta.iter().map(|&b| b as u32).sum()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl TaylorSeries {
    pub fn zero(nvars: usize, order: u32, period: f64, max_freq: i64) -> Self {
        Self {
            nvars,
            order,
            period,
            max_freq,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: u32, period: f64, max_freq: i64, value: f64) -> Self {
        let mut out = Self::zero(nvars, order, period, max_freq);
        out.set(
            vec![0; nvars],
            PeriodicCoefficient::real_constant(period, max_freq, value),
        );
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn max_freq(&self) -> i64 {
        self.max_freq
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u16>, PeriodicCoefficient> {
        &self.terms
    }

    /// Coefficient of `y^β` (not the derivative `∂^β`).
    pub fn coefficient(&self, beta: &[u16]) -> PeriodicCoefficient {
        self.terms
            .get(beta)
            .cloned()
            .unwrap_or_else(|| PeriodicCoefficient::zero(self.period, 0.0, self.max_freq))
    }

    /// `∂_y^β f(s, 0)`.
    pub fn derivative_at_zero(&self, beta: &[u16]) -> PeriodicCoefficient {
        let scale: f64 = beta.iter().map(|&b| factorial(b as u32)).product();
        self.coefficient(beta).scale_real(scale)
    }

    pub fn set(&mut self, beta: Vec<u16>, c: PeriodicCoefficient) {
        assert_eq!(beta.len(), self.nvars, "multi-index length");
        if degree(&beta) > self.order || c.is_zero() {
            self.terms.remove(&beta);
        } else {
            self.terms.insert(beta, c.with_max_freq(self.max_freq));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        out.terms.retain(|b, _| degree(b) <= out.order);
        for (b, c) in &other.terms {
            if degree(b) <= out.order {
                let sum = out.coefficient(b).add(c);
                out.set(b.clone(), sum);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_real(-1.0))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.period, self.max_freq);
        for (b, v) in &self.terms {
            out.set(b.clone(), v.scale_real(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.nvars, order, self.period, self.max_freq);
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                let beta: Vec<u16> = b1.iter().zip(b2).map(|(x, y)| x + y).collect();
                if degree(&beta) > order {
                    continue;
                }
                let sum = out.coefficient(&beta).add(&c1.mul(c2));
                out.set(beta, sum);
            }
        }
        out
    }

    /// Value at `y = 0`.
    pub fn constant_term(&self) -> PeriodicCoefficient {
        self.coefficient(&vec![0; self.nvars])
    }

    /// `f^p` for a series whose constant term is identically one.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let c0 = self.constant_term();
        let one = PeriodicCoefficient::real_constant(self.period, self.max_freq, 1.0);
        if c0.distance(&one) > 1e-12 {
            return Err(Error::Consistency(
                "fractional power of a series with non-unit constant term".to_string(),
            ));
        }
        let mut u = self.clone();
        u.terms.remove(&vec![0; self.nvars]);
        let mut out = Self::constant(self.nvars, self.order, self.period, self.max_freq, 1.0);
        let mut upow = out.clone();
        let mut binom = 1.0;
        for k in 1..=self.order {
            binom *= (p - (k - 1) as f64) / k as f64;
            upow = upow.mul(&u);
            if upow.terms.is_empty() {
                break;
            }
            out = out.add(&upow.scale_real(binom));
        }
        Ok(out)
    }

    /// `∂f/∂y_var`.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order.saturating_sub(1), self.period, self.max_freq);
        for (b, c) in &self.terms {
            if b[var] == 0 {
                continue;
            }
            let mut beta = b.clone();
            beta[var] -= 1;
            out.set(beta, c.scale_real(b[var] as f64));
        }
        out
    }

    /// `∂_s f` coefficient-wise.
    pub fn ds(&self) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.period, self.max_freq);
        for (b, c) in &self.terms {
            out.set(b.clone(), c.derivative());
        }
        out
    }

    pub fn truncate(&self, order: u32) -> Self {
        let mut out = self.clone();
        out.order = order.min(self.order);
        let o = out.order;
        out.terms.retain(|b, _| degree(b) <= o);
        out
    }

    /// Raises the declared truncation order without adding terms.
    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        let o = order;
        self.terms.retain(|b, _| degree(b) <= o);
        self
    }

    /// `f(s/ε, y/ε)` as a series in the rescaled coordinates on a period `εL`.
    pub fn rescale(&self, eps: f64) -> Self {
        let mut out = Self::zero(self.nvars, self.order, self.period * eps, self.max_freq);
        for (b, c) in &self.terms {
            let factor = eps.powi(-(degree(b) as i32));
            out.set(b.clone(), c.clone().with_period(self.period * eps).scale_real(factor));
        }
        out
    }

    pub fn eval(&self, s: f64, y: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, c) in &self.terms {
            let mono: f64 = b.iter().zip(y).map(|(&e, &v)| v.powi(e as i32)).product();
            acc += c.eval(s) * mono;
        }
        acc
    }

    pub fn max_imag(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.sub(&c.real_part()).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other)
            .terms
            .values()
            .map(|c| c.max_abs())
            .fold(0.0, f64::max)
    }
}

/// Determinant of a small symmetric matrix of series by permutation expansion.
pub fn determinant(m: &[Vec<TaylorSeries>]) -> TaylorSeries {
    let size = m.len();
    let template = &m[0][0];
    let mut perm: Vec<usize> = (0..size).collect();
    let mut out = TaylorSeries::zero(template.nvars, template.order, template.period, template.max_freq);
    permute(&mut perm, 0, &mut |p, sign| {
        let mut term = TaylorSeries::constant(template.nvars, template.order, template.period, template.max_freq, sign);
        for (row, &col) in p.iter().enumerate() {
            term = term.mul(&m[row][col]);
        }
        out = out.add(&term);
    });
    out
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize], f64)) {
    if start == p.len() {
        let mut sign = 1.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        visit(p, sign);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn univariate(coeffs: &[f64], order: u32) -> TaylorSeries {
        let mut t = TaylorSeries::zero(1, order, 1.0, 4);
        for (k, &c) in coeffs.iter().enumerate() {
            t.set(vec![k as u16], PeriodicCoefficient::real_constant(1.0, 4, c));
        }
        t
    }

    #[test]
    fn inverse_square_of_cosine_series() {
        // 1 - y²/2 + y⁴/24 raised to -2 is sec² y = 1 + y² + 2y⁴/3 + ...
        let c = univariate(&[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0], 4);
        let sec2 = c.powf(-2.0).unwrap();
        let expected = univariate(&[1.0, 0.0, 1.0, 0.0, 2.0 / 3.0], 4);
        assert!(sec2.distance(&expected) < 1e-14);
    }

    #[test]
    fn determinant_of_diagonal() {
        let a = univariate(&[1.0, 2.0], 3);
        let b = univariate(&[1.0, 0.0, 3.0], 3);
        let z = TaylorSeries::zero(1, 3, 1.0, 4);
        let det = determinant(&[vec![a.clone(), z.clone()], vec![z, b.clone()]]);
        assert!(det.distance(&a.mul(&b)) < 1e-15);
    }
}
