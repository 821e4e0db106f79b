// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fermi-coordinate jets of the inverse metric along a closed geodesic.
//!
//! Index `0` is the tangential direction `s`; indices `1..=n` are the
//! transverse Fermi coordinates `y`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{determinant, TaylorSeries};
use crate::symbol::PeriodicCoefficient;

/// Default truncation order of the stored jets.
pub const DEFAULT_MAX_JET_ORDER: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGerm {
    dim: usize,
    length: f64,
    max_jet_order: u32,
    max_freq: i64,
    holonomy: DMatrix<f64>,
    inverse_metric: Vec<Vec<TaylorSeries>>,
}

/// Dimension-2 curvature data along the geodesic. `tau` is the Gauss curvature
/// entering `Y'' + τY = 0`; `higher[j]` is the `(j+3)`-rd normal derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData2D {
    pub length: f64,
    pub tau: PeriodicCoefficient,
    pub tau_nu: PeriodicCoefficient,
    pub tau_nunu: PeriodicCoefficient,
    pub higher: Vec<PeriodicCoefficient>,
}

impl CurvatureData2D {
    pub fn constant(length: f64, max_freq: i64, tau: f64, tau_nu: f64, tau_nunu: f64) -> Self {
        let c = |v| PeriodicCoefficient::real_constant(length, max_freq, v);
        Self {
            length,
            tau: c(tau),
            tau_nu: c(tau_nu),
            tau_nunu: c(tau_nunu),
            higher: Vec::new(),
        }
    }

    /// `τ → ε⁻²τ`, `τ_ν → ε⁻³τ_ν`, and so on, with `L → εL`.
    pub fn rescale(&self, eps: f64) -> Self {
        let r = |c: &PeriodicCoefficient, w: i32| {
            c.clone().with_period(self.length * eps).scale_real(eps.powi(-w))
        };
        Self {
            length: self.length * eps,
            tau: r(&self.tau, 2),
            tau_nu: r(&self.tau_nu, 3),
            tau_nunu: r(&self.tau_nunu, 4),
            higher: self
                .higher
                .iter()
                .enumerate()
                .map(|(j, c)| r(c, j as i32 + 5))
                .collect(),
        }
    }

    /// Highest supplied normal derivative order.
    pub fn normal_order(&self) -> u32 {
        2 + self.higher.len() as u32
    }

    fn normal_derivative(&self, j: usize) -> Option<&PeriodicCoefficient> {
        match j {
            0 => Some(&self.tau),
            1 => Some(&self.tau_nu),
            2 => Some(&self.tau_nunu),
            _ => self.higher.get(j - 3),
        }
    }
}

/// One named failure of [`MetricGerm::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub name: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GermDiagnostics {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl MetricGerm {
    /// The flat germ `g^{ab} = δ^{ab}` with trivial holonomy.
    pub fn flat(dim: usize, length: f64, max_jet_order: u32, max_freq: i64) -> Self {
        let n = dim - 1;
        let inverse_metric = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        let v = if a == b { 1.0 } else { 0.0 };
                        TaylorSeries::constant(n, max_jet_order, length, max_freq, v)
                    })
                    .collect()
            })
            .collect();
        Self {
            dim,
            length,
            max_jet_order,
            max_freq,
            holonomy: DMatrix::identity(n, n),
            inverse_metric,
        }
    }

    /// A germ with `g^{oo} = 1 + Σ K_ij y_i y_j` and flat transverse block, so
    /// that the Jacobi operator is `Ÿ + K(s) Y`.
    pub fn from_jacobi_matrix(
        length: f64,
        k: &[Vec<PeriodicCoefficient>],
        max_jet_order: u32,
        max_freq: i64,
    ) -> Self {
        let n = k.len();
        let mut germ = Self::flat(n + 1, length, max_jet_order, max_freq);
        let mut goo = germ.inverse_metric[0][0].clone();
        for i in 0..n {
            for j in i..n {
                let mut beta = vec![0u16; n];
                beta[i] += 1;
                beta[j] += 1;
                let c = if i == j {
                    k[i][i].clone()
                } else {
                    k[i][j].add(&k[j][i])
                };
                goo.set(beta, c);
            }
        }
        germ.inverse_metric[0][0] = goo;
        germ
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transverse_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn max_jet_order(&self) -> u32 {
        self.max_jet_order
    }

    pub fn max_freq(&self) -> i64 {
        self.max_freq
    }

    pub fn holonomy(&self) -> &DMatrix<f64> {
        &self.holonomy
    }

    pub fn with_holonomy(mut self, t: DMatrix<f64>) -> Self {
        self.holonomy = t;
        self
    }

    pub fn has_trivial_holonomy(&self) -> bool {
        let n = self.transverse_dim();
        (&self.holonomy - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-12
    }

    /// The series `g^{ab}(s, y)`.
    pub fn inverse_metric(&self, a: usize, b: usize) -> &TaylorSeries {
        &self.inverse_metric[a][b]
    }

    /// Overwrites the `y^β` coefficient of `g^{ab}` (and of `g^{ba}`).
    pub fn set_jet_coefficient(&mut self, a: usize, b: usize, beta: Vec<u16>, c: PeriodicCoefficient) {
        self.inverse_metric[a][b].set(beta.clone(), c.clone());
        if a != b {
            self.inverse_metric[b][a].set(beta, c);
        }
    }

    /// Raises the truncation order, leaving the missing jets zero.
    pub fn with_max_jet_order(mut self, order: u32) -> Self {
        self.max_jet_order = order;
        for row in &mut self.inverse_metric {
            for entry in row.iter_mut() {
                *entry = entry.clone().with_order(order);
            }
        }
        self
    }

    /// `K_ij(s) = ½ ∂_i ∂_j g^{oo}(s, 0)`.
    pub fn jacobi_matrix(&self) -> Vec<Vec<PeriodicCoefficient>> {
        let n = self.transverse_dim();
        let goo = &self.inverse_metric[0][0];
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut beta = vec![0u16; n];
                        beta[i] += 1;
                        beta[j] += 1;
                        goo.derivative_at_zero(&beta).scale_real(0.5)
                    })
                    .collect()
            })
            .collect()
    }

    /// Riemannian density `J = (det g^{ab})^{-1/2}` as a series.
    pub fn density(&self) -> Result<TaylorSeries> {
        determinant(&self.inverse_metric).powf(-0.5)
    }

    /// The same metric scaled by `ε²`, in coordinates `(εs, εy)`.
    pub fn rescale(&self, eps: f64) -> Self {
        let inverse_metric = self
            .inverse_metric
            .iter()
            .map(|row| row.iter().map(|t| t.rescale(eps)).collect())
            .collect();
        Self {
            dim: self.dim,
            length: self.length * eps,
            max_jet_order: self.max_jet_order,
            max_freq: self.max_freq,
            holonomy: self.holonomy.clone(),
            inverse_metric,
        }
    }

    /// The germ of the `m`-fold traversal of the geodesic.
    pub fn iterate(&self, m: u32) -> Self {
        let mf = m as i64;
        let max_freq = self.max_freq * mf;
        let period = self.length * m as f64;
        let inverse_metric = self
            .inverse_metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| {
                        let mut out = TaylorSeries::zero(t.nvars(), t.order(), period, max_freq);
                        for (beta, c) in t.terms() {
                            let modes = c.modes().iter().map(|(k, a)| (k * mf, *a));
                            out.set(
                                beta.clone(),
                                PeriodicCoefficient::from_modes(period, 0.0, max_freq, modes),
                            );
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let mut holonomy = DMatrix::identity(self.transverse_dim(), self.transverse_dim());
        for _ in 0..m {
            holonomy = &holonomy * &self.holonomy;
        }
        Self {
            dim: self.dim,
            length: period,
            max_jet_order: self.max_jet_order,
            max_freq,
            holonomy,
            inverse_metric,
        }
    }

    pub fn validate(&self) -> GermDiagnostics {
        let mut violations = Vec::new();
        let n = self.transverse_dim();
        let zero = vec![0u16; n];
        for a in 0..self.dim {
            for b in 0..self.dim {
                let entry = &self.inverse_metric[a][b];
                let target = if a == b { 1.0 } else { 0.0 };
                let c0 = entry.coefficient(&zero);
                let expected = PeriodicCoefficient::real_constant(self.length, self.max_freq, target);
                let dev = c0.distance(&expected);
                if dev > 1e-10 {
                    violations.push(Violation {
                        name: "fermi_gauge_zeroth_order".to_string(),
                        detail: format!("g^{{{a}{b}}}(s,0) deviates from δ by {dev:.3e}"),
                    });
                }
                for i in 0..n {
                    let mut beta = zero.clone();
                    beta[i] = 1;
                    let first = entry.coefficient(&beta).max_abs();
                    if first > 1e-10 {
                        violations.push(Violation {
                            name: "fermi_gauge_first_order".to_string(),
                            detail: format!("∂_y{} g^{{{a}{b}}}(s,0) has size {first:.3e}", i + 1),
                        });
                    }
                }
                let imag = entry.max_imag();
                if imag > 1e-12 {
                    violations.push(Violation {
                        name: "realness".to_string(),
                        detail: format!("g^{{{a}{b}}} has imaginary part {imag:.3e}"),
                    });
                }
                if b > a {
                    let asym = entry.distance(&self.inverse_metric[b][a]);
                    if asym > 1e-12 {
                        violations.push(Violation {
                            name: "symmetry".to_string(),
                            detail: format!("g^{{{a}{b}}} - g^{{{b}{a}}} has size {asym:.3e}"),
                        });
                    }
                }
            }
        }
        if self.holonomy.nrows() != n || self.holonomy.ncols() != n {
            violations.push(Violation {
                name: "holonomy_shape".to_string(),
                detail: format!(
                    "holonomy is {}x{}, expected {n}x{n}",
                    self.holonomy.nrows(),
                    self.holonomy.ncols()
                ),
            });
        } else {
            let defect = (self.holonomy.transpose() * &self.holonomy - DMatrix::<f64>::identity(n, n))
                .abs()
                .max();
            if defect > 1e-10 {
                violations.push(Violation {
                    name: "holonomy_orthogonality".to_string(),
                    detail: format!("‖TᵀT - I‖ = {defect:.3e}"),
                });
            }
        }
        if self.max_jet_order < 2 {
            violations.push(Violation {
                name: "jet_order".to_string(),
                detail: format!("max_jet_order {} < 2", self.max_jet_order),
            });
        }
        if !(self.length > 0.0) {
            violations.push(Violation {
                name: "length".to_string(),
                detail: format!("L = {} is not positive", self.length),
            });
        }
        GermDiagnostics {
            passed: violations.is_empty(),
            violations,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut jets = Vec::new();
        for a in 0..self.dim {
            for b in a..self.dim {
                for (beta, c) in self.inverse_metric[a][b].terms() {
                    jets.push(JetEntry {
                        i: a,
                        j: b,
                        beta: beta.clone(),
                        fourier: fourier_entries(c),
                    });
                }
            }
        }
        let doc = GermFile {
            dim: self.dim,
            length: self.length,
            max_jet_order: Some(self.max_jet_order),
            holonomy: Some(
                (0..self.holonomy.nrows())
                    .map(|r| (0..self.holonomy.ncols()).map(|c| self.holonomy[(r, c)]).collect())
                    .collect(),
            ),
            jets,
        };
        serde_json::to_value(doc).expect("germ serializes")
    }

    /// Parses either the full jet schema or the dimension-2 curvature shorthand.
    pub fn from_json_str(text: &str, max_freq: i64) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
        if value.get("tau").is_some() {
            let doc: CurvatureFile = serde_json::from_value(value)
                .map_err(|e| Error::MalformedInput(e.to_string()))?;
            return doc.into_germ(max_freq);
        }
        let doc: GermFile =
            serde_json::from_value(value).map_err(|e| Error::MalformedInput(e.to_string()))?;
        doc.into_germ(max_freq)
    }
}

/// `A(s, y)` solving `∂_y² A = -K A`, `A(s,0) = 1`, `∂_y A(s,0) = 0`.
fn fermi_warp_2d(c: &CurvatureData2D, order: u32, max_freq: i64) -> Vec<PeriodicCoefficient> {
    let len = c.length;
    let zero = PeriodicCoefficient::zero(len, 0.0, max_freq);
    // K_j = ∂_ν^j τ / j!
    let curvature: Vec<PeriodicCoefficient> = (0..=order.saturating_sub(2) as usize)
        .map(|j| {
            c.normal_derivative(j)
                .map(|d| d.clone().with_max_freq(max_freq).scale_real(1.0 / factorial(j as u32)))
                .unwrap_or_else(|| zero.clone())
        })
        .collect();
    let mut a = vec![PeriodicCoefficient::real_constant(len, max_freq, 1.0), zero.clone()];
    for k in 0..=(order as usize).saturating_sub(2) {
        let mut acc = zero.clone();
        for i in 0..=k {
            acc = acc.add(&curvature[i].mul(&a[k - i]));
        }
        a.push(acc.scale_real(-1.0 / ((k + 2) * (k + 1)) as f64));
    }
    a.truncate(order as usize + 1);
    a
}

/// Builds the dimension-2 germ `g^{oo} = A⁻²`, `g^{o1} = 0`, `g^{11} = 1`.
pub fn germ_from_curvature_2d(c: &CurvatureData2D, max_jet_order: u32, max_freq: i64) -> Result<MetricGerm> {
    let available = 2 + c.normal_order();
    if max_jet_order > available {
        return Err(Error::InsufficientJets {
            needed: max_jet_order as usize,
            available: available as usize,
        });
    }
    let warp = fermi_warp_2d(c, max_jet_order, max_freq);
    let mut series = TaylorSeries::zero(1, max_jet_order, c.length, max_freq);
    for (k, coeff) in warp.into_iter().enumerate() {
        series.set(vec![k as u16], coeff);
    }
    let goo = series.powf(-2.0)?;
    let mut germ = MetricGerm::flat(2, c.length, max_jet_order, max_freq);
    germ.inverse_metric[0][0] = goo;
    Ok(germ)
}

/// Meridian profile `r ↦ a(r)` of a surface of revolution `dr² + a(r)² dθ²`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `Σ c_k r^k`.
    Polynomial(Vec<f64>),
    /// `R cos(r / R)`: the round sphere of radius `R`.
    Sphere { radius: f64 },
}

impl Profile {
    pub fn paraboloid() -> Self {
        Profile::Polynomial(vec![1.0, 0.0, -1.0])
    }

    pub fn quartic() -> Self {
        Profile::Polynomial(vec![1.0, 0.0, -1.0, 0.0, 1.0 / 3.0])
    }

    pub fn asymmetric() -> Self {
        Profile::Polynomial(vec![1.0, 0.0, -1.0, 1.0])
    }

    pub fn sphere() -> Self {
        Profile::Sphere { radius: 1.0 }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paraboloid" => Some(Self::paraboloid()),
            "quartic" => Some(Self::quartic()),
            "asymmetric" => Some(Self::asymmetric()),
            "sphere" => Some(Self::sphere()),
            _ => None,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["paraboloid", "quartic", "asymmetric", "sphere"]
    }

    /// Taylor coefficients of `a(r0 + y)` in `y` up to `order`.
    pub fn taylor(&self, r0: f64, order: usize) -> Vec<f64> {
        match self {
            Profile::Polynomial(c) => {
                let mut out = vec![0.0; order + 1];
                for (k, &ck) in c.iter().enumerate() {
                    // (r0 + y)^k = Σ_j C(k,j) r0^{k-j} y^j
                    let mut binom = 1.0;
                    for j in 0..=k {
                        if j <= order {
                            out[j] += ck * binom * r0.powi((k - j) as i32);
                        }
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                out
            }
            Profile::Sphere { radius } => (0..=order)
                .map(|j| {
                    // d^j/dr^j R cos(r/R) = R^{1-j} cos(r/R + jπ/2)
                    radius.powi(1 - j as i32) * (r0 / radius + j as f64 * PI / 2.0).cos()
                        / factorial(j as u32)
                })
                .collect(),
        }
    }

    /// `d^j a / dr^j` at `r`.
    pub fn derivative(&self, r: f64, j: usize) -> f64 {
        self.taylor(r, j)[j] * factorial(j as u32)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }
}

fn series_div(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; num.len()];
    for k in 0..num.len() {
        let mut acc = num[k];
        for j in 1..=k.min(den.len() - 1) {
            acc -= den[j] * out[k - j];
        }
        out[k] = acc / den[0];
    }
    out
}

/// Number of normal derivatives beyond `τ_νν` produced by [`germ_from_profile`].
pub const PROFILE_HIGHER_JETS: usize = 6;

/// Curvature data of the equator `r = r0` of a surface of revolution.
pub fn germ_from_profile(profile: &Profile, r0: f64, max_freq: i64) -> Result<CurvatureData2D> {
    let order = 3 + PROFILE_HIGHER_JETS;
    let a = profile.taylor(r0, order + 2);
    if !(a[0] > 0.0) {
        return Err(Error::MalformedInput(format!("a(r0) = {} is not positive", a[0])));
    }
    if a[1].abs() > 1e-12 {
        return Err(Error::NotGeodesic(a[1]));
    }
    if a[2] >= 0.0 {
        return Err(Error::NotElliptic(2.0 * a[2]));
    }
    // a''(r0 + y) as a series
    let a2: Vec<f64> = (0..=order).map(|j| a[j + 2] * ((j + 2) * (j + 1)) as f64).collect();
    let k = series_div(&a2, &a[..=order]);
    let length = TAU * a[0];
    let jet = |j: usize| PeriodicCoefficient::real_constant(length, max_freq, -k[j] * factorial(j as u32));
    Ok(CurvatureData2D {
        length,
        tau: jet(0),
        tau_nu: jet(1),
        tau_nunu: jet(2),
        higher: (3..=order).map(jet).collect(),
    })
}

/// The exact profile germ `g^{oo} = a(r0)² / a(r0 + y)²`, used as an oracle for
/// [`germ_from_curvature_2d`].
pub fn profile_inverse_metric_series(profile: &Profile, r0: f64, order: usize) -> Vec<f64> {
    let a = profile.taylor(r0, order);
    let ratio: Vec<f64> = a.iter().map(|v| v / a[0]).collect();
    let mut inv = vec![0.0; order + 1];
    inv[0] = 1.0;
    let inv = series_div(&inv, &ratio);
    let mut sq = vec![0.0; order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            sq[i + j] += inv[i] * inv[j];
        }
    }
    sq
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierEntry {
    pub freq: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct JetEntry {
    i: usize,
    j: usize,
    beta: Vec<u16>,
    fourier: Vec<FourierEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GermFile {
    dim: usize,
    #[serde(rename = "L")]
    length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_jet_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    holonomy: Option<Vec<Vec<f64>>>,
    jets: Vec<JetEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ScalarOrSeries {
    Scalar(f64),
    Series(Vec<FourierEntry>),
}

#[derive(Clone, Debug, Deserialize)]
struct CurvatureFile {
    #[serde(rename = "L")]
    length: f64,
    tau: ScalarOrSeries,
    #[serde(default)]
    tau_nu: Option<ScalarOrSeries>,
    #[serde(default)]
    tau_nunu: Option<ScalarOrSeries>,
    #[serde(default)]
    higher: Vec<ScalarOrSeries>,
    #[serde(default)]
    max_jet_order: Option<u32>,
}

pub fn fourier_entries(c: &PeriodicCoefficient) -> Vec<FourierEntry> {
    c.modes()
        .iter()
        .map(|(k, a)| FourierEntry {
            freq: *k,
            re: a.re,
            im: a.im,
        })
        .collect()
}

fn coefficient_from_entries(length: f64, max_freq: i64, entries: &[FourierEntry]) -> Result<PeriodicCoefficient> {
    let mut seen = BTreeMap::new();
    for e in entries {
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::MalformedInput(format!("non-finite amplitude at frequency {}", e.freq)));
        }
        if e.freq.abs() > max_freq {
            return Err(Error::MalformedInput(format!(
                "frequency {} exceeds the retained bandwidth {max_freq}",
                e.freq
            )));
        }
        if seen.insert(e.freq, ()).is_some() {
            return Err(Error::MalformedInput(format!("duplicate frequency {}", e.freq)));
        }
    }
    Ok(PeriodicCoefficient::from_modes(
        length,
        0.0,
        max_freq,
        entries.iter().map(|e| (e.freq, Complex64::new(e.re, e.im))),
    ))
}

impl ScalarOrSeries {
    fn to_coefficient(&self, length: f64, max_freq: i64) -> Result<PeriodicCoefficient> {
        match self {
            ScalarOrSeries::Scalar(v) => {
                if !v.is_finite() {
                    return Err(Error::MalformedInput("non-finite curvature value".to_string()));
                }
                Ok(PeriodicCoefficient::real_constant(length, max_freq, *v))
            }
            ScalarOrSeries::Series(e) => coefficient_from_entries(length, max_freq, e),
        }
    }
}

impl CurvatureFile {
    fn into_germ(self, max_freq: i64) -> Result<MetricGerm> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::MalformedInput(format!("L = {} is not positive", self.length)));
        }
        let l = self.length;
        let zero = ScalarOrSeries::Scalar(0.0);
        let data = CurvatureData2D {
            length: l,
            tau: self.tau.to_coefficient(l, max_freq)?,
            tau_nu: self.tau_nu.as_ref().unwrap_or(&zero).to_coefficient(l, max_freq)?,
            tau_nunu: self.tau_nunu.as_ref().unwrap_or(&zero).to_coefficient(l, max_freq)?,
            higher: self
                .higher
                .iter()
                .map(|h| h.to_coefficient(l, max_freq))
                .collect::<Result<_>>()?,
        };
        germ_from_curvature_2d(&data, self.max_jet_order.unwrap_or(DEFAULT_MAX_JET_ORDER), max_freq)
    }
}

impl GermFile {
    fn into_germ(self, max_freq: i64) -> Result<MetricGerm> {
        if self.dim < 2 {
            return Err(Error::MalformedInput(format!("dim = {} must be at least 2", self.dim)));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::MalformedInput(format!("L = {} is not positive", self.length)));
        }
        let n = self.dim - 1;
        let order = self.max_jet_order.unwrap_or_else(|| {
            self.jets
                .iter()
                .map(|e| e.beta.iter().map(|&b| b as u32).sum::<u32>())
                .max()
                .unwrap_or(0)
                .max(DEFAULT_MAX_JET_ORDER)
        });
        let mut germ = MetricGerm::flat(self.dim, self.length, order, max_freq);
        let mut explicit_zeroth = vec![vec![false; self.dim]; self.dim];
        for e in &self.jets {
            if e.i >= self.dim || e.j >= self.dim {
                return Err(Error::MalformedInput(format!("jet index ({}, {}) out of range", e.i, e.j)));
            }
            if e.beta.len() != n {
                return Err(Error::MalformedInput(format!(
                    "multi-index {:?} has length {}, expected {n}",
                    e.beta,
                    e.beta.len()
                )));
            }
            let deg: u32 = e.beta.iter().map(|&b| b as u32).sum();
            if deg > order {
                return Err(Error::MalformedInput(format!(
                    "jet of order {deg} exceeds max_jet_order {order}"
                )));
            }
            let c = coefficient_from_entries(self.length, max_freq, &e.fourier)?;
            if deg == 0 && !explicit_zeroth[e.i][e.j] {
                // explicit zeroth-order data replaces the implied Fermi value
                germ.set_jet_coefficient(e.i, e.j, e.beta.clone(), PeriodicCoefficient::zero(self.length, 0.0, max_freq));
                explicit_zeroth[e.i][e.j] = true;
                explicit_zeroth[e.j][e.i] = true;
            }
            let sum = germ.inverse_metric[e.i][e.j].coefficient(&e.beta).add(&c);
            germ.set_jet_coefficient(e.i, e.j, e.beta.clone(), sum);
        }
        if let Some(h) = self.holonomy {
            if h.len() != n || h.iter().any(|row| row.len() != n) {
                return Err(Error::MalformedInput(format!("holonomy must be {n}x{n}")));
            }
            germ.holonomy = DMatrix::from_fn(n, n, |r, c| h[r][c]);
        }
        Ok(germ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_curvature() {
        let c = germ_from_profile(&Profile::paraboloid(), 0.0, 8).unwrap();
        assert!((c.length - TAU).abs() < 1e-15);
        assert!((c.tau.mean().re - 2.0).abs() < 1e-14);
        assert!(c.tau_nu.max_abs() < 1e-14);
    }

    #[test]
    fn convex_profile_rejected() {
        let p = Profile::Polynomial(vec![1.0, 0.0, 1.0]);
        assert!(matches!(germ_from_profile(&p, 0.0, 8), Err(Error::NotElliptic(_))));
    }
}
