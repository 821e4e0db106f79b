// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("period mismatch: {left} vs {right}")]
    PeriodMismatch { left: f64, right: f64 },

    #[error("resonant exponent m-n = {exponent:?}: |1 - e^(i(m-n).alpha)| = {divisor:.3e}{}", step_suffix(.step))]
    Resonance {
        exponent: Vec<i32>,
        divisor: f64,
        step: Option<u32>,
    },

    #[error("consistency: {0}")]
    Consistency(String),

    #[error("substitution is not symplectic (defect {defect:.3e})")]
    NonSymplectic { defect: f64 },

    #[error("insufficient jet data: order {needed} requested, {available} available")]
    InsufficientJets { needed: usize, available: usize },

    #[error("profile is not a geodesic at r0: a'(r0) = {0:.3e}")]
    NotGeodesic(f64),

    #[error("equator is not elliptic: a''(r0) = {0:.3e} must be negative")]
    NotElliptic(f64),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("monodromy is not elliptic: eigenvalue modulus {modulus:.12}")]
    NonElliptic { modulus: f64 },

    #[error("degenerate monodromy: eigenvalue within {distance:.3e} of +-1")]
    Degenerate { distance: f64 },

    #[error("near resonance among Floquet angles and pi: {0}")]
    NearResonance(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("nontrivial holonomy is not supported by the symbol pipeline")]
    UnsupportedHolonomy,

    #[error("ill-posed: {0}")]
    IllPosed(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("unconverged: {0}")]
    Unconverged(String),

    #[error("truncation insufficient: {0}")]
    Truncation(String),
}

fn step_suffix(step: &Option<u32>) -> String {
    match step {
        Some(m) => format!(" at ladder step {m}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
