// SPDX-License-Identifier: MIT OR Apache-2.0

//! Weyl symbols in complex transverse coordinates with arclength-periodic
//! (Floquet-twisted) coefficients.

pub mod coefficient;
pub mod homological;
pub mod moyal;
pub mod operator;
pub mod poly;
pub mod substitute;

pub use coefficient::{max_freq_for_bandwidth, PeriodicCoefficient, AMPLITUDE_FLOOR, DEFAULT_BANDWIDTH};
pub(crate) use homological::solve_twisted_ode_at_step;
pub use homological::{
    monodromy_initial_value, monodromy_residual, ode_residual, solve_twisted_ode, OdeMode,
    DEFAULT_RESONANCE_TOL,
};
pub use moyal::{
    anticommutator, commutator, commutator_with, moyal_product, moyal_product_with, transvectant,
    Calculus,
};
pub use operator::{ds_power, GradedOperator, OperatorSymbol};
pub use poly::{Monomial, WeylPolynomial};
pub use substitute::{
    linear_symplectic_substitute, substitute, symplectic_defect, ComplexLinearMap,
    RealSymplecticMap,
};
