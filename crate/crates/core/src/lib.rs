// SPDX-License-Identifier: MIT OR Apache-2.0

//! Quantum Birkhoff normal forms of the Laplacian near an elliptic closed geodesic.

pub mod error;
pub mod classical;
pub mod direct;
pub mod germ;
pub mod jacobi;
pub mod jet;
pub mod laplacian;
pub mod normal_form;
pub mod pipeline;
pub mod random;
pub mod spectral;
pub mod symbol;
pub mod wave;

pub use error::{Error, Result};
