//! Vanishing-viscosity solver and kinetic-formulation diagnostics for
//! stochastically forced scalar conservation laws on the periodic torus.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod doubling;
pub mod error;
pub mod flux;
pub mod grid;
pub mod harness;
pub mod kinetic;
pub mod noise;
pub mod oracles;
pub mod quadrature;
pub mod solver;

pub use error::{KinError, Result};
