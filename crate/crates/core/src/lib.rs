//! Heat fluctuations between locally thermal quantum systems.
//!
//! Margenau-Hill quasiprobabilities and two-point-measurement distributions
//! of exchanged heat, the inequalities whose violation witnesses negative
//! quasiprobabilities, and an exact qubit-probe reconstruction scheme.

// `!(x > y)` checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod states;
pub mod dynamics;
pub mod fluctuations;
pub mod witnesses;
pub mod exec;
pub mod probe;
pub mod ensemble;
pub mod config;
pub mod scenario;
pub mod analysis;
pub mod sweep;
pub mod suite;

pub use error::{Error, Result};
