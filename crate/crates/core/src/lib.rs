//! Stabilised three-field finite elements for the Poisson problem with
//! Nitsche-type weak Dirichlet conditions.
//!
//! Unknowns are the P1 solution `u`, its P1 gradient approximation `σ`, and
//! a multiplier `φ` in the dual space biorthogonal to P1. The pairing matrix
//! between `σ` and `φ` is diagonal, so both are eliminated locally and the
//! solve reduces to a sparse SPD system for `u` alone.

// Negated float comparisons are used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod condense;
pub mod error;
pub mod exec;
pub mod femcore;
pub mod linsolve;
pub mod mesh;
pub mod problems;
pub mod study;

pub use error::{Error, Result};
pub use exec::Execution;
