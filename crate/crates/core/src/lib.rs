//! Spectral shift operators `Xi(lambda)` and spectral shift functions
//! `xi(lambda)` for pairs of self-adjoint operators, with finite-dimensional
//! pairs, spectral averaging, a continuum model and discretized
//! Schrödinger operators.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod averaging;
pub mod branchlog;
pub mod continuum;
pub mod error;
pub mod finite_pair;
pub mod linalg;
pub mod quad;
pub mod schrodinger;
pub mod step;

pub use error::{Error, Result};
pub use linalg::{CMatrix, HermitianOperator, C64};
pub use step::StepFunction;
