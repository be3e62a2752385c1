//! Numerical toolkit for integrable GL(NM) relativistic interacting tops.

pub mod axioms;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod lax;
pub mod rmatrix;
pub mod specfun;
pub mod tensorops;

pub use error::{Error, Result};
