//! Numerical tools for generalized Hilbert operators `H_g` acting between
//! spaces of analytic functions on the unit disk.

pub mod cli;
pub mod coeffspace;
pub mod diagnostics;
pub mod error;
pub mod hilbertop;
pub mod means;
pub mod numeric;
pub mod opnorm;
pub mod quad;
pub mod suite;

pub use coeffspace::{CoefficientSequence, SpaceSpec, SymbolSpec};
pub use error::{Error, Result};
