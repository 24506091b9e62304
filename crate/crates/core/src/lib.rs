//! Numerical lab for divergence phenomena of sampling series of bandlimited
//! signals: truncated Shannon and Valiron series, interpolation on perturbed
//! zero sets, the adversarial signals that make them diverge and checkers
//! for the quantitative bounds behind those constructions.

// NaN must fail every bound check, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod signals;
pub mod summation;
pub mod engines;
pub mod sinetype;
pub mod oracle;
pub mod analysis;

pub use error::{Error, Result};
