//! Bounds on the Brunn-Minkowski exponent of generalized Gaussian measures
//! `dμ_p = c e^{−|x|^p/p} dx`, and numerical tools for checking them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated constants keep all their published digits.
#![allow(clippy::excessive_precision)]

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
