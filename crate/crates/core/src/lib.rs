#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Shift-operator calculus, heat kernels and Segal-Bargmann limits on the
//! odd-dimensional hyperbolic spaces `H^{2n+1}`.

pub mod error;
pub mod exec;
pub mod jet;
pub mod kernels;
pub mod limits;
pub mod quad;
pub mod series;
pub mod shift;
pub mod spectral;
pub mod special;
pub mod spherical;
pub mod trigexpr;
pub mod verify;

pub use error::{Error, Result};
