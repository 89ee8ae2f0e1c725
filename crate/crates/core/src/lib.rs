//! Barrier construction, fractional operators and nested-ball solvers for
//! `a(x)(-Δ)^s u - c u = f` with unbounded diffusion coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod coefficients;
pub mod elliptic;
pub mod error;
pub mod grid;
mod linear;
pub mod operator;
pub mod parabolic;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use grid::Grid1D;
