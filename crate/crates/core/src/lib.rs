//! Certified approximation of maximum cut and fractional cut covering.
//!
//! A run solves a semidefinite relaxation, sanitizes its output into a
//! checkable certificate, samples cuts by random hyperplanes, solves a
//! restricted covering LP over the sample and packages everything into a
//! β-certificate that [`certify::verify`] re-checks from scratch.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
mod codec;
pub mod conic;
pub mod cover;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod sampling;
pub mod sanitize;

pub use codec::Encoding;
