#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical toolkit for quantitative stratification of singular sets of subharmonic
//! functions with a Riesz characteristic: p-flows, spherical statistics, densities,
//! homogeneity strata, energies and covering estimators.

pub mod covering;
pub mod density;
pub mod energy;
pub mod error;
pub mod examples;
pub mod fields;
pub mod geometry;
pub mod homogeneity;
pub mod kernels;
pub mod means;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
