//! Rank-one hypergeometric functions of two matrix arguments.
//!
//! When `X` has rank one the matrix-argument function `pFq^α(a, b; X, Y)`
//! reduces to a single contour integral of a scalar hypergeometric kernel.
//! This crate evaluates that integral, cross-checks it against the Jack
//! polynomial series and a sphere Monte Carlo average, and assembles the
//! joint eigenvalue density and likelihood ratio for testing equality of
//! two covariance matrices against a rank-one alternative.

pub mod cli;
pub mod contour;
pub mod density;
pub mod error;
pub mod gamma;
pub mod jack;
pub mod params;
pub mod result;
pub mod scalar;
pub mod sphere;

pub use error::{Error, Result};
pub use result::{EvalResult, Method};
pub use num_complex::Complex64 as C64;
