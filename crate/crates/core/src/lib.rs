//! Numerical laboratory for the anisotropic dislocation interaction energy
//!
//! `I(mu) = int int V(x - y) dmu dmu + int |x|^2 dmu` with
//! `V(x) = -log|x| + x1^2/|x|^2`, whose minimiser is the semicircle law on the
//! vertical axis.

// negated comparisons are used deliberately so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod elcheck;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod particle;
pub mod quadrature;

pub use error::{Error, Result};
pub use kernel::{ExtendedReal, Point};
pub use num_complex::Complex64;
