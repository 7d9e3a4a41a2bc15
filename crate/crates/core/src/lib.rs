//! Cooling of quantum systems by randomized repeated system–meter interactions.

extern crate blas_src;

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod model;
pub mod numeric;
pub mod operator;
pub mod protocol;
pub mod quadrature;
pub mod rng;
pub mod steady;
pub mod steering;
pub mod trajectory;

pub use error::{Error, Result};
pub use operator::{C64, DensityMatrix, Operator, Spectrum};
