//! Fast and parallel Runge-Kutta convolution quadrature for linear evolution
//! equations with a Caputo time derivative of order `0 < α < 1`.

pub mod caputo;
pub mod contour;
pub mod error;
pub mod fastcq;
pub mod operators;
pub mod problem;
pub mod smallmat;
pub mod tableau;

pub use error::{Error, Result};
