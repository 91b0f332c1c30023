//! Numerical laboratory for spectral projectors on the hyperbolic plane.

pub mod error;
pub mod geometry;
pub mod quad;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub mod projector;
pub mod examples;
pub mod quotient;
pub mod dispersive;
pub mod cusp;
