//! Exact-geometry calculators for amalgam, Morrey, weak-Lebesgue and
//! Fofana norms of piecewise-constant functions, plus two-sided
//! certificates for the predual decomposition norm.
//!
//! Geometry (boxes, lattice scales, grid points) is exact rational;
//! values and norms are generic over the floating scalar through
//! [`real::Real`]. The aliases below fix `f64`, the precision the
//! command line tool and the acceptance suite use.

pub mod approx;
pub mod error;
pub mod exponents;
pub mod fofana;
pub mod geometry;
pub mod hspace;
pub mod norms;
pub mod rational;
pub mod real;
pub mod simple;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{Exponent, Exponents};
pub use geometry::Aabb;
pub use rational::Rat;
pub use real::Real;
pub use simple::SimpleFunction;

pub type SimpleFunction64 = simple::SimpleFunction<f64>;
pub type SimpleFunction32 = simple::SimpleFunction<f32>;
