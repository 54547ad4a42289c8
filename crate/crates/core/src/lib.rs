//! Numerical Hilbert geometry on strictly convex projective domains,
//! discrete groups of projective transformations acting on them, and
//! Patterson-Sullivan measure approximations.

pub mod boundary;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod group;
pub mod measures;
pub mod mesh;
pub mod metric;
pub mod projective;
pub mod stats;

pub use error::{HilbertError, Result};
