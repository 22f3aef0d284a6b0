//! Orbit gluing, shadowing and entropy for symbolic and grid dynamical
//! systems.
//!
//! Everything is computed exactly: symbolic points are eventually periodic,
//! grid systems are finite, and distances are dyadic or grid rationals.

pub mod classify;
pub mod distance;
pub mod entropy;
pub mod error;
pub mod gluing;
pub mod shadowing;
pub mod systems;

pub use distance::{Distance, Rational};
pub use error::{Error, Result};
pub use systems::{Point, System};
