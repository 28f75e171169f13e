//! Path-sum amplitudes of multi-slit optical systems, their exact image as a
//! two-layer complex-exponential network, gradient training of slit positions,
//! and closed-form action integrals checked against numerical integration.

pub mod actions;
pub mod amplitude;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod neural_map;
pub mod summation;
pub mod training;

pub use amplitude::{Amplitude, ActionSample};
pub use error::{Error, Result};
pub use geometry::{Barrier, MediumVector, Path, PathSet, Point, SlitGeometry};
pub use neural_map::{Activation, ClassicalTwoLayerNet};
