//! Finite-difference wave propagation with wavefront temporal blocking that
//! stays legal in the presence of off-the-grid sources and receivers.

pub mod bench;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fd;
pub mod grid;
pub mod physics;
pub mod precompute;
pub mod real;
pub mod schedule;
pub mod sparse;

pub use error::{Error, Result};
pub use real::Real;
