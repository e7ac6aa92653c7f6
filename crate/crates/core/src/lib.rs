//! Path probabilities built from real-weighted sums over nearby paths.

pub mod composition;
pub mod distance;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod minkowski;
pub mod path;
pub mod screen;
pub mod toy;

pub use error::{Error, Result};
