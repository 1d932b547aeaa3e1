//! Streaming estimation of the minimum unit-ball cover cardinality in low
//! dimension: shifted-partition estimators built from distinct-element
//! sketches and min-wise sampled window solvers, lattice-cover baselines,
//! exact offline oracles, and instance generators with certified optima.

pub mod error;
pub mod generators;
pub mod geometry;
pub mod harness;
pub mod hashing;
pub mod practical;
pub mod shifting;
pub mod sketches;
pub mod window_solvers;

pub use error::{Error, Result};
pub use geometry::{Norm, Point};
