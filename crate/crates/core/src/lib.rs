//! Computational geometry of finite CAT(0) cube complexes.
//!
//! * [`complex`]: cube complexes, validation, built-in generators.
//! * [`geometry`]: orthant-space geodesics, subdivision distances in whole
//!   complexes, barycenters of finite measures.
//! * [`tangent`]: tangent cones, the coordinate embedding of a cone and its
//!   distortion reports.
//! * [`delta`]: the Izeki-Nayatani invariant of a finite measure as a Gram
//!   matrix program.
//! * [`spectral`]: graph spectral gap and Wang's nonlinear spectral gap.
//! * [`harness`]: random regular graphs, uniform embedding moduli and the
//!   expander obstruction experiment.

pub mod complex;
pub mod delta;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod spectral;
pub mod tangent;

pub use error::{Error, Result};
