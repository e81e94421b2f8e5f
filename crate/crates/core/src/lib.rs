//! Harmonic deformation of Delaunay triangulations on periodic point samples.
//!
//! The crate samples point configurations, builds their periodic Delaunay
//! graphs with Voronoi facet data, relaxes surfaces with the zero-temperature
//! harness process, solves directly for harmonic surfaces of prescribed
//! tilt, and verifies the exact finite-sample identities relating tilt,
//! energy and divergence-free fluxes. Random-walk diagnostics cover the
//! martingale property of the deformed graph and the moment bounds of the
//! uniformized walk.
//!
//! All numeric types are generic over the scalar (`f32` or `f64`); the
//! aliases at the crate root fix the working precision to `f64`.

pub mod error;
pub mod energy;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod pointprocess;
pub mod randomwalk;
pub mod render;
pub mod rng;
pub mod scalar;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// `f64` working-precision aliases.
pub type PointSet = pointprocess::PointSet<f64>;
pub type DelaunayGraph = geometry::DelaunayGraph<f64>;
pub type VoronoiLocator = geometry::VoronoiLocator<f64>;
pub type Surface = fields::Surface<f64>;
pub type EdgeField = fields::EdgeField<f64>;
pub type HarnessState = harness::HarnessState<f64>;
pub type DeformedGraph = solver::DeformedGraph<f64>;
pub type WalkTrace = randomwalk::WalkTrace<f64>;
