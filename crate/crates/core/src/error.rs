//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by sampling, geometry construction, solving and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate: too few points ({got} for d={dim})")]
    TooFewPoints { dim: usize, got: usize },

    #[error("box too small for periodic quotient: vertex {vertex} neighbors its own translate")]
    BoxTooSmall { vertex: usize },

    #[error("coordinate out of box: point {index} at {coords} exceeds [0,{len}) in periodic mode")]
    OutOfBox {
        index: usize,
        coords: String,
        len: f64,
    },

    #[error("duplicate point: indices {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },

    #[error("palm mode requires a point at the origin (none within {tol})")]
    MissingOrigin { tol: f64 },

    #[error("facet measures require periodic mode")]
    PlanarFacets,

    #[error("identity requires translation-invariant surface (tilt must be zero)")]
    TiltedSurface,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("not converged after {iterations} iterations (residual {residual:e}, tol {tol:e})")]
    NotConverged {
        iterations: u64,
        residual: f64,
        tol: f64,
    },

    #[error("edge {a}-{b} has fewer than two common neighbors in the graph")]
    MissingFlank { a: usize, b: usize },

    #[error("axis index {axis} out of range for d={dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("metadata: {0}")]
    Metadata(String),
}

pub type Result<T> = std::result::Result<T, Error>;
