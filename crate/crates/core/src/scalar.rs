//! Scalar abstraction for the numeric core.
//!
//! Every height, field value and coordinate in this crate is generic over a
//! floating-point scalar. `f64` is the working precision (the crate root
//! exposes `f64` aliases for all public types); `f32` is supported for
//! callers that trade accuracy for memory. Geometric predicates always run
//! in `f64`: the `f32 -> f64` conversion is exact per IEEE 754, so lifting
//! coordinates loses nothing.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::distr::uniform::SampleUniform;

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + FromStr<Err: Debug + Display>
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless for `f64`; rounds to nearest for `f32`.
    fn of_f64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to any Scalar")
    }

    /// Exact widening (both supported scalars embed into `f64`).
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("Scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sign with the convention `sign_of(0) = 0`, which is the only choice that
/// keeps signed facet fluxes antisymmetric on axis-aligned edges.
pub fn sign_of<S: Scalar>(x: S) -> S {
    if x > S::zero() {
        S::one()
    } else if x < S::zero() {
        -S::one()
    } else {
        S::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_convention_at_zero() {
        assert_eq!(sign_of(0.0f64), 0.0);
        assert_eq!(sign_of(-3.5f64), -1.0);
        assert_eq!(sign_of(2.0f32), 1.0);
    }

    #[test]
    fn f32_round_trips_through_f64() {
        let x = 0.1f32;
        assert_eq!(<f32 as Scalar>::of_f64(x.as_f64()), x);
    }
}
