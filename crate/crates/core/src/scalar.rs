//! Floating-point abstraction the numeric code is generic over.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;

/// Scalar type for feature values, model parameters and scores.
///
/// Implemented for `f32` and `f64`. Statistics derived from integer counts
/// (metrics, fitness values) are always computed in `f64` regardless of the
/// dataset scalar.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Sum
    + FromStr
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    /// Lossy cast from `f64`, used for constants and count ratios.
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is convertible to every Scalar")
    }

    /// Widening (for `f32`) or identity (for `f64`) conversion.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("every Scalar is convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
