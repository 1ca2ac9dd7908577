//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar used by designs, fits and metrics.
///
/// Implemented for `f32` and `f64`. Tolerances that depend on the working
/// precision are exposed as associated functions so algorithms stay generic.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Relative pivot tolerance for rank decisions in orthogonal decompositions.
    fn pivot_tolerance() -> Self;

    /// Coefficients below this magnitude are snapped to exactly zero.
    fn zero_snap() -> Self;

    /// Lossy conversion from `f64`; every finite `f64` maps to a finite value or infinity.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion is infallible for float types")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize conversion is infallible for float types")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float to f64 conversion is infallible")
    }
}

impl Real for f64 {
    fn pivot_tolerance() -> Self {
        1e-10
    }

    fn zero_snap() -> Self {
        1e-10
    }
}

impl Real for f32 {
    // 1e-10 is below f32 resolution; scale to a few hundred ulps instead.
    fn pivot_tolerance() -> Self {
        1e-5
    }

    fn zero_snap() -> Self {
        1e-6
    }
}

/// Adds positive zero so that `-0.0` never leaks into formatted output.
#[inline]
pub fn canonical_zero<T: Real>(v: T) -> T {
    v + T::zero()
}
