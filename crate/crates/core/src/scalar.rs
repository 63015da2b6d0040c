//! Floating-point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Sample type for recordings, statistics and learners: `f32` or `f64`.
///
/// `Display` must print the shortest representation that parses back to the
/// same value; both primitive floats satisfy this, which is what makes the
/// CSV writer lossless.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(v: f64) -> Self;

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Widens to `f64` for reporting.
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Sequential sum in index order.
///
/// Every statistic in the crate goes through this so that results do not
/// depend on how callers happen to batch the work.
#[inline]
pub(crate) fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut acc = T::zero();
    for v in values {
        acc += v;
    }
    acc
}

/// Arithmetic mean with one correction pass.
pub(crate) fn mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let n = T::from_count(values.len());
    let first = ordered_sum(values.iter().copied()) / n;
    let residual = ordered_sum(values.iter().map(|&v| v - first)) / n;
    first + residual
}
