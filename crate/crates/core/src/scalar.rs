//! Scalar abstraction for prices, values and probabilities.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used for every price, value and probability.
///
/// Implemented for `f32` and `f64`. Integer quantities (item counts, matroid
/// ranks, truncated-geometric exponents) stay integral and never go through
/// this trait.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Default comparison slack for this precision.
    fn default_eps() -> Self;

    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn default_eps() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn default_eps() -> Self {
        1e-4
    }
}

/// Sums in slice order. Used wherever reproducibility across thread counts
/// matters: parallel stages collect into a vector first, then reduce here.
pub fn ordered_sum<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    xs.into_iter().fold(T::zero(), |acc, x| acc + x)
}
