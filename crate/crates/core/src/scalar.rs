//! Scalar abstraction over the two supported precisions.
//!
//! The pipeline runs in `f32`; verification (finite-difference gradient
//! checks) instantiates the identical code paths with `f64` for headroom.
//! Reductions that feed person counts always accumulate in `f64` regardless
//! of the tensor scalar type.

use num_traits::Float;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

pub trait Scalar:
    Float
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Bit width, used to pick finite-difference step sizes in tests.
    const BITS: u32;

    fn of(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    const BITS: u32 = 32;

    #[inline(always)]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const BITS: u32 = 64;

    #[inline(always)]
    fn of(v: f64) -> Self {
        v
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Sum a slice in 64-bit regardless of the element precision.
pub fn sum_f64<S: Scalar>(xs: &[S]) -> f64 {
    xs.iter().fold(0.0f64, |acc, &x| acc + x.as_f64())
}
