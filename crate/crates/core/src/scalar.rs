//! Floating-point scalar abstraction for the estimator and the
//! distribution oracle.

use num_traits::{Float, FromPrimitive};

/// `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Converts an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    /// Exactly `2^-k`; every `k` in `0..=63` is representable in both
    /// `f32` and `f64`.
    #[inline]
    fn pow2_neg(k: u8) -> Self {
        Self::c(f64::from_bits((1023 - k as u64) << 52))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
