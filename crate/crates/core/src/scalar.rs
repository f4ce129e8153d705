//! Scalar abstraction for scores.
//!
//! Every scorer in this crate is a ratio of two non-negative integers
//! (pixel error over its maximum, LCS length over sequence length,
//! intersection over union). Computing the ratio once, at the end, in a
//! caller-chosen scalar type lets the same code produce `f64` scores for
//! the protocol and exact rationals for oracle checks.

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use std::fmt::Debug;

/// A number type a score can be expressed in.
pub trait Scalar: Num + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive {
    /// `num / den`. `den` must be non-zero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        num as f64 / den as f64
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        (num as f64 / den as f64) as f32
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as i64, den as i64)
    }
}

impl Scalar for Ratio<i128> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as i128, den as i128)
    }
}
