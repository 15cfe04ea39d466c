//! Scalar abstractions.
//!
//! The rank estimators only need ordering, field arithmetic and the ability to
//! build a value from an integer ratio, so they are generic over [`Scalar`] and
//! run unchanged on `f32`, `f64` and exact rationals. Everything that needs
//! square roots or eigendecompositions (projections, bootstrap, covariance)
//! is generic over [`Real`], which is implemented for the IEEE float types.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, ToPrimitive};

/// Ordered field element usable for observations and effect estimates.
pub trait Scalar: Clone + PartialOrd + Num + Debug + Send + Sync + 'static {
    /// The value `num / den`. `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy conversion for reporting.
    fn as_f64(&self) -> f64;

    /// False for NaN and infinities.
    fn finite(&self) -> bool;
}

/// Floating-point scalar with the linear algebra needed by the inference layer.
pub trait Real: Scalar + nalgebra::RealField + Copy {
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn as_f64(&self) -> f64 {
        *self as f64
    }
    fn finite(&self) -> bool {
        f32::is_finite(*self)
    }
}

impl Real for f64 {}
impl Real for f32 {}

impl Scalar for Rational64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn finite(&self) -> bool {
        true
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn finite(&self) -> bool {
        true
    }
}
