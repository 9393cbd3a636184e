//! Scalar abstractions.
//!
//! The map algebra, interval sets and the one-dimensional tiling machinery
//! only need an ordered field, so they are written against [`Scalar`]. That
//! covers `f32`, `f64` and exact big rationals. Anything that needs square
//! roots (singular values, Euclidean norms) asks for [`Real`] instead.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// An ordered field element usable throughout the exact and floating paths.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance used for equality and sign decisions.
    /// Zero for exact types.
    fn tolerance() -> Self;

    /// Lossy conversion used when handing values to raster code.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::zero)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap() / Self::from_i64(den).unwrap()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Floating point scalars.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_exact() {
        let third = BigRational::from_ratio(1, 3);
        let sum = third.clone() + third.clone() + third;
        assert_eq!(sum, BigRational::from_integer(1.into()));
        assert!(BigRational::tolerance().is_negligible());
        assert!(!BigRational::from_ratio(1, 1_000_000_000).is_negligible());
    }

    #[test]
    fn float_tolerance() {
        assert!(1e-13f64.is_negligible());
        assert!(!1e-9f64.is_negligible());
        assert_eq!(f64::max_of(1.0, 2.0), 2.0);
        assert_eq!(<f64 as Scalar>::from_ratio(13, 20), 0.65);
    }
}
