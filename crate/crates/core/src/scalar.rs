//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything numerical in this crate (windows, transforms, the metaplectic
/// operator, the solver) is written against this trait. Tolerances that only
/// make sense at a given precision live here as associated constants.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Sum
{
    /// Residual bound accepted when certifying an eigenvector of the Zauner unitary.
    const EIGEN_RESIDUAL_TOL: Self;

    /// Lossless-enough conversion from `f64` for literals.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $eig:expr) => {
        impl Real for $t {
            const EIGEN_RESIDUAL_TOL: Self = $eig;
        }
    };
}

impl_real!(f64, 1e-8);
impl_real!(f32, 1e-4);
