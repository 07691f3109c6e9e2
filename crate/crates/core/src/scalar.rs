//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar usable by the transforms and solvers.
///
/// `f32` and `f64` implement it. The acceptance tolerances of the
/// laboratory (1e-10 and below) are only reachable with `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + FftNum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute value (`Float` and `Signed` both define `abs`).
    #[inline]
    fn magnitude(self) -> Self {
        <Self as Float>::abs(self)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}
