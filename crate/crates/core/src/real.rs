//! Scalar abstraction shared by every numeric module.
//!
//! All kernels are generic over [`Real`] so the same code runs in `f32`
//! and `f64`. Experiments and the command-line front end pin `f64`; the
//! stated tolerances assume it.

use core::fmt::{Debug, Display, LowerExp};
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar with the conversions the kernels need.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal.
    fn num(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    /// Conversion from a count or index. Exact while the value fits the
    /// significand (2^53 in f64), which covers every count used here.
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count fits the scalar range")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::num(0.5), 0.5);
        assert_eq!(f32::num(0.25), 0.25f32);
        assert_eq!(f64::count(1_000_000), 1.0e6);
    }
}
