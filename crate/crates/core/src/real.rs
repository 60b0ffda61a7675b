//! Scalar abstraction: every numerical routine in this crate is generic over
//! [`Real`], which is satisfied by `f32` and `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable throughout the crate (`f32` or `f64`).
///
/// The bound set is wide enough for FFTs (`rustfft::FftNum`), literal
/// conversion from `f64`, and text round-tripping for CSV output.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Display
    + LowerExp
    + Debug
    + FromStr
    + Sum
    + 'static
{
    /// Convert an `f64` literal. Panics only if the target type cannot
    /// represent any finite value of the argument, which does not happen
    /// for f32/f64.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal conversion")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("conversion to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + rustfft::FftNum
        + Display
        + LowerExp
        + Debug
        + FromStr
        + Sum
        + 'static
{
}
