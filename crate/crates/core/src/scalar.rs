//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Real floating-point scalar: `f32`, `f64`, or an instrumented wrapper.
///
/// The bound set is the union of what the numeric code needs and what
/// `rustfft::FftNum` requires, so any `Real` can be fed to the FFT backend.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Signed
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, panicking only for types that cannot
    /// represent finite doubles at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar type cannot represent f64 literal")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("scalar type cannot represent integer")
    }

    /// Tolerance for residues that are zero in exact arithmetic
    /// (imaginary part of a symmetric IDFT, and similar).
    #[inline]
    fn residue_tol() -> Self {
        Self::epsilon() * Self::lit(4096.0)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `cos` and `sin` of `pi * num / den` with the numerator reduced modulo
/// `2 * den` in integer arithmetic before any rounding happens.
pub fn unit_phasor<T: Real>(num: i64, den: i64) -> (T, T) {
    let period = 2 * den;
    let r = num.rem_euclid(period);
    if r == 0 {
        return (T::one(), T::zero());
    }
    if 2 * r == period {
        return (-T::one(), T::zero());
    }
    if 2 * r == den {
        return (T::zero(), T::one());
    }
    if 2 * r == 3 * den {
        return (T::zero(), -T::one());
    }
    // map onto (-den, den] so the angle stays small in magnitude
    let r = if r > den { r - period } else { r };
    let angle = T::PI() * T::lit(r as f64) / T::lit(den as f64);
    (angle.cos(), angle.sin())
}
