//! Operation-counting scalar.
//!
//! [`Counted`] wraps an `f64` and bumps a thread-local counter on every
//! arithmetic operation or math function. Running generic code with
//! `T = Counted` measures how many floating-point operations it performs;
//! copies, comparisons and constant construction are free.

use std::cell::Cell;
use std::fmt;
use std::iter::Sum;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, Signed, ToPrimitive, Zero};

use crate::scalar::Real;

thread_local! {
    static FLOPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn tick() {
    FLOPS.with(|c| c.set(c.get() + 1));
}

/// Floating-point operations performed on this thread so far.
pub fn flop_count() -> u64 {
    FLOPS.with(Cell::get)
}

/// Runs `f` and returns its result with the number of operations it used.
pub fn count_flops<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = flop_count();
    let r = f();
    (r, flop_count() - before)
}

#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Counted(pub f64);

impl fmt::Debug for Counted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for Counted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $tr for Counted {
            type Output = Counted;
            #[inline]
            fn $m(self, rhs: Counted) -> Counted {
                tick();
                Counted(self.0 $op rhs.0)
            }
        }
        impl $atr for Counted {
            #[inline]
            fn $am(&mut self, rhs: Counted) {
                tick();
                self.0 = self.0 $op rhs.0;
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);
binop!(Mul, mul, MulAssign, mul_assign, *);
binop!(Div, div, DivAssign, div_assign, /);
binop!(Rem, rem, RemAssign, rem_assign, %);

impl Neg for Counted {
    type Output = Counted;
    #[inline]
    fn neg(self) -> Counted {
        tick();
        Counted(-self.0)
    }
}

impl Sum for Counted {
    fn sum<I: Iterator<Item = Counted>>(iter: I) -> Counted {
        iter.fold(Counted(0.0), |a, b| a + b)
    }
}

impl Zero for Counted {
    fn zero() -> Self {
        Counted(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

impl One for Counted {
    fn one() -> Self {
        Counted(1.0)
    }
}

impl Num for Counted {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Counted)
    }
}

impl ToPrimitive for Counted {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0)
    }
}

impl FromPrimitive for Counted {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Counted(n as f64))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Counted(n as f64))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Counted(n))
    }
}

impl NumCast for Counted {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(Counted)
    }
}

impl Signed for Counted {
    fn abs(&self) -> Self {
        tick();
        Counted(self.0.abs())
    }
    fn abs_sub(&self, other: &Self) -> Self {
        tick();
        Counted((self.0 - other.0).max(0.0))
    }
    fn signum(&self) -> Self {
        Counted(self.0.signum())
    }
    fn is_positive(&self) -> bool {
        self.0 > 0.0
    }
    fn is_negative(&self) -> bool {
        self.0 < 0.0
    }
}

macro_rules! consts {
    ($($name:ident),*) => {
        $(fn $name() -> Self { Counted(f64::$name()) })*
    };
}

impl FloatConst for Counted {
    consts!(E, FRAC_1_PI, FRAC_1_SQRT_2, FRAC_2_PI, FRAC_2_SQRT_PI, FRAC_PI_2, FRAC_PI_3,
        FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, LN_10, LN_2, LOG10_E, LOG2_E, PI, SQRT_2);
}

macro_rules! unary {
    ($($name:ident),*) => {
        $(#[inline] fn $name(self) -> Self { tick(); Counted(self.0.$name()) })*
    };
}

macro_rules! binary {
    ($($name:ident),*) => {
        $(#[inline] fn $name(self, o: Self) -> Self { tick(); Counted(self.0.$name(o.0)) })*
    };
}

macro_rules! predicate {
    ($($name:ident),*) => {
        $(#[inline] fn $name(self) -> bool { self.0.$name() })*
    };
}

impl Float for Counted {
    fn nan() -> Self {
        Counted(f64::NAN)
    }
    fn infinity() -> Self {
        Counted(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Counted(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Counted(-0.0)
    }
    fn min_value() -> Self {
        Counted(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Counted(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Counted(f64::MAX)
    }
    fn epsilon() -> Self {
        Counted(f64::EPSILON)
    }
    predicate!(is_nan, is_infinite, is_finite, is_normal, is_sign_positive, is_sign_negative);
    fn classify(self) -> FpCategory {
        self.0.classify()
    }
    unary!(floor, ceil, round, trunc, fract, abs, signum, recip, sqrt, exp, exp2, ln, log2,
        log10, cbrt, sin, cos, tan, asin, acos, atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh,
        acosh, atanh);
    binary!(powf, log, hypot, atan2);
    #[allow(deprecated)]
    fn abs_sub(self, o: Self) -> Self {
        tick();
        Counted((self.0 - o.0).max(0.0))
    }
    fn max(self, o: Self) -> Self {
        Counted(self.0.max(o.0))
    }
    fn min(self, o: Self) -> Self {
        Counted(self.0.min(o.0))
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        tick();
        tick();
        Counted(self.0.mul_add(a.0, b.0))
    }
    fn powi(self, n: i32) -> Self {
        tick();
        Counted(self.0.powi(n))
    }
    fn sin_cos(self) -> (Self, Self) {
        tick();
        tick();
        let (s, c) = self.0.sin_cos();
        (Counted(s), Counted(c))
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0)
    }
}

impl Real for Counted {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_arithmetic_not_copies() {
        let a = Counted(1.5);
        let b = Counted(2.0);
        let (_, n) = count_flops(|| {
            let c = a;
            let _ = c < b;
            let _ = Counted::one();
        });
        assert_eq!(n, 0);
        let (v, n) = count_flops(|| (a * b + a).sqrt());
        assert_eq!(n, 3);
        assert!((v.0 - 4.5f64.sqrt()).abs() < 1e-15);
    }
}
