//! Scalar fields the polynomial layer is generic over.
//!
//! `f32` and `f64` are the usual floating modes, `BigRational` is the exact
//! mode, and [`Wide`] is a fixed-width binary float used where double
//! precision cannot resolve the roots of a high-degree polynomial.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Real scalar usable as the component type of polynomial coefficients.
pub trait Real:
    Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Zero tests are exact in this field.
    const EXACT: bool;
    /// Unit roundoff; zero for exact fields.
    const EPS: f64;

    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Real for f64 {
    const EXACT: bool = false;
    const EPS: f64 = f64::EPSILON;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for f32 {
    const EXACT: bool = false;
    const EPS: f64 = f32::EPSILON as f64;

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn from_i64(n: i64) -> Self {
        n as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Real for BigRational {
    const EXACT: bool = true;
    const EPS: f64 = 0.0;

    /// Exact binary value of `x`; non-finite input maps to zero.
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Rational to nearest double without overflowing on huge numerators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer() / (r.denom() << shift as usize)
    } else {
        (r.numer() << (-shift) as usize) / r.denom()
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

type Big = FBig<HalfEven, 2>;

/// Binary float with `BITS` bits of significand.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Wide<const BITS: usize>(Big);

impl<const BITS: usize> Wide<BITS> {
    fn wrap(x: Big) -> Self {
        Wide(x.with_precision(BITS).value())
    }
}

impl<const BITS: usize> fmt::Debug for Wide<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wide<{}>({:e})", BITS, self.to_f64())
    }
}

macro_rules! wide_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<const BITS: usize> $tr for Wide<BITS> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                Wide(self.0 $op rhs.0)
            }
        }
    };
}
wide_binop!(Add, add, +);
wide_binop!(Sub, sub, -);
wide_binop!(Mul, mul, *);
wide_binop!(Div, div, /);

impl<const BITS: usize> Rem for Wide<BITS> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self.0.clone() / rhs.0.clone()).trunc();
        Wide(self.0 - q * rhs.0)
    }
}

impl<const BITS: usize> Neg for Wide<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Wide(-self.0)
    }
}

impl<const BITS: usize> Zero for Wide<BITS> {
    fn zero() -> Self {
        Self::wrap(Big::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0.repr().is_zero()
    }
}

impl<const BITS: usize> One for Wide<BITS> {
    fn one() -> Self {
        Self::wrap(Big::ONE)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWideError;

impl fmt::Display for ParseWideError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid wide float literal")
    }
}

impl<const BITS: usize> Num for Wide<BITS> {
    type FromStrRadixErr = ParseWideError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseWideError> {
        if radix != 10 {
            return Err(ParseWideError);
        }
        s.parse::<f64>()
            .map(<Self as Real>::from_f64)
            .map_err(|_| ParseWideError)
    }
}

impl<const BITS: usize> Real for Wide<BITS> {
    const EXACT: bool = false;
    const EPS: f64 = {
        // 2^(1-BITS), clamped to the smallest positive normal double.
        if BITS >= 1022 {
            f64::MIN_POSITIVE
        } else {
            let mut e = 1.0f64;
            let mut i = 1;
            while i < BITS {
                e *= 0.5;
                i += 1;
            }
            e
        }
    };

    fn from_f64(x: f64) -> Self {
        Self::wrap(Big::try_from(x).unwrap_or(Big::ZERO))
    }
    fn from_i64(n: i64) -> Self {
        Self::wrap(Big::from(n))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
}

impl<const BITS: usize> Eq for Wide<BITS> {}

impl<const BITS: usize> Ord for Wide<BITS> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_keeps_precision_through_cancellation() {
        type W = Wide<256>;
        let big = W::from_f64(2f64.powi(120));
        let one = W::one();
        let x = (big.clone() + one.clone()) - big;
        assert_eq!(x.to_f64(), 1.0);
        let third = one.clone() / W::from_i64(3);
        let back = third * W::from_i64(3) - one;
        assert!(back.to_f64().abs() < 1e-70);
    }

    #[test]
    fn wide_eps_matches_bits() {
        assert_eq!(<Wide<53> as Real>::EPS, f64::EPSILON);
        assert!(<Wide<2048> as Real>::EPS > 0.0);
    }

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let n = BigInt::from(3) << 2000usize;
        let d = BigInt::from(2) << 2000usize;
        let r = BigRational::new(n, d);
        assert!((ratio_to_f64(&r) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn wide_rem_is_truncated() {
        type W = Wide<128>;
        let r = W::from_f64(7.5) % W::from_f64(2.0);
        assert_eq!(r.to_f64(), 1.5);
    }
}
