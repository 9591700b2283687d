//! Scalar types used for betting functions and measure computations.
//!
//! Everything that must be checked exactly (Kraft sums, fairness, domination)
//! runs on [`Rational`]; floats are there for fast sampling sweeps.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: u64) -> Self;

    /// `2^-exp`.
    fn dyadic(exp: u32) -> Self;

    fn to_f64(&self) -> f64;

    /// `a == b` for exact types, approximate equality for floats.
    fn close(a: &Self, b: &Self) -> bool;

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn dyadic(exp: u32) -> Self {
        (-(exp as f64)).exp2()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn close(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f32 / den as f32
    }
    fn dyadic(exp: u32) -> Self {
        (-(exp as f32)).exp2()
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn close(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= 1e-5 * (1.0 + a.abs().max(b.abs()))
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: u64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }
    fn dyadic(exp: u32) -> Self {
        Ratio::new(BigInt::one(), BigInt::one() << exp)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn close(a: &Self, b: &Self) -> bool {
        a == b
    }
    fn is_negative_value(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(num: i64, den: u64) -> Self {
        Ratio::new(num, den as i64)
    }
    fn dyadic(exp: u32) -> Self {
        Ratio::new(1, 1i64 << exp)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn close(a: &Self, b: &Self) -> bool {
        a == b
    }
}

/// `2^-exp` as an exact rational.
pub fn dyadic(exp: u32) -> Rational {
    <Rational as Scalar>::dyadic(exp)
}

pub fn rational(num: i64, den: u64) -> Rational {
    <Rational as Scalar>::from_ratio(num, den)
}

pub fn rational_from_int(n: u64) -> Rational {
    Ratio::from_integer(BigInt::from(n))
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational, crate::Error> {
    let s = s.trim();
    let bad = || crate::Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Smallest `l` with `2^l >= x`, for positive `x`.
pub fn ceil_log2(x: &Rational) -> u32 {
    assert!(x.is_positive(), "ceil_log2 of nonpositive value");
    let mut l = 0u32;
    let mut p = Rational::one();
    if *x <= p {
        return 0;
    }
    while p < *x {
        p *= rational_from_int(2);
        l += 1;
    }
    l
}
