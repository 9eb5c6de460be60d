//! Exact rational and dyadic-rational arithmetic.
//!
//! [`Rational`] is a thin wrapper around an arbitrary-precision ratio that
//! pins down the serialized form (`m/n`, always with an explicit
//! denominator). [`DyadicRational`] is a mantissa/exponent pair `m/2^k`.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// An exact rational number in canonical form (gcd 1, positive denominator).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`; panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Rational(BigRational::new(BigInt::one(), BigInt::one() << k as usize))
    }

    /// `2^k`.
    pub fn pow2(k: u32) -> Self {
        Rational(BigRational::from_integer(BigInt::one() << k as usize))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Halve in place; cheaper than a generic division.
    pub fn halve(&mut self) {
        self.0 = &self.0 / BigInt::from(2);
    }

    /// True when the denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        let den = self.0.denom();
        den.is_one() || {
            let (sign, bytes) = den.to_bytes_le();
            sign == Sign::Plus && {
                // power of two: exactly one set bit overall
                let ones: u32 = bytes.iter().map(|b| b.count_ones()).sum();
                ones == 1
            }
        }
    }

    /// Exact conversion to mantissa/exponent form, if the value is dyadic.
    pub fn to_dyadic(&self) -> Option<DyadicRational> {
        if !self.is_dyadic() {
            return None;
        }
        let exp = self.0.denom().bits().saturating_sub(1) as u32;
        Some(DyadicRational::new(self.0.numer().clone(), exp))
    }

    /// Least integer `>= self / 2^-g`, used for grid enumeration.
    pub fn grid_ceil(&self, g: u32) -> BigInt {
        let scaled = &self.0 * BigRational::from_integer(BigInt::one() << g as usize);
        scaled.ceil().to_integer()
    }

    /// Greatest integer `<= self / 2^-g`.
    pub fn grid_floor(&self, g: u32) -> BigInt {
        let scaled = &self.0 * BigRational::from_integer(BigInt::one() << g as usize);
        scaled.floor().to_integer()
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(num, den))
    }
}

impl fmt::Display for Rational {
    /// Canonical text form `m/n`, denominator always present.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Error parsing a rational or dyadic literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad rational literal {input:?}: {reason}")]
pub struct NumberParseError {
    pub input: String,
    pub reason: &'static str,
}

impl FromStr for Rational {
    type Err = NumberParseError;

    /// Accepts `m/n` or a bare integer `m`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason| NumberParseError {
            input: s.to_string(),
            reason,
        };
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num.trim()).map_err(|_| bad("numerator is not an integer"))?;
        let den =
            BigInt::from_str(den.trim()).map_err(|_| bad("denominator is not an integer"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        let mut acc = BigRational::zero();
        for x in iter {
            acc += x.0;
        }
        Rational(acc)
    }
}

/// A dyadic rational `mantissa / 2^exponent` in canonical form: the mantissa
/// is odd unless the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(mantissa: impl Into<BigInt>, exponent: u32) -> Self {
        let mut d = DyadicRational {
            mantissa: mantissa.into(),
            exponent,
        };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        while self.exponent > 0 && (&self.mantissa & BigInt::one()).is_zero() {
            self.mantissa >>= 1;
            self.exponent -= 1;
        }
    }

    pub fn zero() -> Self {
        DyadicRational::new(0, 0)
    }

    pub fn one() -> Self {
        DyadicRational::new(1, 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Lossless conversion to a general rational.
    pub fn to_rational(&self) -> Rational {
        Rational::from_big(self.mantissa.clone(), BigInt::one() << self.exponent as usize)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        // compare m1/2^a with m2/2^b by cross-shifting to a common exponent
        let e = self.exponent.max(other.exponent);
        let lhs = &self.mantissa << (e - self.exponent) as usize;
        let rhs = &other.mantissa << (e - other.exponent) as usize;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for DyadicRational {
    /// Canonical text form `m/2^k`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for DyadicRational {
    type Err = NumberParseError;

    /// Accepts `m/2^k`, or any rational literal whose denominator is a power
    /// of two (`3/8`, `1`, `1/2`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason| NumberParseError {
            input: s.to_string(),
            reason,
        };
        if let Some((m, rest)) = s.split_once("/2^") {
            let mantissa =
                BigInt::from_str(m.trim()).map_err(|_| bad("mantissa is not an integer"))?;
            let exponent =
                u32::from_str(rest.trim()).map_err(|_| bad("exponent is not a small integer"))?;
            return Ok(DyadicRational::new(mantissa, exponent));
        }
        let r = Rational::from_str(s)?;
        r.to_dyadic().ok_or_else(|| bad("denominator is not a power of two"))
    }
}
