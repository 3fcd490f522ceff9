//! Exact nonnegative rational arithmetic.
//!
//! Probabilities live here so that conservation laws hold with zero
//! tolerance: addition, multiplication, subtraction and comparison never
//! round. Only the transcendental measures (logarithms) leave rational
//! space, and they do so explicitly via [`Rational::ln`] / [`Rational::to_f64`].

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact nonnegative rational, always stored in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<BigUint>);

impl Rational {
    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    /// `num/den`, reduced. Errors if `den == 0`.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRational {
                text: format!("{num}/{den}"),
            });
        }
        Ok(Rational(Ratio::new(BigUint::from(num), BigUint::from(den))))
    }

    pub fn from_integer(n: u64) -> Self {
        Rational(Ratio::from_integer(BigUint::from(n)))
    }

    pub fn from_big(num: BigUint, den: BigUint) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidRational {
                text: format!("{num}/{den}"),
            });
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Multiplicative inverse. Errors on zero.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidRational {
                text: "1/0".into(),
            });
        }
        Ok(Rational(self.0.recip()))
    }

    /// `self - other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &Rational) -> Option<Rational> {
        if self.0 >= other.0 {
            Some(Rational(self.0.clone() - other.0.clone()))
        } else {
            None
        }
    }

    /// Nearest double. Large numerators/denominators fall back to a
    /// logarithmic route instead of overflowing to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let n = self.0.numer().to_f64();
        let d = self.0.denom().to_f64();
        match (n, d) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d > 0.0 => n / d,
            _ => self.ln().exp(),
        }
    }

    /// Natural logarithm. Requires `self > 0`; the caller guards zero.
    pub fn ln(&self) -> f64 {
        assert!(!self.is_zero(), "ln of zero rational");
        big_ln(self.0.numer()) - big_ln(self.0.denom())
    }
}

/// ln of an arbitrary-precision positive integer, accurate to ~1 ulp.
fn big_ln(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        (n.to_u64().expect("fits in u64") as f64).ln()
    } else {
        let shift = bits - 53;
        let top = (n >> shift).to_u64().expect("top 53 bits fit");
        (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rational({self})")
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational { text: s.into() };
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let num = BigUint::from_str(n.trim()).map_err(|_| bad())?;
                let den = BigUint::from_str(d.trim()).map_err(|_| bad())?;
                Rational::from_big(num, den)
            }
            None => {
                let num = BigUint::from_str(s).map_err(|_| bad())?;
                Ok(Rational(Ratio::from_integer(num)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
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
        impl<'a> $trait<&'a Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Mul, mul);

impl Sub for Rational {
    type Output = Rational;
    /// Panics if the result would be negative, like unsigned integer
    /// subtraction. Use [`Rational::checked_sub`] when underflow is possible.
    fn sub(self, rhs: Rational) -> Rational {
        self.checked_sub(&rhs)
            .expect("rational subtraction underflow")
    }
}

impl<'a> Sub<&'a Rational> for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &'a Rational) -> Rational {
        self.checked_sub(rhs)
            .expect("rational subtraction underflow")
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl<'a> AddAssign<&'a Rational> for Rational {
    fn add_assign(&mut self, rhs: &'a Rational) {
        self.0 += &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}
