use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{parse_scalar, ExactScalar};

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExactComplex {
    pub re: ExactScalar,
    pub im: ExactScalar,
}

impl ExactComplex {
    pub fn new(re: ExactScalar, im: ExactScalar) -> Self {
        ExactComplex { re, im }
    }

    pub fn real(re: ExactScalar) -> Self {
        ExactComplex { re, im: ExactScalar::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        ExactComplex::new(ExactScalar::from_integer(re.into()), ExactScalar::from_integer(im.into()))
    }

    pub fn i() -> Self {
        ExactComplex::new(ExactScalar::zero(), ExactScalar::one())
    }

    pub fn conj(&self) -> Self {
        ExactComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `|z|²`, always a nonnegative rational.
    pub fn norm_sqr(&self) -> ExactScalar {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        ExactComplex { re: &self.re * s, im: &self.im * s }
    }

    /// Exact division. Panics on a zero divisor.
    pub fn div(&self, other: &ExactComplex) -> Self {
        let n = other.norm_sqr();
        assert!(!n.is_zero(), "division by zero complex");
        let num = self * &other.conj();
        ExactComplex { re: num.re / &n, im: num.im / n }
    }

    /// Parses the `["re", "im"]` fraction-string pair used by measurement files.
    pub fn parse_pair(re: &str, im: &str) -> Option<Self> {
        Some(ExactComplex::new(parse_scalar(re)?, parse_scalar(im)?))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (super::scalar_to_f64(&self.re), super::scalar_to_f64(&self.im))
    }
}

impl Zero for ExactComplex {
    fn zero() -> Self {
        ExactComplex::default()
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ExactComplex {
    fn one() -> Self {
        ExactComplex::real(ExactScalar::one())
    }
}

impl<'a> Add<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Add for ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: ExactComplex) -> ExactComplex {
        ExactComplex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<'a> Sub<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Sub for ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: ExactComplex) -> ExactComplex {
        ExactComplex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<'a> Mul<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl Mul for ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: ExactComplex) -> ExactComplex {
        &self * &rhs
    }
}

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "{}{:+}i", self.re, self.im)
        }
    }
}

/// Serialized as a pair of exact fraction strings.
impl Serialize for ExactComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.re.to_string(), self.im.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        ExactComplex::parse_pair(&re, &im)
            .ok_or_else(|| serde::de::Error::custom(format!("malformed complex entry [{re:?}, {im:?}]")))
    }
}
