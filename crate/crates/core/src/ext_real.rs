//! Nonnegative extended reals `[0, inf]` with the convention `0 * inf = 0`.
//!
//! The convention is what makes expressions like `phi(|f|/v) * v` total: a
//! vanishing weight cell contributes nothing where `f` vanishes and infinity
//! where it does not. Plain IEEE arithmetic would produce NaN instead.

use crate::scalar::{wide, Real};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

/// A nonnegative real number or `inf`. Never NaN, never negative.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal<R>(R);

impl<R: Real> ExtReal<R> {
    /// Wraps a finite-or-infinite nonnegative value.
    ///
    /// Panics on NaN or negative input; constructors of the public types
    /// sanitize their data, so reaching the panic indicates a logic error.
    #[inline]
    pub fn new(x: R) -> Self {
        assert!(!x.is_nan(), "ExtReal cannot hold NaN");
        assert!(x >= R::zero(), "ExtReal cannot hold a negative value");
        ExtReal(x)
    }

    #[inline]
    pub fn zero() -> Self {
        ExtReal(R::zero())
    }

    #[inline]
    pub fn infinity() -> Self {
        ExtReal(R::infinity())
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Raw value; `R::infinity()` in the infinite case.
    #[inline]
    pub fn value(self) -> R {
        self.0
    }

    /// Finite value or `None`.
    #[inline]
    pub fn finite(self) -> Option<R> {
        self.0.is_finite().then_some(self.0)
    }

    #[inline]
    pub fn max(self, other: Self) -> Self {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    /// Relative gap `|a - b| / (1 + max(a, b))`, infinite iff exactly one
    /// side is infinite. Used by tests and report rows.
    pub fn rel_gap(self, other: Self) -> R {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => R::zero(),
            (false, false) => {
                (self.0 - other.0).abs() / (R::one() + self.0.max(other.0))
            }
            _ => R::infinity(),
        }
    }
}

impl<R: Real> Add for ExtReal<R> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        ExtReal(self.0 + rhs.0)
    }
}

impl<R: Real> AddAssign for ExtReal<R> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.0 = self.0 + rhs.0;
    }
}

impl<R: Real> Mul for ExtReal<R> {
    type Output = Self;
    /// Product with `0 * inf = 0`.
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.0 == R::zero() || rhs.0 == R::zero() {
            return ExtReal(R::zero());
        }
        ExtReal(self.0 * rhs.0)
    }
}

impl<R: Real> Sum for ExtReal<R> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtReal::zero(), |acc, x| acc + x)
    }
}

impl<R: Real> From<R> for ExtReal<R> {
    fn from(x: R) -> Self {
        ExtReal::new(x)
    }
}

impl<R: Real> fmt::Debug for ExtReal<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl<R: Real> fmt::Display for ExtReal<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl<R: Real> Serialize for ExtReal<R> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(wide(self.0))
        }
    }
}

struct ExtRealVisitor<R>(std::marker::PhantomData<R>);

impl<'de, R: Real> Visitor<'de> for ExtRealVisitor<R> {
    type Value = ExtReal<R>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a nonnegative number or the string \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        if v.is_nan() || v < 0.0 {
            return Err(E::custom(format!("not a nonnegative number: {v}")));
        }
        Ok(ExtReal(crate::scalar::lit(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        if v == "inf" {
            Ok(ExtReal::infinity())
        } else {
            Err(E::custom(format!("unknown token {v:?}, expected \"inf\"")))
        }
    }
}

impl<'de, R: Real> Deserialize<'de> for ExtReal<R> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtRealVisitor(std::marker::PhantomData))
    }
}
