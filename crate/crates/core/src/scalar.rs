//! Scalar abstraction: everything is generic over a floating-point type.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar the whole crate is generic over.
///
/// `f64` is the intended default (see the aliases at the crate root);
/// `f32` works for small instances but cannot represent the deepest cells
/// of the truncated example weights.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Casts an `f64` literal into the generic scalar.
///
/// Panics if the value is not representable, which for the supported float
/// types cannot happen (overflow saturates to infinity).
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Casts a count into the generic scalar.
#[inline]
pub fn count<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("usize must convert into the scalar type")
}

/// Widens a scalar to `f64` for diagnostics and serialization.
#[inline]
pub fn wide<R: Real>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
