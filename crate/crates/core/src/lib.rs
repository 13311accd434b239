//! Numerics for Orlicz-Lorentz function and sequence spaces on step functions.
//!
//! Everything is built from one representation: nonnegative step functions
//! with finitely many cells on an interval `(0, a)`, `a <= inf`. Modulars,
//! Luxemburg and Amemiya norms, decreasing rearrangements, and the envelope
//! functional over the submajorization cone all reduce to exact finite sums
//! over merged cell breakpoints; there is no quadrature anywhere. Solvers
//! (bisection, golden section, a log-barrier interior method) carry explicit
//! tolerances and report certified bounds where they apply.

pub mod duality;
pub mod envelope;
pub mod error;
pub mod ext_real;
pub mod modular;
pub mod oracle;
pub mod orlicz;
pub mod rearrange;
pub mod scalar;
pub mod solve;
pub mod step;
pub mod weight;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use orlicz::OrliczFn;
pub use rearrange::Permutation;
pub use scalar::Real;
pub use step::{Seq, StepFn};
pub use weight::Weight;

/// Concrete aliases for the default double-precision scalar.
pub type ExtReal64 = ExtReal<f64>;
pub type StepFn64 = StepFn<f64>;
pub type Seq64 = Seq<f64>;
pub type OrliczFn64 = OrliczFn<f64>;
pub type Weight64 = Weight<f64>;
