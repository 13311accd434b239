//! Bracketed one-dimensional solvers shared by the norm and duality code.
//!
//! All routines work on monotone or unimodal maps, expand their brackets
//! geometrically, and stop on a relative tolerance. Unimodal scans cap the
//! expansion at a factor of 2^60 and declare divergence there; monotone
//! bracket searches get enough steps to cross the whole double-precision
//! exponent range, so they terminate on the map's own behavior.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scalar::{lit, Real};

/// Cap on the geometric scan range for unimodal maps: 60 doublings.
pub const MAX_DOUBLINGS: usize = 60;

/// Step cap for monotone bracket expansion. 1100 halvings walk a unit guess
/// below the smallest subnormal, so a bracket loop only hits this cap when
/// the map violates its monotonicity contract.
const MAX_BRACKET_STEPS: usize = 1100;

/// Infimum of `{ e > 0 : h(e) <= 1 }` for a nonincreasing map `h`.
///
/// This is the Luxemburg-style threshold. Returns infinity when `h` stays
/// above 1 through the expansion cap, and 0 when `h <= 1` persists down to
/// the shrink cap (which callers rule out by handling the zero function
/// upfront). The result `e` satisfies `h(e) <= 1` and is within
/// `rel_tol * e` of the infimum.
pub fn threshold_nonincreasing<R: Real>(
    h: impl Fn(R) -> ExtReal<R>,
    guess: R,
    rel_tol: R,
) -> ExtReal<R> {
    let one = ExtReal::new(R::one());
    let two = lit::<R>(2.0);
    debug_assert!(guess > R::zero() && guess.is_finite());

    let mut hi = guess;
    let mut doublings = 0usize;
    while h(hi) > one {
        hi = hi * two;
        doublings += 1;
        if doublings > MAX_BRACKET_STEPS {
            return ExtReal::infinity();
        }
    }

    let mut lo = hi / two;
    let mut halvings = 0usize;
    while h(lo) <= one {
        hi = lo;
        lo = lo / two;
        halvings += 1;
        if halvings > MAX_BRACKET_STEPS {
            return ExtReal::zero();
        }
    }

    // Invariant: h(hi) <= 1 < h(lo). The gap target scales with hi alone so
    // thresholds far below 1 still come out with full relative accuracy.
    while hi - lo > rel_tol * hi {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break; // floating-point resolution reached
        }
        if h(mid) <= one {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ExtReal::new(hi)
}

/// Root of `h(x) = target` for a nonincreasing `h` on `(0, inf)`.
///
/// Used to tune Lagrange multipliers. Errors if no sign change is found
/// within the expansion cap.
pub fn root_nonincreasing<R: Real>(
    h: impl Fn(R) -> ExtReal<R>,
    target: R,
    guess: R,
    rel_tol: R,
) -> Result<R> {
    let target = ExtReal::new(target);
    let two = lit::<R>(2.0);
    let mut lo = guess;
    let mut hi = guess;
    let mut n = 0usize;
    while h(lo) < target {
        lo = lo / two;
        n += 1;
        if n > MAX_BRACKET_STEPS {
            return Err(Error::NonConvergence(
                "no lower bracket for the multiplier equation".into(),
            ));
        }
    }
    n = 0;
    while h(hi) > target {
        hi = hi * two;
        n += 1;
        if n > MAX_BRACKET_STEPS {
            return Err(Error::NonConvergence(
                "no upper bracket for the multiplier equation".into(),
            ));
        }
    }
    // Invariant: h(lo) >= target >= h(hi).
    while hi - lo > rel_tol * hi {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) / two)
}

/// Outcome of maximizing a concave map over `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupResult<R> {
    /// Supremum attained (or approached) at `arg` with the given value.
    Finite { arg: R, value: R },
    /// The map still grows at the expansion cap; the supremum is infinite.
    Diverges,
}

/// Supremum of a concave map `g` with `g(0) = 0` over `s >= 0`.
///
/// Scans a geometric grid for the unimodal peak, then refines by golden
/// section. Declares divergence when the grid maximum sits at the 2^60 cap.
pub fn sup_concave<R: Real>(g: impl Fn(R) -> R, rel_tol: R) -> SupResult<R> {
    let two = lit::<R>(2.0);
    let mut best_arg = R::zero();
    let mut best_val = R::zero();
    let mut s = lit::<R>(2.0f64.powi(-40));
    let mut at_cap = false;
    for i in 0..(40 + MAX_DOUBLINGS + 1) {
        let v = g(s);
        if v > best_val {
            best_val = v;
            best_arg = s;
            at_cap = i == 40 + MAX_DOUBLINGS;
        }
        s = s * two;
    }
    if at_cap {
        return SupResult::Diverges;
    }
    if best_val <= R::zero() {
        return SupResult::Finite {
            arg: R::zero(),
            value: R::zero(),
        };
    }
    let (arg, value) = golden_max(&g, best_arg / two, best_arg * two, rel_tol);
    SupResult::Finite { arg, value }
}

/// Golden-section maximization of a unimodal map on `[a, b]`.
pub fn golden_max<R: Real>(g: &impl Fn(R) -> R, a: R, b: R, rel_tol: R) -> (R, R) {
    let (arg, neg) = golden_min(&|x| -g(x), a, b, rel_tol);
    (arg, -neg)
}

/// Golden-section minimization of a unimodal map on `[a, b]`.
pub fn golden_min<R: Real>(h: &impl Fn(R) -> R, mut a: R, mut b: R, rel_tol: R) -> (R, R) {
    debug_assert!(a < b);
    let ratio = lit::<R>(0.618_033_988_749_894_9);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = h(x1);
    let mut f2 = h(x2);
    for _ in 0..200 {
        if b - a <= rel_tol * (R::one() + a.abs().max(b.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = h(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimizes a unimodal map over `(0, inf)` starting from `guess`:
/// geometric scan for the trough, then golden section.
///
/// Returns `(argmin, min)`. Errors if the map keeps decreasing at either
/// expansion cap.
pub fn min_unimodal_positive<R: Real>(
    h: impl Fn(R) -> ExtReal<R>,
    guess: R,
    rel_tol: R,
) -> Result<(R, ExtReal<R>)> {
    let two = lit::<R>(2.0);
    let mut best_arg = guess;
    let mut best_val = h(guess);
    // Scan right, then left, from the guess.
    let mut improved_at_cap = false;
    for dir in [two, R::one() / two] {
        let mut s = guess;
        for i in 0..=MAX_DOUBLINGS {
            s = s * dir;
            let v = h(s);
            if v < best_val {
                best_val = v;
                best_arg = s;
                improved_at_cap = i == MAX_DOUBLINGS;
            }
        }
    }
    if improved_at_cap {
        return Err(Error::NonConvergence(
            "unimodal minimization ran off the expansion cap".into(),
        ));
    }
    if best_val.is_infinite() {
        return Ok((best_arg, best_val));
    }
    let wrap = |x: R| {
        let v = h(x);
        if v.is_infinite() {
            R::max_value()
        } else {
            v.value()
        }
    };
    let (arg, value) = golden_min(&wrap, best_arg / two, best_arg * two, rel_tol);
    Ok((arg, ExtReal::new(value.max(R::zero()))))
}
