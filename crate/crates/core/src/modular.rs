//! The modulars behind the weighted Orlicz classes: the two-argument form
//! `I_v(f) = int phi(|f|/v) v`, its rearranged version
//! `M(f) = int phi(f*/w) w`, the homogeneous (Luxemburg-type) functional,
//! and the structural checks (disjoint superadditivity, p-concavity).
//!
//! All integrals are exact finite sums over merged cell grids. Power-law
//! weight pieces admit closed forms only against power Orlicz functions;
//! other combinations are refused rather than approximated.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::orlicz::{log_grid, OrliczFn};
use crate::rearrange::{decreasing_rearrangement, seq_rearrangement};
use crate::scalar::{lit, Real};
use crate::solve::threshold_nonincreasing;
use crate::step::{merged_cells, Seq, StepFn};
use crate::weight::{Piece, Weight};

/// `psi(s, v) = phi(s/v) v`, with the zero-denominator convention:
/// 0 when `s = 0`, infinite otherwise.
pub fn psi<R: Real>(phi: &OrliczFn<R>, s: R, v: R) -> ExtReal<R> {
    if v == R::zero() {
        if s == R::zero() {
            ExtReal::zero()
        } else {
            ExtReal::infinity()
        }
    } else {
        ExtReal::new(phi.eval(s / v) * v)
    }
}

/// `I_v(f) = int phi(|f|/v) v` over a common interval, exact.
pub fn modular_iv<R: Real>(
    f: &StepFn<R>,
    v: &StepFn<R>,
    phi: &OrliczFn<R>,
) -> Result<ExtReal<R>> {
    if f.domain_end() != v.domain_end() {
        return Err(Error::DomainMismatch(format!(
            "modular arguments live on (0, {}) vs (0, {})",
            f.domain_end(),
            v.domain_end()
        )));
    }
    let mut acc = ExtReal::zero();
    for (lo, hi, cf, cv) in merged_cells(f, v) {
        let len = if hi.is_finite() {
            ExtReal::new(hi - lo)
        } else {
            ExtReal::infinity()
        };
        acc += psi(phi, cf, cv) * len;
    }
    Ok(acc)
}

/// Sequence modular `sum_n phi(|x(n)|/v(n)) v(n)` over the longer index
/// range (absent entries are zero).
pub fn seq_modular_iv<R: Real>(x: &Seq<R>, v: &Seq<R>, phi: &OrliczFn<R>) -> ExtReal<R> {
    (0..x.len().max(v.len()))
        .map(|i| psi(phi, x.get(i), v.get(i)))
        .sum()
}

/// `m(x) = sum phi(x*(n)/w(n)) w(n)`: the sequence modular after sorting.
pub fn seq_modular_m<R: Real>(x: &Seq<R>, w: &Seq<R>, phi: &OrliczFn<R>) -> ExtReal<R> {
    seq_modular_iv(&seq_rearrangement(x), w, phi)
}

fn segment_modular<R: Real>(
    phi: &OrliczFn<R>,
    c: R,
    s1: R,
    s2: R,
    piece: Piece<R>,
) -> Result<ExtReal<R>> {
    match piece {
        Piece::Const(cv) => Ok(psi(phi, c, cv) * ExtReal::new(s2 - s1)),
        Piece::Pow { scale, gamma } => {
            let (p, a) = phi.power_params().ok_or_else(|| {
                Error::UnsupportedModular(
                    "power-law weight piece needs a power Orlicz function for an exact integral"
                        .into(),
                )
            })?;
            // int phi(c/w) w over (s1, s2] with w = scale * t^-gamma:
            // a c^p scale^(1-p) (s2^e - s1^e)/e, e = gamma (p-1) + 1 >= 1.
            let e = gamma * (p - R::one()) + R::one();
            Ok(ExtReal::new(
                a * c.powf(p) * scale.powf(R::one() - p) * (s2.powf(e) - s1.powf(e)) / e,
            ))
        }
    }
}

/// `M(f) = int phi(f*/w) w`, exact where the piece/phi pairing admits a
/// closed form. Mass of `f*` escaping the weight's interval (where w is 0
/// or undefined) makes the modular infinite.
pub fn modular_m<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<ExtReal<R>> {
    modular_m_decreasing(&decreasing_rearrangement(f), w, phi)
}

/// `M` for an already nonincreasing argument.
pub fn modular_m_decreasing<R: Real>(
    fstar: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<ExtReal<R>> {
    let end = w.domain_end();
    let mut acc = ExtReal::zero();
    for (a, b, c) in fstar.cells() {
        if c == R::zero() {
            continue;
        }
        if !b.is_finite() || b > end || a >= w.positive_until() {
            return Ok(ExtReal::infinity());
        }
        if let Some(floor) = w.truncation_floor() {
            if a > R::zero() && a < floor {
                return Err(Error::BelowTruncation {
                    t: crate::scalar::wide(a),
                    floor: crate::scalar::wide(floor),
                });
            }
        }
        // The slice below a truncation floor is dropped: on the catalog
        // weights it is bounded by psi(c, w(floor)) * floor < 1e-24 * c.
        for (s1, s2, piece) in w.segments_between(a, b) {
            acc += segment_modular(phi, c, s1, s2, piece)?;
            if acc.is_infinite() {
                return Ok(acc);
            }
        }
    }
    Ok(acc)
}

/// `int g(f*(t)) dW(t)`, exact via cumulative differences for any weight:
/// the weight enters linearly, so no piece/phi restriction applies.
pub fn integral_against_weight<R: Real>(
    fstar: &StepFn<R>,
    w: &Weight<R>,
    g: impl Fn(R) -> ExtReal<R>,
) -> Result<ExtReal<R>> {
    let end = w.domain_end();
    let mut acc = ExtReal::zero();
    for (a, b, c) in fstar.cells() {
        if c == R::zero() {
            continue;
        }
        if let Some(floor) = w.truncation_floor() {
            if a > R::zero() && a < floor {
                return Err(Error::BelowTruncation {
                    t: crate::scalar::wide(a),
                    floor: crate::scalar::wide(floor),
                });
            }
        }
        let wa = if a == R::zero() { R::zero() } else { w.cumulative(a.min(end))? };
        let dw = if b.is_finite() {
            ExtReal::new(w.cumulative(b.min(end))? - wa)
        } else {
            match w.total_mass().finite() {
                Some(total) => ExtReal::new(total - wa),
                None => ExtReal::infinity(),
            }
        };
        acc += g(c) * dw;
    }
    Ok(acc)
}

fn positive_support_sup<R: Real>(fstar: &StepFn<R>) -> R {
    let mut sup = R::zero();
    for (_, hi, v) in fstar.cells() {
        if v > R::zero() {
            sup = hi;
        }
    }
    sup
}

/// The homogeneous functional `inf { eps > 0 : M(f/eps) <= 1 }`.
///
/// Structural infinities (positive mass on an infinite cell over an
/// infinite-mass weight, or support escaping where the weight lives) are
/// detected outright; otherwise the threshold is found by bisection over
/// the nonincreasing map `eps -> M(f/eps)` to relative tolerance 1e-9.
pub fn luxemburg_norm<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<ExtReal<R>> {
    if f.is_zero() {
        return Ok(ExtReal::zero());
    }
    let fstar = decreasing_rearrangement(f);
    // One probe evaluation validates the piece/phi pairing and domains.
    let probe = modular_m_decreasing(&fstar, w, phi)?;
    let lsup = positive_support_sup(&fstar);
    if lsup > w.positive_until() || !lsup.is_finite() {
        // No scaling makes the modular finite.
        return Ok(ExtReal::infinity());
    }
    let _ = probe;
    let guess = fstar.values().iter().cloned().fold(R::zero(), R::max);
    let norm = threshold_nonincreasing(
        |eps| {
            modular_m_decreasing(&fstar.scale(R::one() / eps), w, phi)
                .expect("pairing validated by the probe evaluation")
        },
        guess,
        lit(1e-9),
    );
    Ok(norm)
}

/// Extends both functions with zero cells onto a common interval.
pub fn unify_domains<R: Real>(f: &StepFn<R>, g: &StepFn<R>) -> (StepFn<R>, StepFn<R>) {
    let end = f.domain_end().max(g.domain_end());
    (extend_to(f, end), extend_to(g, end))
}

fn extend_to<R: Real>(f: &StepFn<R>, end: R) -> StepFn<R> {
    if f.domain_end() == end {
        return f.clone();
    }
    let mut breaks = f.breakpoints().to_vec();
    let mut values = f.values().to_vec();
    breaks.push(end);
    values.push(R::zero());
    StepFn::new(breaks, values).expect("zero extension stays valid")
}

/// Both sides of disjoint superadditivity: `(M(f+g), M(f) + M(g))`; the
/// first dominates. Overlapping supports are rejected.
pub fn check_superadditive<R: Real>(
    f: &StepFn<R>,
    g: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<(ExtReal<R>, ExtReal<R>)> {
    let (fu, gu) = unify_domains(f, g);
    for (lo, hi, a, b) in merged_cells(&fu, &gu) {
        if a > R::zero() && b > R::zero() && lo < hi {
            return Err(Error::Precondition(format!(
                "supports overlap on ({lo}, {hi})"
            )));
        }
    }
    let sum = fu.compose(&gu, |a, b| a + b)?;
    let lhs = modular_m(&sum, w, phi)?;
    let rhs = modular_m(&fu, w, phi)? + modular_m(&gu, w, phi)?;
    Ok((lhs, rhs))
}

/// Midpoint concavity scan of `t -> phi(t^(1/p))` on a log grid; a convex
/// counterexample pair is reported as a precondition failure.
fn require_p_concave<R: Real>(phi: &OrliczFn<R>, p: R) -> Result<()> {
    let h = |t: R| phi.eval(t.powf(R::one() / p));
    let grid: Vec<R> = log_grid(lit(1e-6), lit(1e6), 61).collect();
    let tol = lit::<R>(1e-10);
    for win in grid.windows(2) {
        let (t1, t2) = (win[0], win[1]);
        let mid = (t1 + t2) * lit(0.5);
        let (h1, h2, hm) = (h(t1), h(t2), h(mid));
        if !h1.is_finite() || !h2.is_finite() || !hm.is_finite() {
            continue;
        }
        let avg = (h1 + h2) * lit(0.5);
        if hm < avg - tol * (R::one() + avg.abs()) {
            return Err(Error::Precondition(format!(
                "phi is not {p}-concave: midpoint gap at t = {mid}"
            )));
        }
    }
    Ok(())
}

/// Both sides of the p-concavity comparison for a family of functions:
/// `lhs = ||(sum |f_i|^p)^(1/p)||`, `rhs = (sum ||f_i||^p)^(1/p)`;
/// for p-concave phi the left side dominates.
pub fn check_p_concavity<R: Real>(
    fs: &[StepFn<R>],
    p: R,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<(ExtReal<R>, ExtReal<R>)> {
    if fs.is_empty() {
        return Err(Error::Precondition("p-concavity needs at least one function".into()));
    }
    if !(p >= R::one()) {
        return Err(Error::Precondition(format!("p-concavity needs p >= 1, got {p}")));
    }
    require_p_concave(phi, p)?;
    let mut agg = fs[0].clone();
    for f in &fs[1..] {
        let (a, b) = unify_domains(&agg, f);
        agg = a.compose(&b, |x, y| (x.powf(p) + y.powf(p)).powf(R::one() / p))?;
    }
    let lhs = luxemburg_norm(&agg, w, phi)?;
    let mut sum_p = R::zero();
    for f in fs {
        match luxemburg_norm(f, w, phi)?.finite() {
            Some(n) => sum_p = sum_p + n.powf(p),
            None => return Ok((lhs, ExtReal::infinity())),
        }
    }
    Ok((lhs, ExtReal::new(sum_p.powf(R::one() / p))))
}
