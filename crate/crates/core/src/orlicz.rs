//! Orlicz functions: convex, strictly increasing, vanishing at zero.
//!
//! Three families cover the catalog: scaled powers `a * u^p` with `p >= 1`,
//! the exponential `e^u - 1`, and convex piecewise-linear interpolants.
//! Conjugates are closed-form where they exist and fall back to a bracketed
//! concave search elsewhere. The growth predicates (doubling ratios,
//! N-function limits, Matuszewska-style indices) are grid estimators, not
//! certified bounds: they are tuned to classify the catalog correctly.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scalar::{lit, wide, Real};
use crate::solve::{sup_concave, SupResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
enum Kind<R> {
    /// `scale * u^p`, `p >= 1`, `scale > 0`.
    Power { p: R, scale: R },
    /// `e^u - 1`.
    Expm1,
    /// Convex piecewise-linear interpolant through `(0,0)` and `knots`,
    /// extended past the last knot with the final slope.
    Pwl { knots: Vec<(R, R)>, slopes: Vec<R> },
}

/// A convex, strictly increasing function with `phi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczFn<R> {
    kind: Kind<R>,
}

impl<R: Real> OrliczFn<R> {
    /// `u^p` with `p >= 1`.
    pub fn power(p: R) -> Result<Self> {
        Self::scaled_power(p, R::one())
    }

    /// `u^p / p`, the normalization whose conjugate is `t^q / q`.
    pub fn power_normalized(p: R) -> Result<Self> {
        Self::scaled_power(p, R::one() / p)
    }

    /// `scale * u^p`.
    pub fn scaled_power(p: R, scale: R) -> Result<Self> {
        if !(p >= R::one()) || !p.is_finite() {
            return Err(Error::InvalidConstruction(format!(
                "power exponent must satisfy p >= 1, got {p}"
            )));
        }
        if !(scale > R::zero()) || !scale.is_finite() {
            return Err(Error::InvalidConstruction(
                "power scale must be positive and finite".into(),
            ));
        }
        Ok(OrliczFn {
            kind: Kind::Power { p, scale },
        })
    }

    /// `e^u - 1`. Convex and strictly increasing but linear near zero, so
    /// not an N-function.
    pub fn expm1() -> Self {
        OrliczFn { kind: Kind::Expm1 }
    }

    /// Piecewise-linear interpolant through `(0, 0)` and the given knots.
    ///
    /// Rejects data whose segment slopes are not positive and nondecreasing:
    /// that is exactly convexity plus strict growth.
    pub fn pwl(points: Vec<(R, R)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConstruction("pwl needs at least one knot".into()));
        }
        let mut slopes = Vec::with_capacity(points.len());
        let (mut px, mut py) = (R::zero(), R::zero());
        for &(x, y) in &points {
            if !(x > px) || !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidConstruction(
                    "pwl knot abscissas must be finite and strictly increasing from 0".into(),
                ));
            }
            let m = (y - py) / (x - px);
            if !(m > R::zero()) {
                return Err(Error::InvalidConstruction(
                    "pwl slopes must be positive (strict growth)".into(),
                ));
            }
            if let Some(last) = slopes.last() {
                if m < *last {
                    return Err(Error::InvalidConstruction(
                        "pwl slopes must be nondecreasing (convexity)".into(),
                    ));
                }
            }
            slopes.push(m);
            px = x;
            py = y;
        }
        Ok(OrliczFn {
            kind: Kind::Pwl {
                knots: points,
                slopes,
            },
        })
    }

    /// `phi(t)` for `t >= 0`. May overflow to infinity (e.g. `e^u - 1` for
    /// large `u`); never NaN.
    pub fn eval(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        match &self.kind {
            Kind::Power { p, scale } => {
                if t == R::zero() {
                    R::zero()
                } else {
                    *scale * t.powf(*p)
                }
            }
            Kind::Expm1 => t.exp_m1(),
            Kind::Pwl { knots, slopes } => {
                let i = knots.partition_point(|&(x, _)| x < t);
                if i == knots.len() {
                    let (x, y) = *knots.last().unwrap();
                    y + *slopes.last().unwrap() * (t - x)
                } else {
                    let (px, py) = if i == 0 { (R::zero(), R::zero()) } else { knots[i - 1] };
                    py + slopes[i] * (t - px)
                }
            }
        }
    }

    /// Inverse of `phi` on `[0, inf)`.
    pub fn inverse(&self, y: R) -> R {
        debug_assert!(y >= R::zero());
        match &self.kind {
            Kind::Power { p, scale } => (y / *scale).powf(R::one() / *p),
            Kind::Expm1 => y.ln_1p(),
            Kind::Pwl { knots, slopes } => {
                let i = knots.partition_point(|&(_, ky)| ky < y);
                if i == knots.len() {
                    let (x, ky) = *knots.last().unwrap();
                    x + (y - ky) / *slopes.last().unwrap()
                } else {
                    let (px, py) = if i == 0 { (R::zero(), R::zero()) } else { knots[i - 1] };
                    px + (y - py) / slopes[i]
                }
            }
        }
    }

    /// Right derivative `phi'(t+)`.
    pub fn right_deriv(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        match &self.kind {
            Kind::Power { p, scale } => {
                if *p == R::one() {
                    *scale
                } else if t == R::zero() {
                    R::zero()
                } else {
                    *scale * *p * t.powf(*p - R::one())
                }
            }
            Kind::Expm1 => t.exp(),
            Kind::Pwl { knots, slopes } => {
                // Slope of the segment to the right of t.
                let i = knots.partition_point(|&(x, _)| x <= t);
                if i == knots.len() {
                    *slopes.last().unwrap()
                } else {
                    slopes[i]
                }
            }
        }
    }

    /// Second derivative where it exists; zero for piecewise-linear kinds.
    /// Used by the envelope Newton solver.
    pub(crate) fn second_deriv(&self, t: R) -> R {
        match &self.kind {
            Kind::Power { p, scale } => {
                // Linear powers have no curvature; at t = 0 the formula below
                // would evaluate 0^(p-2), so both cases short-circuit to zero.
                if *p == R::one() || t == R::zero() {
                    R::zero()
                } else {
                    *scale * *p * (*p - R::one()) * t.powf(*p - lit(2.0))
                }
            }
            Kind::Expm1 => t.exp(),
            Kind::Pwl { .. } => R::zero(),
        }
    }

    /// Leftmost `s` with `phi'(s) >= y`, the generalized inverse of the
    /// derivative. Errors for kinds whose derivative has flats wider than a
    /// point (piecewise-linear, and linear powers), where the inverse is not
    /// well enough resolved for the duality oracles.
    pub fn deriv_inverse(&self, y: R) -> Result<R> {
        debug_assert!(y >= R::zero());
        match &self.kind {
            Kind::Power { p, scale } => {
                if *p == R::one() {
                    return Err(Error::Precondition(
                        "derivative of a linear power is flat; no usable inverse".into(),
                    ));
                }
                Ok((y / (*scale * *p)).powf(R::one() / (*p - R::one())))
            }
            Kind::Expm1 => Ok(if y <= R::one() { R::zero() } else { y.ln() }),
            Kind::Pwl { .. } => Err(Error::Precondition(
                "piecewise-linear derivative has flats; no usable inverse".into(),
            )),
        }
    }

    /// `(exponent, scale)` when this is a scaled power; modular closed
    /// forms over power-law weight pieces exist only in that case.
    pub fn power_params(&self) -> Option<(R, R)> {
        match self.kind {
            Kind::Power { p, scale } => Some((p, scale)),
            _ => None,
        }
    }

    /// Conjugate `phi*(t) = sup_s (s t - phi(s))`, exact closed forms.
    pub fn conjugate_value(&self, t: R) -> ExtReal<R> {
        debug_assert!(t >= R::zero());
        match &self.kind {
            Kind::Power { p, scale } => {
                if *p == R::one() {
                    // sup s(t - scale) is 0 below the slope, infinite above.
                    if t <= *scale {
                        ExtReal::zero()
                    } else {
                        ExtReal::infinity()
                    }
                } else {
                    let q = *p / (*p - R::one());
                    let coeff =
                        (*p - R::one()) / *p / (*scale * *p).powf(q - R::one());
                    ExtReal::new(coeff * t.powf(q))
                }
            }
            Kind::Expm1 => {
                if t <= R::one() {
                    ExtReal::zero()
                } else {
                    ExtReal::new(t * t.ln() - t + R::one())
                }
            }
            Kind::Pwl { knots, slopes } => {
                // Supremum sits at the knot where the slope first reaches t.
                if t > *slopes.last().unwrap() {
                    return ExtReal::infinity();
                }
                let j = slopes.partition_point(|m| *m < t);
                let (x, y) = if j == 0 { (R::zero(), R::zero()) } else { knots[j - 1] };
                ExtReal::new((t * x - y).max(R::zero()))
            }
        }
    }

    /// Conjugate by bracketed concave search; validates the closed forms and
    /// serves arbitrary callables in tests. Declares infinity when the
    /// supremum still grows at the 2^60 expansion cap.
    pub fn conjugate_numeric(&self, t: R, rel_tol: R) -> ExtReal<R> {
        match sup_concave(|s| t * s - self.eval(s), rel_tol) {
            SupResult::Finite { value, .. } => ExtReal::new(value.max(R::zero())),
            SupResult::Diverges => ExtReal::infinity(),
        }
    }

    /// The conjugate as an Orlicz function, where it stays in the catalog:
    /// strict powers conjugate to strict powers. Linear powers, `e^u - 1`
    /// and piecewise-linear functions fall outside (their conjugates are not
    /// strictly increasing from zero or leave the represented families).
    pub fn conjugate_fn(&self) -> Option<Self> {
        match &self.kind {
            Kind::Power { p, scale } if *p > R::one() => {
                let q = *p / (*p - R::one());
                let coeff = (*p - R::one()) / *p / (*scale * *p).powf(q - R::one());
                Some(OrliczFn::scaled_power(q, coeff).expect("conjugate power is valid"))
            }
            _ => None,
        }
    }

    /// Doubling-ratio verdict: sup of `phi(2u)/phi(u)` over a log grid.
    pub fn is_delta2(&self, cfg: &GrowthConfig<R>) -> GrowthVerdict<R> {
        let mut sup = R::zero();
        let mut witness = R::zero();
        let mut unbounded = false;
        for u in log_grid(cfg.grid_lo, cfg.grid_hi, cfg.points) {
            let lo = self.eval(u);
            let hi = self.eval(lit::<R>(2.0) * u);
            if !(lo > R::zero()) || !lo.is_finite() {
                continue;
            }
            if !hi.is_finite() {
                // phi finite at u but infinite at 2u: ratio beyond any bound.
                unbounded = true;
                witness = u;
                sup = R::infinity();
                break;
            }
            let ratio = hi / lo;
            if ratio > sup {
                sup = ratio;
                witness = u;
            }
        }
        if !unbounded && sup > cfg.ceiling {
            unbounded = true;
        }
        GrowthVerdict {
            bounded: !unbounded,
            constant: sup,
            witness: if unbounded { Some(witness) } else { None },
        }
    }

    /// Grid test for the N-function limits `phi(t)/t -> 0` (t -> 0) and
    /// `-> inf` (t -> inf): the ratio must strictly grow across the bottom
    /// and top decades of the grid and clear the configured thresholds.
    pub fn is_n_function(&self, cfg: &NFunctionConfig<R>) -> bool {
        let ratio = |t: R| self.eval(t) / t;
        let ten = lit::<R>(10.0);

        let r_lo = ratio(cfg.grid_lo);
        let low_ok = r_lo < cfg.low_threshold
            && strictly_increasing(&ratio, cfg.grid_lo, cfg.grid_lo * ten, 8);

        // Work below any overflow point of phi.
        let mut hi = cfg.grid_hi;
        while !self.eval(hi).is_finite() && hi > cfg.grid_lo * ten {
            hi = hi / ten;
        }
        let high_ok = ratio(hi) > cfg.high_threshold
            && strictly_increasing(&ratio, hi / ten, hi, 8);

        low_ok && high_ok
    }

    /// Matuszewska-style index estimates over `[1e-6, 1e6]`.
    pub fn matuszewska_indices(&self, cfg: &IndexConfig<R>) -> (R, R) {
        matuszewska_indices(|t| self.eval(t), lit(1e-6), lit(1e6), cfg)
    }
}

fn strictly_increasing<R: Real>(f: &impl Fn(R) -> R, lo: R, hi: R, steps: usize) -> bool {
    let mut prev = f(lo);
    for t in log_grid(lo, hi, steps).skip(1) {
        let cur = f(t);
        if !(cur > prev) || !cur.is_finite() {
            return false;
        }
        prev = cur;
    }
    true
}

/// Log-spaced grid with `points` entries including both endpoints.
pub fn log_grid<R: Real>(lo: R, hi: R, points: usize) -> impl Iterator<Item = R> {
    debug_assert!(lo > R::zero() && hi > lo && points >= 2);
    let llo = lo.ln();
    let step = (hi.ln() - llo) / lit::<R>((points - 1) as f64);
    // Emit the ends exactly: scan consumers key behavior off cell edges,
    // and exp/ln round-tripping would push the last point off its cell.
    (0..points).map(move |i| {
        if i == 0 {
            lo
        } else if i == points - 1 {
            hi
        } else {
            (llo + step * lit::<R>(i as f64)).exp()
        }
    })
}

/// Configuration for doubling-ratio grids.
#[derive(Debug, Clone)]
pub struct GrowthConfig<R> {
    pub grid_lo: R,
    pub grid_hi: R,
    pub points: usize,
    /// Ratios above this are declared unbounded.
    pub ceiling: R,
}

impl<R: Real> Default for GrowthConfig<R> {
    fn default() -> Self {
        GrowthConfig {
            grid_lo: lit(1e-8),
            grid_hi: lit(1e8),
            points: 241,
            ceiling: lit(1e6),
        }
    }
}

/// Outcome of a boundedness scan: the observed constant if bounded, a
/// witness argument if not.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVerdict<R> {
    pub bounded: bool,
    pub constant: R,
    pub witness: Option<R>,
}

/// Configuration for the N-function limit test.
#[derive(Debug, Clone)]
pub struct NFunctionConfig<R> {
    pub grid_lo: R,
    pub grid_hi: R,
    /// `phi(t)/t` at the bottom of the grid must sit below this.
    pub low_threshold: R,
    /// `phi(t)/t` at the top of the grid must sit above this.
    pub high_threshold: R,
}

impl<R: Real> Default for NFunctionConfig<R> {
    fn default() -> Self {
        NFunctionConfig {
            grid_lo: lit(1e-8),
            grid_hi: lit(1e8),
            low_threshold: lit(0.5),
            high_threshold: lit(2.0),
        }
    }
}

/// Configuration for the index estimator grids.
#[derive(Debug, Clone)]
pub struct IndexConfig<R> {
    pub t_points: usize,
    pub lambda_points: usize,
    /// Smallest contraction factor, default `2^-20`.
    pub lambda_min: R,
}

impl<R: Real> Default for IndexConfig<R> {
    fn default() -> Self {
        IndexConfig {
            t_points: 64,
            lambda_points: 64,
            lambda_min: lit(2.0f64.powi(-20)),
        }
    }
}

/// Extremal-slope index estimates `(alpha, beta)` for a positive function
/// `h` on `(t_lo, t_hi)`: the infimum and supremum over a `(t, lambda)` grid
/// of `ln(h(lambda t)/h(t)) / ln(lambda)`, `lambda <= 1/2`.
///
/// Exact powers `t^p` give `alpha = beta = p`. This is a grid estimator:
/// the extremes hold only over the sampled rectangle.
pub fn matuszewska_indices<R: Real>(
    h: impl Fn(R) -> R,
    t_lo: R,
    t_hi: R,
    cfg: &IndexConfig<R>,
) -> (R, R) {
    let mut alpha = R::infinity();
    let mut beta = R::neg_infinity();
    for t in log_grid(t_lo, t_hi, cfg.t_points) {
        let ht = h(t);
        if !(ht > R::zero()) || !ht.is_finite() {
            continue;
        }
        for lam in log_grid(cfg.lambda_min, lit(0.5), cfg.lambda_points) {
            let s = lam * t;
            if s <= t_lo {
                continue;
            }
            let hs = h(s);
            if !(hs > R::zero()) || !hs.is_finite() {
                continue;
            }
            let slope = (hs / ht).ln() / lam.ln();
            alpha = alpha.min(slope);
            beta = beta.max(slope);
        }
    }
    (alpha, beta)
}

/// Searches for an equivalence constant `C` with
/// `phi1(t/C) <= phi2(t) <= phi1(C t)` across a log grid, doubling `C` from
/// 1 up to `2^40`. Returns the first constant that works.
pub fn equivalence_constant<R: Real>(
    phi1: &OrliczFn<R>,
    phi2: &OrliczFn<R>,
    grid_lo: R,
    grid_hi: R,
    points: usize,
) -> Option<R> {
    let grid: Vec<R> = log_grid(grid_lo, grid_hi, points).collect();
    let mut c = R::one();
    for _ in 0..=40 {
        let ok = grid.iter().all(|&t| {
            let lo = phi1.eval(t / c);
            let hi = phi1.eval(c * t);
            lo <= phi2.eval(t) && phi2.eval(t) <= hi
        });
        if ok {
            return Some(c);
        }
        c = c * lit(2.0);
    }
    None
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum OrliczDto {
    Power {
        p: f64,
        #[serde(default)]
        normalized: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    Expm1,
    Pwl {
        points: Vec<[f64; 2]>,
    },
}

impl<R: Real> Serialize for OrliczFn<R> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = match &self.kind {
            Kind::Power { p, scale } => {
                let (pw, sw) = (wide(*p), wide(*scale));
                if sw == 1.0 {
                    OrliczDto::Power { p: pw, normalized: false, scale: None }
                } else if sw == 1.0 / pw {
                    OrliczDto::Power { p: pw, normalized: true, scale: None }
                } else {
                    OrliczDto::Power { p: pw, normalized: false, scale: Some(sw) }
                }
            }
            Kind::Expm1 => OrliczDto::Expm1,
            Kind::Pwl { knots, .. } => OrliczDto::Pwl {
                points: knots.iter().map(|&(x, y)| [wide(x), wide(y)]).collect(),
            },
        };
        dto.serialize(serializer)
    }
}

impl<'de, R: Real> Deserialize<'de> for OrliczFn<R> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = OrliczDto::deserialize(deserializer)?;
        let built = match dto {
            OrliczDto::Power { p, normalized, scale } => {
                let s = scale.unwrap_or(if normalized { 1.0 / p } else { 1.0 });
                OrliczFn::scaled_power(lit(p), lit::<R>(s))
            }
            OrliczDto::Expm1 => Ok(OrliczFn::expm1()),
            OrliczDto::Pwl { points } => {
                OrliczFn::pwl(points.iter().map(|p| (lit(p[0]), lit(p[1]))).collect())
            }
        };
        built.map_err(serde::de::Error::custom)
    }
}
