//! Nonincreasing weights on an interval (0, a) with exact cumulative
//! integrals.
//!
//! A weight is a finite list of pieces, each constant or a power
//! `scale * t^-gamma`, so every cumulative value is a closed-form sum: no
//! quadrature anywhere. The two counterexample catalog weights are truncated
//! at a configurable cell index; below the truncation floor pointwise
//! evaluation is refused, but the cumulative carries the full analytic tail
//! mass of the untruncated weight, so regularity and doubling scans see the
//! true W.
//!
//! Growth predicates (regularity, doubling of 1/w, control by an Orlicz
//! function) are grid scans. A truncated weight can never exhibit an actual
//! unbounded supremum, so each scan pairs a hard ceiling with a trend test:
//! per-cell peak ratios that keep growing toward the singular end are
//! declared divergent, with the peak argument as witness.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::orlicz::{log_grid, OrliczFn};
use crate::scalar::{lit, wide, Real};
use crate::step::StepFn;
use serde::{Deserialize, Serialize};

/// One analytic piece of a weight: `w(t) = c` or `w(t) = scale * t^-gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece<R> {
    Const(R),
    Pow { scale: R, gamma: R },
}

impl<R: Real> Piece<R> {
    fn eval(&self, t: R) -> R {
        match *self {
            Piece::Const(c) => c,
            Piece::Pow { scale, gamma } => scale * t.powf(-gamma),
        }
    }

    /// Exact integral over a finite interval (a, b].
    fn integral(&self, a: R, b: R) -> R {
        match *self {
            Piece::Const(c) => c * (b - a),
            Piece::Pow { scale, gamma } => {
                if gamma == R::one() {
                    scale * (b.ln() - a.ln())
                } else {
                    let e = R::one() - gamma;
                    scale * (b.powf(e) - a.powf(e)) / e
                }
            }
        }
    }

    fn diverges_at_infinity(&self) -> bool {
        match *self {
            Piece::Const(c) => c > R::zero(),
            // gamma <= 1 throughout, so every power tail diverges.
            Piece::Pow { .. } => true,
        }
    }
}

/// Construction recipe, kept for serialization identity.
#[derive(Debug, Clone, PartialEq)]
enum WSpec<R: Real> {
    Constant(R),
    Power(R),
    Step(StepFn<R>),
    Example314(usize),
    Example415(usize),
    Pieces,
}

/// A nonincreasing weight with exact cumulative integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<R: Real> {
    spec: WSpec<R>,
    /// Piece edges, ascending; `breaks[0]` is 0 or the truncation floor;
    /// the last entry may be infinite. Piece `i` covers `(breaks[i], breaks[i+1]]`.
    breaks: Vec<R>,
    pieces: Vec<Piece<R>>,
    /// Trend-cell id per piece; ids increase toward the singular end t -> 0.
    cells: Vec<usize>,
    /// `cum[i] = W(breaks[i])`; `cum[0]` is the analytic mass below the floor.
    cum: Vec<R>,
    truncated: bool,
}

fn pow2<R: Real>(e: i32) -> R {
    lit::<R>(2.0).powi(e)
}

const DEFAULT_KMAX: usize = 8;

impl<R: Real> Weight<R> {
    /// `w == c` on (0, inf), `c > 0`.
    pub fn constant(c: R) -> Result<Self> {
        if !(c > R::zero()) || !c.is_finite() {
            return Err(Error::InvalidConstruction(
                "constant weight must be positive and finite".into(),
            ));
        }
        Weight::from_parts(
            WSpec::Constant(c),
            vec![R::zero(), R::infinity()],
            vec![Piece::Const(c)],
            vec![0],
            R::zero(),
            false,
        )
    }

    /// `w(t) = t^-gamma` on (0, inf) with `0 <= gamma < 1`, so W stays
    /// finite on compacts.
    pub fn power(gamma: R) -> Result<Self> {
        if !(gamma >= R::zero() && gamma < R::one()) {
            return Err(Error::InvalidConstruction(format!(
                "power weight needs 0 <= gamma < 1, got {gamma}"
            )));
        }
        Weight::from_parts(
            WSpec::Power(gamma),
            vec![R::zero(), R::infinity()],
            vec![Piece::Pow { scale: R::one(), gamma }],
            vec![0],
            R::zero(),
            false,
        )
    }

    /// Step-function weight; values must be nonincreasing (zero tail
    /// allowed).
    pub fn step(f: StepFn<R>) -> Result<Self> {
        if !f.is_nonincreasing() {
            return Err(Error::InvalidConstruction(
                "step weight must be nonincreasing".into(),
            ));
        }
        let f = f.canonicalized();
        let n = f.num_cells();
        let breaks = f.breakpoints().to_vec();
        let pieces: Vec<Piece<R>> = f.values().iter().map(|&v| Piece::Const(v)).collect();
        // Trend ids run toward t -> 0.
        let cells = (0..n).map(|i| n - 1 - i).collect();
        Weight::from_parts(WSpec::Step(f), breaks, pieces, cells, R::zero(), false)
    }

    /// Catalog weight: `2^(k^2)` on `(4^-(k+1)^2, 4^-k^2]`, k = 0, 1, ...,
    /// on (0, 1], truncated at `k = kmax`. Bounded by `t^-1/2`, so W is
    /// finite, yet `w(t_k)/w(2 t_k) = 2^(2k-1)` grows without bound: 1/w
    /// fails the doubling condition.
    pub fn example314(kmax: usize) -> Result<Self> {
        if !(1..=16).contains(&kmax) {
            return Err(Error::InvalidConstruction(
                "example314 kmax must be in 1..=16".into(),
            ));
        }
        let mut breaks = vec![pow2(-2 * ((kmax + 1) * (kmax + 1)) as i32)];
        let mut pieces = Vec::new();
        let mut cells = Vec::new();
        for k in (0..=kmax).rev() {
            breaks.push(pow2(-2 * (k * k) as i32));
            pieces.push(Piece::Const(pow2((k * k) as i32)));
            cells.push(k);
        }
        // Mass of the untruncated cells below the floor:
        // sum over k > kmax of 2^(k^2) * (4^-k^2 - 4^-(k+1)^2).
        let mut tail = R::zero();
        for k in (kmax + 1)..200 {
            let term = pow2::<R>(-((k * k) as i32))
                * (R::one() - pow2::<R>(-(4 * k as i32 + 2)));
            if term == R::zero() {
                break;
            }
            tail = tail + term;
        }
        Weight::from_parts(WSpec::Example314(kmax), breaks, pieces, cells, tail, true)
    }

    /// Catalog weight: `max(2^-(k+1)^2 / t, 2^(k^2))` on
    /// `(4^-(k+1)^2, 4^-k^2]`, continuous across cells, truncated at
    /// `k = kmax`. Along the hyperbolic stretches `w(st) = w(t)/s`, which
    /// pins the lower dilation index at -1 and defeats regularity, while
    /// `w(t)/w(2t) <= 2` keeps 1/w doubling-bounded.
    pub fn example415(kmax: usize) -> Result<Self> {
        if !(1..=16).contains(&kmax) {
            return Err(Error::InvalidConstruction(
                "example415 kmax must be in 1..=16".into(),
            ));
        }
        let mut breaks = vec![pow2(-2 * ((kmax + 1) * (kmax + 1)) as i32)];
        let mut pieces = Vec::new();
        let mut cells = Vec::new();
        for k in (0..=kmax).rev() {
            let kk = (k * k) as i32;
            // Crossover where the hyperbola meets the constant.
            breaks.push(pow2(-(2 * kk + 2 * k as i32 + 1)));
            pieces.push(Piece::Pow {
                scale: pow2(-(((k + 1) * (k + 1)) as i32)),
                gamma: R::one(),
            });
            cells.push(k);
            breaks.push(pow2(-2 * kk));
            pieces.push(Piece::Const(pow2(kk)));
            cells.push(k);
        }
        let ln2 = lit::<R>(std::f64::consts::LN_2);
        let mut tail = R::zero();
        for k in (kmax + 1)..200 {
            let kk = (k * k) as i32;
            let term = pow2::<R>(-(((k + 1) * (k + 1)) as i32))
                * lit::<R>((2 * k + 1) as f64)
                * ln2
                + pow2::<R>(-kk) * (R::one() - pow2::<R>(-(2 * k as i32 + 1)));
            if term == R::zero() {
                break;
            }
            tail = tail + term;
        }
        Weight::from_parts(WSpec::Example415(kmax), breaks, pieces, cells, tail, true)
    }

    fn from_parts(
        spec: WSpec<R>,
        breaks: Vec<R>,
        pieces: Vec<Piece<R>>,
        cells: Vec<usize>,
        floor_mass: R,
        truncated: bool,
    ) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || cells.len() != pieces.len() || pieces.is_empty() {
            return Err(Error::InvalidConstruction("weight piece/break mismatch".into()));
        }
        if !(breaks[0] >= R::zero()) || !breaks[0].is_finite() {
            return Err(Error::InvalidConstruction("weight must start at a finite edge >= 0".into()));
        }
        for win in breaks.windows(2) {
            if !(win[0] < win[1]) {
                return Err(Error::InvalidConstruction(
                    "weight breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            match *p {
                Piece::Const(c) => {
                    if !(c >= R::zero()) || !c.is_finite() {
                        return Err(Error::InvalidConstruction("weight values must be finite and >= 0".into()));
                    }
                }
                Piece::Pow { scale, gamma } => {
                    if !(scale > R::zero()) || !scale.is_finite() {
                        return Err(Error::InvalidConstruction("power piece scale must be positive".into()));
                    }
                    if !(gamma >= R::zero() && gamma <= R::one()) {
                        return Err(Error::InvalidConstruction("power piece needs gamma in [0, 1]".into()));
                    }
                    if breaks[i] == R::zero() && gamma >= R::one() {
                        return Err(Error::InvalidConstruction(
                            "non-integrable singularity: gamma must be < 1 at the origin".into(),
                        ));
                    }
                }
            }
        }
        if pieces.iter().all(|p| matches!(*p, Piece::Const(c) if c == R::zero())) {
            return Err(Error::InvalidConstruction(
                "weight must be positive somewhere".into(),
            ));
        }
        // Nonincreasing within pieces is structural (gamma >= 0); check the
        // junctions: left value at the edge dominates the right limit.
        for i in 1..pieces.len() {
            let b = breaks[i];
            let left = pieces[i - 1].eval(b);
            let right = pieces[i].eval(b);
            if right > left * (R::one() + lit(1e-12)) {
                return Err(Error::InvalidConstruction(format!(
                    "weight increases across breakpoint {b}"
                )));
            }
        }
        let mut cum = Vec::with_capacity(breaks.len());
        cum.push(floor_mass);
        for i in 0..pieces.len() {
            let b2 = breaks[i + 1];
            let prev = cum[i];
            if b2.is_finite() {
                cum.push(prev + pieces[i].integral(breaks[i], b2));
            } else {
                cum.push(R::infinity());
            }
        }
        Ok(Weight { spec, breaks, pieces, cells, cum, truncated })
    }

    /// Upper end of the domain; infinite for the non-truncated catalog.
    pub fn domain_end(&self) -> R {
        *self.breaks.last().unwrap()
    }

    /// The floor below which pointwise evaluation is refused, if any.
    pub fn truncation_floor(&self) -> Option<R> {
        self.truncated.then(|| self.breaks[0])
    }

    /// Piece edges (the natural sampling skeleton).
    pub fn breakpoints(&self) -> &[R] {
        &self.breaks
    }

    fn piece_index(&self, t: R) -> usize {
        // Piece i covers (breaks[i], breaks[i+1]].
        self.breaks[1..].partition_point(|b| *b < t)
    }

    fn check_domain(&self, t: R) -> Result<()> {
        if !(t > R::zero()) || !t.is_finite() {
            return Err(Error::Precondition(format!(
                "weight evaluation needs finite t > 0, got {t}"
            )));
        }
        let end = self.domain_end();
        if t > end {
            return Err(Error::OutOfDomain { t: wide(t), end: wide(end) });
        }
        Ok(())
    }

    /// `w(t)`; refuses points at or below the truncation floor.
    pub fn eval(&self, t: R) -> Result<R> {
        self.check_domain(t)?;
        if self.truncated && t <= self.breaks[0] {
            return Err(Error::BelowTruncation { t: wide(t), floor: wide(self.breaks[0]) });
        }
        Ok(self.pieces[self.piece_index(t)].eval(t))
    }

    /// `W(t)`, the exact cumulative integral of the untruncated weight
    /// (the analytic mass below any truncation floor is included).
    pub fn cumulative(&self, t: R) -> Result<R> {
        self.check_domain(t)?;
        if t <= self.breaks[0] {
            return if t == self.breaks[0] {
                Ok(self.cum[0])
            } else {
                Err(Error::BelowTruncation { t: wide(t), floor: wide(self.breaks[0]) })
            };
        }
        let i = self.piece_index(t);
        Ok(self.cum[i] + self.pieces[i].integral(self.breaks[i], t))
    }

    /// `W` over the whole domain.
    pub fn total_mass(&self) -> ExtReal<R> {
        let end = self.domain_end();
        if end.is_finite() {
            ExtReal::new(*self.cum.last().unwrap())
        } else if self.pieces.last().unwrap().diverges_at_infinity() {
            ExtReal::infinity()
        } else {
            ExtReal::new(self.cum[self.cum.len() - 2])
        }
    }

    /// Supremum of the set where `w > 0`; equals the domain end unless the
    /// weight has a vanishing tail.
    pub fn positive_until(&self) -> R {
        for i in (0..self.pieces.len()).rev() {
            match self.pieces[i] {
                Piece::Const(c) if c == R::zero() => continue,
                _ => return self.breaks[i + 1],
            }
        }
        self.breaks[0]
    }

    /// Analytic segments of the weight intersected with (lo, hi], clipped to
    /// the declared domain: tuples (a, b, piece).
    pub fn segments_between(&self, lo: R, hi: R) -> Vec<(R, R, Piece<R>)> {
        let lo = lo.max(self.breaks[0]);
        let hi = hi.min(self.domain_end());
        let mut out = Vec::new();
        if !(lo < hi) {
            return out;
        }
        let mut i = if lo <= self.breaks[0] { 0 } else { self.piece_index(lo) };
        // When lo sits exactly on an edge, the next piece starts there.
        if i < self.pieces.len() && self.breaks[i + 1] <= lo {
            i += 1;
        }
        while i < self.pieces.len() {
            let a = self.breaks[i].max(lo);
            let b = self.breaks[i + 1].min(hi);
            if a < b {
                out.push((a, b, self.pieces[i]));
            }
            if self.breaks[i + 1] >= hi {
                break;
            }
            i += 1;
        }
        out
    }

    /// Log-spaced sample points per piece, including every right edge.
    pub fn sample_points(&self, per_piece: usize) -> Vec<R> {
        let mut pts: Vec<R> = Vec::new();
        for i in 0..self.pieces.len() {
            let b1 = self.breaks[i];
            let b2 = self.breaks[i + 1];
            let lo = if b1 > R::zero() {
                b1 * (R::one() + lit(1e-9))
            } else if b2.is_finite() {
                b2 * lit(1e-9)
            } else {
                lit(1e-8)
            };
            let hi = if b2.is_finite() { b2 } else { lit::<R>(1e8).max(lo * lit(1e6)) };
            pts.extend(log_grid(lo, hi, per_piece.max(2)));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    fn trend_cell(&self, t: R) -> usize {
        self.cells[self.piece_index(t)]
    }

    /// Regularity scan: sup of `W(u) / (u w(u))` over samples. Regular
    /// weights answer `(true, C)` with the observed constant.
    pub fn is_regular(&self, cfg: &ScanConfig<R>) -> RegularityVerdict<R> {
        let mut scan = PeakScan::new(self);
        for u in self.sample_points(cfg.per_piece) {
            let w = self.eval(u).expect("sample in domain");
            if w == R::zero() {
                // W frozen but positive: the ratio is already unbounded.
                scan.unbounded(u);
                break;
            }
            let ratio = self.cumulative(u).expect("sample in domain") / (u * w);
            scan.record(self.trend_cell(u), u, ratio);
        }
        let (bounded, constant, witness) = scan.verdict(cfg);
        RegularityVerdict { regular: bounded, constant, witness }
    }

    /// Doubling scan for 1/w: sup of `w(t)/w(2t)` over samples with `2t`
    /// inside the domain.
    pub fn inv_w_delta2(&self, cfg: &ScanConfig<R>) -> InvDelta2Verdict<R> {
        let two = lit::<R>(2.0);
        let mut scan = PeakScan::new(self);
        for t in self.sample_points(cfg.per_piece) {
            if two * t > self.domain_end() {
                continue;
            }
            let w1 = self.eval(t).expect("sample in domain");
            let w2 = self.eval(two * t).expect("doubled sample in domain");
            if w1 == R::zero() {
                continue;
            }
            if w2 == R::zero() {
                scan.unbounded(t);
                break;
            }
            scan.record(self.trend_cell(t), t, w1 / w2);
        }
        let (bounded, constant, witness) = scan.verdict(cfg);
        InvDelta2Verdict { bounded, constant, witness }
    }

    /// Control scan: sup over a (c, t) grid of
    /// `phi(c/w(2t)) w(2t) / (phi(c/w(t)) w(t))`.
    pub fn is_phi_controlled(&self, phi: &OrliczFn<R>, cfg: &ScanConfig<R>) -> ControlVerdict<R> {
        let two = lit::<R>(2.0);
        let mut scan = PeakScan::new(self);
        let mut witness_c = R::one();
        'outer: for t in self.sample_points(cfg.per_piece) {
            if two * t > self.domain_end() {
                continue;
            }
            let w1 = self.eval(t).expect("sample in domain");
            let w2 = self.eval(two * t).expect("doubled sample in domain");
            if w1 == R::zero() || w2 == R::zero() {
                continue;
            }
            for c in log_grid(cfg.c_lo, cfg.c_hi, cfg.c_points) {
                let rhs = phi.eval(c / w1) * w1;
                let lhs = phi.eval(c / w2) * w2;
                if !rhs.is_finite() || !(rhs > R::zero()) {
                    continue;
                }
                if !lhs.is_finite() {
                    scan.unbounded(t);
                    witness_c = c;
                    break 'outer;
                }
                if scan.record(self.trend_cell(t), t, lhs / rhs) {
                    witness_c = c;
                }
            }
        }
        let (bounded, constant, witness) = scan.verdict(cfg);
        ControlVerdict { controlled: bounded, constant, witness: witness.map(|t| (witness_c, t)) }
    }

    /// The envelope weight `t -> W(t)/t`, dominating every decreasing
    /// function submajorized by w.
    ///
    /// Exact for constant and pure power weights. Otherwise a step
    /// overestimate on a per-piece geometric refinement (left-endpoint
    /// values of the decreasing W/t), with exact hyperbolic tails where W is
    /// constant; the result dominates the true W/t pointwise, which is the
    /// direction the envelope lower bound needs.
    pub fn w1_envelope(&self, per_piece: usize) -> Result<Weight<R>> {
        match (&self.spec, self.pieces.as_slice()) {
            (WSpec::Constant(_), _) => return Ok(self.clone()),
            (_, [Piece::Pow { scale, gamma }]) if self.breaks[0] == R::zero() => {
                let s1 = *scale / (R::one() - *gamma);
                return Weight::from_parts(
                    WSpec::Pieces,
                    self.breaks.clone(),
                    vec![Piece::Pow { scale: s1, gamma: *gamma }],
                    self.cells.clone(),
                    R::zero(),
                    self.truncated,
                );
            }
            _ => {}
        }
        let per_piece = per_piece.max(2);
        let mut breaks: Vec<R> = vec![self.breaks[0]];
        let mut pieces: Vec<Piece<R>> = Vec::new();
        let mut cells: Vec<usize> = Vec::new();
        let mut last_value = R::infinity();
        let push = |breaks: &mut Vec<R>, pieces: &mut Vec<Piece<R>>, cells: &mut Vec<usize>, b: R, p: Piece<R>, c: usize| {
            breaks.push(b);
            pieces.push(p);
            cells.push(c);
        };
        for i in 0..self.pieces.len() {
            let b1 = self.breaks[i];
            let b2 = self.breaks[i + 1];
            let cell = self.cells[i];
            if let Piece::Const(c) = self.pieces[i] {
                if c == R::zero() {
                    // W constant here: W/t is exactly W(b1)/t.
                    let mass = self.cum[i];
                    push(&mut breaks, &mut pieces, &mut cells, b2, Piece::Pow { scale: mass, gamma: R::one() }, cell);
                    last_value = if b2.is_finite() { mass / b2 } else { R::zero() };
                    continue;
                }
            }
            if b1 == R::zero() {
                // Near the origin W/t tends to the leading value; start the
                // refinement one grid ratio in.
                let lead = self.pieces[i].eval(b2 * lit(1e-9));
                debug_assert!(lead.is_finite());
                let g1 = if b2.is_finite() { b2 * lit(0.5) } else { R::one() };
                let v = lead.min(last_value);
                push(&mut breaks, &mut pieces, &mut cells, g1, Piece::Const(v), cell);
                last_value = v;
                let grid: Vec<R> = log_grid(g1, if b2.is_finite() { b2 } else { lit(1e9) }, per_piece).collect();
                for j in 1..grid.len() {
                    let v = (self.cumulative(grid[j - 1]).unwrap() / grid[j - 1]).min(last_value);
                    push(&mut breaks, &mut pieces, &mut cells, grid[j], Piece::Const(v), cell);
                    last_value = v;
                }
                if !b2.is_finite() {
                    let t_cap = *grid.last().unwrap();
                    let v = (self.cumulative(t_cap).unwrap() / t_cap).min(last_value);
                    push(&mut breaks, &mut pieces, &mut cells, R::infinity(), Piece::Const(v), cell);
                    last_value = v;
                }
                continue;
            }
            let hi = if b2.is_finite() { b2 } else { b1 * lit(1e9) };
            let grid: Vec<R> = log_grid(b1, hi, per_piece + 1).collect();
            for j in 1..grid.len() {
                let v = (self.cumulative(grid[j - 1]).unwrap() / grid[j - 1]).min(last_value);
                push(&mut breaks, &mut pieces, &mut cells, grid[j], Piece::Const(v), cell);
                last_value = v;
            }
            if !b2.is_finite() {
                let t_cap = *grid.last().unwrap();
                let v = (self.cumulative(t_cap).unwrap() / t_cap).min(last_value);
                push(&mut breaks, &mut pieces, &mut cells, R::infinity(), Piece::Const(v), cell);
                last_value = v;
            }
        }
        Weight::from_parts(WSpec::Pieces, breaks, pieces, cells, self.cum[0], self.truncated)
    }
}

/// Shared grid/ceiling configuration for the weight scans.
#[derive(Debug, Clone)]
pub struct ScanConfig<R> {
    /// Suprema above this are unbounded outright.
    pub ceiling: R,
    /// Sample count per analytic piece.
    pub per_piece: usize,
    /// Scalar grid for the control scan.
    pub c_lo: R,
    pub c_hi: R,
    pub c_points: usize,
    /// Cells inspected by the divergence-trend test.
    pub trend_window: usize,
    /// Minimal growth across the window to call the trend divergent.
    pub trend_factor: R,
}

impl<R: Real> Default for ScanConfig<R> {
    fn default() -> Self {
        ScanConfig {
            ceiling: lit(1e6),
            per_piece: 9,
            c_lo: lit(1e-6),
            c_hi: lit(1e6),
            c_points: 25,
            trend_window: 6,
            trend_factor: lit(1.3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityVerdict<R> {
    pub regular: bool,
    /// Observed supremum (the regularity constant when regular).
    pub constant: R,
    pub witness: Option<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvDelta2Verdict<R> {
    pub bounded: bool,
    pub constant: R,
    pub witness: Option<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlVerdict<R> {
    pub controlled: bool,
    pub constant: R,
    /// Violating (c, t) pair when uncontrolled.
    pub witness: Option<(R, R)>,
}

/// Accumulates per-trend-cell peak ratios and renders a verdict: unbounded
/// if the supremum crosses the ceiling, hits infinity, or the per-cell peaks
/// keep growing toward the singular end.
struct PeakScan<R> {
    /// Per trend cell: (t at peak, peak ratio).
    peaks: Vec<Option<(R, R)>>,
    sup: R,
    arg: R,
    infinite_at: Option<R>,
}

impl<R: Real> PeakScan<R> {
    fn new<S: Real>(w: &Weight<S>) -> Self {
        let n_cells = w.cells.iter().copied().max().unwrap_or(0) + 1;
        PeakScan {
            peaks: vec![None; n_cells],
            sup: R::zero(),
            arg: R::zero(),
            infinite_at: None,
        }
    }

    /// Returns true when this sample set a new global supremum.
    fn record(&mut self, cell: usize, t: R, ratio: R) -> bool {
        match &mut self.peaks[cell] {
            Some((pt, pr)) => {
                if ratio > *pr {
                    *pt = t;
                    *pr = ratio;
                }
            }
            slot => *slot = Some((t, ratio)),
        }
        if ratio > self.sup {
            self.sup = ratio;
            self.arg = t;
            true
        } else {
            false
        }
    }

    fn unbounded(&mut self, t: R) {
        self.infinite_at = Some(t);
    }

    /// (bounded, observed constant, witness).
    fn verdict(&self, cfg: &ScanConfig<R>) -> (bool, R, Option<R>) {
        if let Some(t) = self.infinite_at {
            return (false, R::infinity(), Some(t));
        }
        if self.sup > cfg.ceiling {
            return (false, self.sup, Some(self.arg));
        }
        // Trend: peaks ordered toward the singular end must not keep
        // growing; a margin keeps float jitter from faking growth.
        let seq: Vec<(R, R)> = self.peaks.iter().flatten().copied().collect();
        if seq.len() >= 4 {
            let w = cfg.trend_window.min(seq.len());
            let tail = &seq[seq.len() - w..];
            let margin = R::one() + lit(1e-6);
            let growing = tail.windows(2).all(|p| p[1].1 > p[0].1 * margin)
                && tail[w - 1].1 >= tail[0].1 * cfg.trend_factor;
            if growing {
                return (false, self.sup, Some(tail[w - 1].0));
            }
        }
        (true, self.sup, None)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum WeightDto {
    Constant { c: f64 },
    Power { gamma: f64 },
    Step { breakpoints: Vec<ExtReal<f64>>, values: Vec<f64> },
    Example314 {
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
    Example415 {
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
    Pieces {
        breakpoints: Vec<ExtReal<f64>>,
        pieces: Vec<PieceDto>,
        cells: Vec<usize>,
        floor_mass: f64,
        truncated: bool,
    },
}

fn default_kmax() -> usize {
    DEFAULT_KMAX
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PieceDto {
    Const(f64),
    Pow { scale: f64, gamma: f64 },
}

fn edge_to_ext<R: Real>(b: R) -> ExtReal<f64> {
    if b.is_finite() {
        ExtReal::new(wide(b))
    } else {
        ExtReal::infinity()
    }
}

fn edge_from_ext<R: Real>(b: &ExtReal<f64>) -> R {
    if b.is_infinite() {
        R::infinity()
    } else {
        lit(b.value())
    }
}

impl<R: Real> Serialize for Weight<R> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = match &self.spec {
            WSpec::Constant(c) => WeightDto::Constant { c: wide(*c) },
            WSpec::Power(g) => WeightDto::Power { gamma: wide(*g) },
            WSpec::Step(f) => WeightDto::Step {
                breakpoints: f.breakpoints().iter().map(|&b| edge_to_ext(b)).collect(),
                values: f.values().iter().map(|&v| wide(v)).collect(),
            },
            WSpec::Example314(k) => WeightDto::Example314 { kmax: *k },
            WSpec::Example415(k) => WeightDto::Example415 { kmax: *k },
            WSpec::Pieces => WeightDto::Pieces {
                breakpoints: self.breaks.iter().map(|&b| edge_to_ext(b)).collect(),
                pieces: self
                    .pieces
                    .iter()
                    .map(|p| match *p {
                        Piece::Const(c) => PieceDto::Const(wide(c)),
                        Piece::Pow { scale, gamma } => PieceDto::Pow { scale: wide(scale), gamma: wide(gamma) },
                    })
                    .collect(),
                cells: self.cells.clone(),
                floor_mass: wide(self.cum[0]),
                truncated: self.truncated,
            },
        };
        dto.serialize(serializer)
    }
}

impl<'de, R: Real> Deserialize<'de> for Weight<R> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = WeightDto::deserialize(deserializer)?;
        let built = match dto {
            WeightDto::Constant { c } => Weight::constant(lit(c)),
            WeightDto::Power { gamma } => Weight::power(lit(gamma)),
            WeightDto::Step { breakpoints, values } => {
                let breaks: Vec<R> = breakpoints.iter().map(edge_from_ext).collect();
                let values: Vec<R> = values.iter().map(|&v| lit(v)).collect();
                StepFn::new(breaks, values).and_then(Weight::step)
            }
            WeightDto::Example314 { kmax } => Weight::example314(kmax),
            WeightDto::Example415 { kmax } => Weight::example415(kmax),
            WeightDto::Pieces { breakpoints, pieces, cells, floor_mass, truncated } => {
                let breaks: Vec<R> = breakpoints.iter().map(edge_from_ext).collect();
                let pieces: Vec<Piece<R>> = pieces
                    .iter()
                    .map(|p| match *p {
                        PieceDto::Const(c) => Piece::Const(lit(c)),
                        PieceDto::Pow { scale, gamma } => Piece::Pow { scale: lit(scale), gamma: lit(gamma) },
                    })
                    .collect();
                Weight::from_parts(WSpec::Pieces, breaks, pieces, cells, lit(floor_mass), truncated)
            }
        };
        built.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> ScanConfig<f64> {
        ScanConfig::default()
    }

    #[test]
    fn constant_weight_is_exactly_regular() {
        let w = Weight::constant(1.0).unwrap();
        assert_eq!(w.eval(0.3).unwrap(), 1.0);
        assert_eq!(w.cumulative(0.3).unwrap(), 0.3);
        let v = w.is_regular(&cfg());
        assert!(v.regular);
        assert_eq!(v.constant, 1.0);
        assert!(w.inv_w_delta2(&cfg()).bounded);
    }

    #[test]
    fn sqrt_weight_regular_with_constant_two() {
        let w = Weight::power(0.5).unwrap();
        assert_relative_eq!(w.eval(4.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(w.cumulative(4.0).unwrap(), 4.0, max_relative = 1e-15);
        let v = w.is_regular(&cfg());
        assert!(v.regular);
        assert_relative_eq!(v.constant, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn step_weight_domain_and_mass() {
        let f = StepFn::new(vec![0.0, 1.0, 2.0], vec![4.0, 1.0]).unwrap();
        let w = Weight::step(f).unwrap();
        assert_eq!(w.eval(0.5).unwrap(), 4.0);
        assert_eq!(w.eval(1.0).unwrap(), 4.0);
        assert_eq!(w.eval(1.5).unwrap(), 1.0);
        assert!(w.eval(2.5).is_err());
        assert_eq!(w.cumulative(1.5).unwrap(), 4.5);
        assert_eq!(w.total_mass().value(), 5.0);
        assert!(Weight::step(StepFn::new(vec![0.0, 1.0, 2.0], vec![1.0, 4.0]).unwrap()).is_err());
    }

    #[test]
    fn catalog_314_matches_hand_values() {
        let w = Weight::<f64>::example314(8).unwrap();
        assert_eq!(w.domain_end(), 1.0);
        assert_eq!(w.truncation_floor().unwrap(), 2f64.powi(-162));
        assert_eq!(w.eval(1.0).unwrap(), 1.0);
        assert_eq!(w.eval(0.25).unwrap(), 2.0);
        // Right edge of cell k carries 2^(k^2) and sits at 4^-k^2.
        for k in 1..=8 {
            let tk = 2f64.powi(-2 * (k * k) as i32);
            let ratio = w.eval(tk).unwrap() / w.eval(2.0 * tk).unwrap();
            assert_eq!(ratio, 2f64.powi(2 * k as i32 - 1));
            assert!(w.eval(tk).unwrap() <= tk.powf(-0.5) * (1.0 + 1e-12));
        }
        assert!(w.eval(2f64.powi(-163)).is_err());
    }


    #[test]
    fn catalog_314_verdicts() {
        let w = Weight::<f64>::example314(8).unwrap();
        let d = w.inv_w_delta2(&cfg());
        assert!(!d.bounded);
        // Witness is a right edge 4^-k^2.
        let t = d.witness.unwrap();
        assert_eq!(t, 2f64.powi(-128));
        assert_eq!(d.constant, 2f64.powi(15));
        assert!(!w.is_regular(&cfg()).regular);
    }

    #[test]
    fn catalog_415_continuity_and_verdicts() {
        let w = Weight::<f64>::example415(8).unwrap();
        // Continuous at every interior breakpoint.
        for &b in &w.breakpoints()[1..w.breakpoints().len() - 1] {
            let left = w.eval(b).unwrap();
            let right = w.eval(b * (1.0 + 1e-12)).unwrap();
            assert_relative_eq!(left, right, max_relative = 1e-9);
        }
        // Bounded by t^-1/2 and cumulative finite.
        for &b in w.breakpoints()[1..].iter() {
            assert!(w.eval(b).unwrap() <= b.powf(-0.5) * (1.0 + 1e-12));
        }
        assert!(w.total_mass().value() < 2.0);
        let d = w.inv_w_delta2(&cfg());
        assert!(d.bounded, "doubling of 1/w holds, got sup {}", d.constant);
        assert_relative_eq!(d.constant, 2.0, max_relative = 1e-9);
        let r = w.is_regular(&cfg());
        assert!(!r.regular, "hyperbolic pieces defeat regularity, sup {}", r.constant);
    }

    #[test]
    fn catalog_415_dilation_index_is_minus_one() {
        let w = Weight::<f64>::example415(8).unwrap();
        let floor = w.truncation_floor().unwrap();
        let cfg = crate::orlicz::IndexConfig::default();
        let (alpha, _) = crate::orlicz::matuszewska_indices(
            |t| w.eval(t).unwrap_or(f64::NAN),
            floor,
            1.0,
            &cfg,
        );
        assert_relative_eq!(alpha, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn phi_control_verdicts() {
        let sq = OrliczFn::power(2.0).unwrap();
        let lin = OrliczFn::power(1.0).unwrap();
        let c = Weight::constant(3.0).unwrap().is_phi_controlled(&sq, &cfg());
        assert!(c.controlled);
        assert_relative_eq!(c.constant, 1.0, max_relative = 1e-12);
        let w314 = Weight::<f64>::example314(8).unwrap();
        let l = w314.is_phi_controlled(&lin, &cfg());
        assert!(l.controlled);
        assert_relative_eq!(l.constant, 1.0, max_relative = 1e-12);
        let s = w314.is_phi_controlled(&sq, &cfg());
        assert!(!s.controlled);
        assert!(s.witness.is_some());
    }

    #[test]
    fn envelope_weight_constant_and_power_exact() {
        let w = Weight::constant(2.0).unwrap();
        let w1 = w.w1_envelope(8).unwrap();
        assert_eq!(w1.eval(0.7).unwrap(), 2.0);
        let p = Weight::power(0.5).unwrap();
        let p1 = p.w1_envelope(8).unwrap();
        // W(t)/t = 2 t^-1/2.
        assert_relative_eq!(p1.eval(4.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn envelope_weight_step_gets_exact_hyperbolic_tail() {
        let f = StepFn::new(vec![0.0, 1.0, f64::INFINITY], vec![2.0, 0.0]).unwrap();
        let w = Weight::step(f).unwrap();
        let w1 = w.w1_envelope(8).unwrap();
        // Past the support W = 2, so W/t = 2/t exactly.
        assert_relative_eq!(w1.eval(4.0).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(w1.eval(100.0).unwrap(), 0.02, max_relative = 1e-12);
        // Inside the support the step overestimates W/t = 2.
        assert!(w1.eval(0.5).unwrap() >= 2.0);
        assert!(w1.eval(0.5).unwrap() <= 2.0 * (1.0 + 1e-9));
    }

    #[test]
    fn envelope_weight_dominates_and_decreases() {
        for w in [
            Weight::<f64>::example314(6).unwrap(),
            Weight::<f64>::example415(6).unwrap(),
        ] {
            let w1 = w.w1_envelope(8).unwrap();
            let mut prev = f64::INFINITY;
            for t in w.sample_points(7) {
                let a = w1.eval(t).unwrap();
                assert!(a <= prev * (1.0 + 1e-12));
                assert!(a * (1.0 + 1e-9) >= w.eval(t).unwrap());
                prev = a;
            }
        }
    }

    #[test]
    fn json_round_trips() {
        let w: Weight<f64> = serde_json::from_str(r#"{"kind":"constant","c":1.0}"#).unwrap();
        assert_eq!(w.eval(0.5).unwrap(), 1.0);
        let w: Weight<f64> = serde_json::from_str(r#"{"kind":"example314"}"#).unwrap();
        assert_eq!(w.eval(0.25).unwrap(), 2.0);
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("example314"));
        let w: Weight<f64> =
            serde_json::from_str(r#"{"kind":"step","breakpoints":[0.0,1.0,"inf"],"values":[2.0,0.0]}"#)
                .unwrap();
        assert_eq!(w.eval(10.0).unwrap(), 0.0);
        let back = serde_json::to_string(&w).unwrap();
        let again: Weight<f64> = serde_json::from_str(&back).unwrap();
        assert_eq!(w, again);
        // Derived piece weights round-trip through the pieces kind.
        let w1 = w.w1_envelope(4).unwrap();
        let s1 = serde_json::to_string(&w1).unwrap();
        let w1b: Weight<f64> = serde_json::from_str(&s1).unwrap();
        assert_eq!(w1, w1b);
    }
}
