//! Step functions on `(0, a)` and finite sequences, the two carriers of the
//! library.
//!
//! A [`StepFn`] holds breakpoints `0 = b_0 < b_1 < ... < b_N` (the last may
//! be `inf`) and one nonnegative value per cell `(b_{k-1}, b_k]`. Sequences
//! embed as step functions with unit cells and a zero tail, which lets every
//! sequence statement reuse the function-side code path verbatim.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scalar::{count, lit, wide, Real};
use serde::{Deserialize, Serialize};

/// Nonnegative step function with finitely many cells on `(0, a)`, `a <= inf`.
///
/// Negative input values are absolute-valued at ingestion: every functional
/// in this crate depends on `|f|` only.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn<R> {
    breaks: Vec<R>,
    values: Vec<R>,
}

impl<R: Real> StepFn<R> {
    /// Builds a step function from breakpoints and per-cell values.
    ///
    /// Requires `breaks[0] == 0`, strictly increasing breakpoints with at
    /// most the final one infinite, finite values, and exactly one value per
    /// cell.
    pub fn new(breaks: Vec<R>, values: Vec<R>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidConstruction(
                "need at least one cell (two breakpoints)".into(),
            ));
        }
        if values.len() + 1 != breaks.len() {
            return Err(Error::InvalidConstruction(format!(
                "{} breakpoints require {} values, got {}",
                breaks.len(),
                breaks.len() - 1,
                values.len()
            )));
        }
        if breaks[0] != R::zero() {
            return Err(Error::InvalidConstruction(
                "first breakpoint must be 0".into(),
            ));
        }
        for pair in breaks.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidConstruction(format!(
                    "breakpoints not strictly increasing at {:?} -> {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        for (i, b) in breaks.iter().enumerate() {
            if b.is_nan() || (b.is_infinite() && i + 1 != breaks.len()) {
                return Err(Error::InvalidConstruction(format!(
                    "breakpoint {i} must be finite (only the last may be inf)"
                )));
            }
        }
        let mut values = values;
        for v in &mut values {
            if !v.is_finite() {
                return Err(Error::InvalidConstruction(
                    "cell values must be finite".into(),
                ));
            }
            *v = v.abs();
        }
        Ok(StepFn { breaks, values })
    }

    /// The zero function on `(0, end)`.
    pub fn zero(end: R) -> Self {
        StepFn::new(vec![R::zero(), end], vec![R::zero()]).expect("valid zero step")
    }

    /// Indicator of `(0, t]` inside `(0, end)`, `0 < t <= end`.
    pub fn indicator(t: R, end: R) -> Result<Self> {
        if !(t > R::zero()) || !(t <= end) {
            return Err(Error::OutOfDomain {
                t: wide(t),
                end: wide(end),
            });
        }
        if t == end {
            StepFn::new(vec![R::zero(), end], vec![R::one()])
        } else {
            StepFn::new(vec![R::zero(), t, end], vec![R::one(), R::zero()])
        }
    }

    /// Right end of the domain `(0, a)`; `inf` for unbounded supports.
    #[inline]
    pub fn domain_end(&self) -> R {
        *self.breaks.last().unwrap()
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn breakpoints(&self) -> &[R] {
        &self.breaks
    }

    #[inline]
    pub fn values(&self) -> &[R] {
        &self.values
    }

    /// Cell `k` as `(lo, hi, value)` with `lo < hi`.
    #[inline]
    pub fn cell(&self, k: usize) -> (R, R, R) {
        (self.breaks[k], self.breaks[k + 1], self.values[k])
    }

    pub fn cells(&self) -> impl Iterator<Item = (R, R, R)> + '_ {
        (0..self.num_cells()).map(move |k| self.cell(k))
    }

    /// Value at `t` for `t` in `(0, a]` (cells are right-closed).
    pub fn value_at(&self, t: R) -> Result<R> {
        if !(t > R::zero()) || t > self.domain_end() {
            return Err(Error::OutOfDomain {
                t: wide(t),
                end: wide(self.domain_end()),
            });
        }
        let k = self.breaks[1..].partition_point(|b| *b < t);
        Ok(self.values[k])
    }

    /// Exact integral: sum of `value * length` over cells, with the
    /// `0 * inf = 0` convention on an unbounded zero tail.
    pub fn integrate(&self) -> ExtReal<R> {
        self.cells()
            .map(|(lo, hi, v)| ExtReal::new(v) * ExtReal::new(hi - lo))
            .sum()
    }

    /// True if cell values never increase left to right.
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Total measure of `{ f > 0 }`.
    pub fn support_measure(&self) -> ExtReal<R> {
        self.cells()
            .filter(|&(_, _, v)| v > R::zero())
            .map(|(lo, hi, _)| ExtReal::new(hi - lo))
            .sum()
    }

    /// True if every cell value is zero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == R::zero())
    }

    /// Canonical form: adjacent cells with equal values merged.
    pub fn canonicalized(&self) -> Self {
        let mut breaks = vec![self.breaks[0]];
        let mut values = Vec::new();
        for (_, hi, v) in self.cells() {
            if values.last() == Some(&v) {
                *breaks.last_mut().unwrap() = hi;
            } else {
                values.push(v);
                breaks.push(hi);
            }
        }
        StepFn { breaks, values }
    }

    /// Values scaled by `|c|`; breakpoints unchanged.
    pub fn scale(&self, c: R) -> Self {
        let c = c.abs();
        StepFn {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| *v * c).collect(),
        }
    }

    /// `f * indicator(0, t]`: values beyond `t` replaced by zero.
    /// `t` must be a breakpoint or lie inside the domain.
    pub fn truncated(&self, t: R) -> Result<Self> {
        if !(t > R::zero()) || t > self.domain_end() {
            return Err(Error::OutOfDomain {
                t: wide(t),
                end: wide(self.domain_end()),
            });
        }
        let ind = StepFn::indicator(t, self.domain_end())?;
        self.compose(&ind, |a, b| a * b)
    }

    /// Pointwise combination on the merged breakpoint grid.
    ///
    /// Rejects mismatched domains. The result is absolute-valued, matching
    /// ingestion: operations like pointwise difference yield `|f - g|`.
    pub fn compose(&self, other: &Self, op: impl Fn(R, R) -> R) -> Result<Self> {
        if self.domain_end() != other.domain_end() {
            return Err(Error::DomainMismatch(format!(
                "(0, {:e}) vs (0, {:e})",
                wide(self.domain_end()),
                wide(other.domain_end())
            )));
        }
        let mut breaks = vec![R::zero()];
        let mut values = Vec::new();
        for (_, hi, a, b) in merged_cells(self, other) {
            values.push(op(a, b).abs());
            breaks.push(hi);
        }
        StepFn::new(breaks, values)
    }
}

/// Iterates the merged cell grid of two step functions on the same domain,
/// yielding `(lo, hi, value_f, value_g)`.
pub(crate) fn merged_cells<'a, R: Real>(
    f: &'a StepFn<R>,
    g: &'a StepFn<R>,
) -> impl Iterator<Item = (R, R, R, R)> + 'a {
    debug_assert!(f.domain_end() == g.domain_end());
    let mut lo = R::zero();
    let mut i = 0usize;
    let mut j = 0usize;
    std::iter::from_fn(move || {
        if i >= f.num_cells() || j >= g.num_cells() {
            return None;
        }
        let hi_f = f.breaks[i + 1];
        let hi_g = g.breaks[j + 1];
        let hi = hi_f.min(hi_g);
        let out = (lo, hi, f.values[i], g.values[j]);
        if hi_f == hi {
            i += 1;
        }
        if hi_g == hi {
            j += 1;
        }
        lo = hi;
        Some(out)
    })
}

#[derive(Serialize, Deserialize)]
struct StepFnDto {
    breakpoints: Vec<ExtReal<f64>>,
    values: Vec<f64>,
}

impl<R: Real> Serialize for StepFn<R> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = StepFnDto {
            breakpoints: self.breaks.iter().map(|b| ExtReal::new(wide(*b))).collect(),
            values: self.values.iter().map(|v| wide(*v)).collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de, R: Real> Deserialize<'de> for StepFn<R> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = StepFnDto::deserialize(deserializer)?;
        let breaks: Vec<R> = dto.breakpoints.iter().map(|b| lit(b.value())).collect();
        let values: Vec<R> = dto.values.iter().map(|v| lit(*v)).collect();
        StepFn::new(breaks, values).map_err(serde::de::Error::custom)
    }
}

/// Finite nonnegative sequence with an implicit zero tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seq<R> {
    entries: Vec<R>,
}

impl<R: Real> Seq<R> {
    /// Absolute-values the entries and trims the trailing zeros.
    pub fn new(entries: impl Into<Vec<R>>) -> Result<Self> {
        let mut entries: Vec<R> = entries.into();
        for e in &mut entries {
            if !e.is_finite() {
                return Err(Error::InvalidConstruction(
                    "sequence entries must be finite".into(),
                ));
            }
            *e = e.abs();
        }
        while entries.last() == Some(&R::zero()) {
            entries.pop();
        }
        Ok(Seq { entries })
    }

    pub fn empty() -> Self {
        Seq { entries: Vec::new() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `x(n)` with the zero tail, `n` zero-based.
    #[inline]
    pub fn get(&self, n: usize) -> R {
        self.entries.get(n).copied().unwrap_or(R::zero())
    }

    #[inline]
    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    /// Embedding into `(0, inf)`: cell `(n-1, n]` carries `x(n)`, then a
    /// zero tail cell out to infinity.
    pub fn to_step(&self) -> StepFn<R> {
        let n = self.entries.len();
        let mut breaks = Vec::with_capacity(n + 2);
        for k in 0..=n {
            breaks.push(count(k));
        }
        breaks.push(R::infinity());
        let mut values = self.entries.clone();
        values.push(R::zero());
        StepFn::new(breaks, values).expect("unit-cell embedding is always valid")
    }

    /// Inverse of [`Seq::to_step`] for unit-cell step functions produced by it.
    pub fn from_unit_step(f: &StepFn<R>) -> Result<Self> {
        let mut entries = Vec::new();
        for (lo, hi, v) in f.cells() {
            if hi.is_infinite() {
                if v != R::zero() {
                    return Err(Error::InvalidConstruction(
                        "tail cell of a sequence embedding must carry 0".into(),
                    ));
                }
                break;
            }
            let w = hi - lo;
            if w != R::one() || lo != lo.floor() {
                return Err(Error::InvalidConstruction(
                    "not a unit-cell embedding".into(),
                ));
            }
            entries.push(v);
        }
        Seq::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64_step(breaks: &[f64], values: &[f64]) -> StepFn<f64> {
        StepFn::new(breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn construction_validates_breakpoints() {
        assert!(StepFn::new(vec![0.0, 1.0], vec![2.0]).is_ok());
        assert!(StepFn::new(vec![0.5, 1.0], vec![2.0]).is_err());
        assert!(StepFn::new(vec![0.0, 1.0, 1.0], vec![2.0, 1.0]).is_err());
        assert!(StepFn::new(vec![0.0, f64::INFINITY, 2.0], vec![1.0, 1.0]).is_err());
        assert!(StepFn::new(vec![0.0, 1.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn negative_values_absolute_valued() {
        let f = f64_step(&[0.0, 1.0, 2.0], &[-3.0, 4.0]);
        assert_eq!(f.values(), &[3.0, 4.0]);
    }

    #[test]
    fn integrate_exact_and_infinite() {
        let f = f64_step(&[0.0, 0.5, 2.0], &[4.0, 1.0]);
        assert_eq!(f.integrate().value(), 3.5);
        let g = f64_step(&[0.0, 1.0, f64::INFINITY], &[1.0, 0.0]);
        assert_eq!(g.integrate().value(), 1.0);
        let h = f64_step(&[0.0, 1.0, f64::INFINITY], &[1.0, 0.5]);
        assert!(h.integrate().is_infinite());
    }

    #[test]
    fn value_at_respects_right_closed_cells() {
        let f = f64_step(&[0.0, 1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(f.value_at(1.0).unwrap(), 3.0);
        assert_eq!(f.value_at(1.5).unwrap(), 4.0);
        assert_eq!(f.value_at(2.0).unwrap(), 4.0);
        assert!(f.value_at(0.0).is_err());
        assert!(f.value_at(2.5).is_err());
    }

    #[test]
    fn compose_merges_grids_and_rejects_mismatch() {
        let f = f64_step(&[0.0, 1.0, 3.0], &[2.0, 1.0]);
        let g = f64_step(&[0.0, 2.0, 3.0], &[1.0, 5.0]);
        let sum = f.compose(&g, |a, b| a + b).unwrap();
        assert_eq!(sum.breakpoints(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(sum.values(), &[3.0, 2.0, 6.0]);
        let h = f64_step(&[0.0, 4.0], &[1.0]);
        assert!(f.compose(&h, |a, b| a + b).is_err());
    }

    #[test]
    fn canonicalize_merges_equal_neighbors() {
        let f = f64_step(&[0.0, 1.0, 2.0, 3.0], &[2.0, 2.0, 1.0]);
        let c = f.canonicalized();
        assert_eq!(c.breakpoints(), &[0.0, 2.0, 3.0]);
        assert_eq!(c.values(), &[2.0, 1.0]);
    }

    #[test]
    fn seq_round_trip_is_exact() {
        let x = Seq::new(vec![3.0, -4.0, 0.25, 0.0]).unwrap();
        assert_eq!(x.len(), 3);
        let f = x.to_step();
        assert_eq!(f.domain_end(), f64::INFINITY);
        assert_eq!(Seq::from_unit_step(&f).unwrap(), x);
        assert_eq!(f.integrate().value(), 7.25);
    }

    #[test]
    fn step_json_schema_round_trips_with_inf() {
        let f = f64_step(&[0.0, 1.5, f64::INFINITY], &[2.0, 0.0]);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"inf\""));
        let back: StepFn<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let parsed: StepFn<f64> =
            serde_json::from_str(r#"{"breakpoints":[0,1,"inf"],"values":[3,0]}"#).unwrap();
        assert_eq!(parsed.values(), &[3.0, 0.0]);
    }
}
