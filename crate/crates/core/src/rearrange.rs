//! Distribution functions, decreasing rearrangements, dilation, and
//! submajorization for step functions.
//!
//! Everything here is exact rational-style arithmetic on cell data: sorting,
//! prefix sums, and merged-grid comparisons. No tolerances; callers that
//! want fuzz add it themselves.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::orlicz::OrliczFn;
use crate::scalar::Real;
use crate::step::{Seq, StepFn};
use rand::seq::SliceRandom;
use rand::Rng;

/// Measure of the strict super-level set `{ |f| > s }`.
pub fn dist<R: Real>(f: &StepFn<R>, s: R) -> ExtReal<R> {
    debug_assert!(s >= R::zero());
    f.cells()
        .filter(|&(_, _, v)| v > s)
        .map(|(lo, hi, _)| {
            if hi.is_finite() {
                ExtReal::new(hi - lo)
            } else {
                ExtReal::infinity()
            }
        })
        .sum()
}

/// The nonincreasing function equimeasurable with `|f|`, in canonical form
/// (adjacent equal cells merged).
///
/// A positive value carried on an infinite cell floods every level below
/// it: finite cells with values at or below it disappear from the
/// rearrangement, exactly as the distribution function demands
/// (`dist(f, s)` is infinite for every `s` under that value).
pub fn decreasing_rearrangement<R: Real>(f: &StepFn<R>) -> StepFn<R> {
    let end = f.domain_end();
    let inf_level = if end.is_finite() {
        R::zero()
    } else {
        *f.values().last().unwrap()
    };
    let mut finite: Vec<(R, R)> = f
        .cells()
        .filter(|&(_, hi, _)| hi.is_finite())
        .map(|(lo, hi, v)| (hi - lo, v))
        .collect();
    // Stable sort by value, descending: ties keep original cell order.
    finite.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    let mut breaks = vec![R::zero()];
    let mut values = Vec::new();
    let mut acc = R::zero();
    for (len, v) in finite {
        if !end.is_finite() && v <= inf_level {
            break;
        }
        acc = acc + len;
        breaks.push(acc);
        values.push(v);
    }
    if end.is_finite() {
        // Preserve the domain exactly; pad with zero if values ran short.
        if *breaks.last().unwrap() < end {
            breaks.push(end);
            values.push(R::zero());
        } else {
            *breaks.last_mut().unwrap() = end;
        }
    } else {
        breaks.push(R::infinity());
        values.push(inf_level);
    }
    StepFn::new(breaks, values)
        .expect("rearranged cells form a valid step function")
        .canonicalized()
}

/// Descending sort of the sequence entries.
pub fn seq_rearrangement<R: Real>(x: &Seq<R>) -> Seq<R> {
    let mut e = x.entries().to_vec();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Seq::new(e).expect("sorted copy of a valid sequence")
}

/// Dilation: `(D2 f)(t) = f(t/2)`; breakpoints double.
pub fn dilate2<R: Real>(f: &StepFn<R>) -> StepFn<R> {
    let two = R::one() + R::one();
    let breaks = f.breakpoints().iter().map(|&b| b * two).collect();
    StepFn::new(breaks, f.values().to_vec()).expect("doubled breakpoints stay valid")
}

/// Sequence dilation: every entry duplicated.
pub fn dilate2_seq<R: Real>(x: &Seq<R>) -> Seq<R> {
    let mut out = Vec::with_capacity(2 * x.len());
    for &v in x.entries() {
        out.push(v);
        out.push(v);
    }
    Seq::new(out).expect("duplicated entries of a valid sequence")
}

/// `int_0^t f`, exact prefix integral of a step function at finite `t`.
pub fn prefix_integral<R: Real>(f: &StepFn<R>, t: R) -> R {
    debug_assert!(t >= R::zero() && t.is_finite());
    let mut acc = R::zero();
    for (lo, hi, v) in f.cells() {
        if t <= lo {
            break;
        }
        acc = acc + v * (hi.min(t) - lo);
    }
    acc
}

/// Does `g` lie below `f` in the submajorization order:
/// `int_0^t g* <= int_0^t f*` for every `t`?
///
/// Both prefix integrals are piecewise linear and concave, so comparison at
/// the merged kinks plus the two tail slopes decides the whole half-line.
pub fn submajorizes<R: Real>(g: &StepFn<R>, f: &StepFn<R>) -> bool {
    let gs = decreasing_rearrangement(g);
    let fs = decreasing_rearrangement(f);
    let mut kinks: Vec<R> = gs
        .breakpoints()
        .iter()
        .chain(fs.breakpoints())
        .copied()
        .filter(|b| b.is_finite() && *b > R::zero())
        .collect();
    kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    kinks.dedup();
    for t in kinks {
        if prefix_integral(&gs, t) > prefix_integral(&fs, t) {
            return false;
        }
    }
    let tail = |h: &StepFn<R>| {
        if h.domain_end().is_finite() {
            R::zero()
        } else {
            *h.values().last().unwrap()
        }
    };
    tail(&gs) <= tail(&fs)
}

fn value_or_zero<R: Real>(f: &StepFn<R>, t: R) -> R {
    if t > f.domain_end() {
        R::zero()
    } else {
        f.value_at(t).expect("t checked against the domain")
    }
}

/// Exact `int |f g|`; functions are zero beyond their own domains.
pub fn integral_product<R: Real>(f: &StepFn<R>, g: &StepFn<R>) -> ExtReal<R> {
    let mut edges: Vec<R> = f
        .breakpoints()
        .iter()
        .chain(g.breakpoints())
        .copied()
        .filter(|b| b.is_finite())
        .collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let mut acc = ExtReal::zero();
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        // Right-closed cells: the value on (a, b] is the value at b.
        let prod = value_or_zero(f, b) * value_or_zero(g, b);
        acc += ExtReal::new(prod * (b - a));
    }
    if !f.domain_end().is_finite() && !g.domain_end().is_finite() {
        let vf = *f.values().last().unwrap();
        let vg = *g.values().last().unwrap();
        acc += ExtReal::new(vf * vg) * ExtReal::infinity();
    }
    acc
}

/// Both sides of the rearrangement pairing bound: `int |f g|` and
/// `int f* g*`. The first never exceeds the second.
pub fn hardy_littlewood_check<R: Real>(
    f: &StepFn<R>,
    g: &StepFn<R>,
) -> (ExtReal<R>, ExtReal<R>) {
    let lhs = integral_product(f, g);
    let rhs = integral_product(
        &decreasing_rearrangement(f),
        &decreasing_rearrangement(g),
    );
    (lhs, rhs)
}

/// The two-point exchange comparison behind the permutation minimum: with
/// `s1 > s2` and `t1 > t2`, pairing like with like is cheaper:
/// `phi(s1/t1) t1 + phi(s2/t2) t2 <= phi(s1/t2) t2 + phi(s2/t1) t1`.
/// Returns (sorted side, swapped side).
pub fn exchange_inequality<R: Real>(
    s1: R,
    s2: R,
    t1: R,
    t2: R,
    phi: &OrliczFn<R>,
) -> Result<(R, R)> {
    if !(s1 > s2 && s2 > R::zero()) {
        return Err(Error::Precondition(format!(
            "exchange needs s1 > s2 > 0, got ({s1}, {s2})"
        )));
    }
    if !(t1 > t2 && t2 > R::zero()) {
        return Err(Error::Precondition(format!(
            "exchange needs t1 > t2 > 0, got ({t1}, {t2})"
        )));
    }
    let sorted = phi.eval(s1 / t1) * t1 + phi.eval(s2 / t2) * t2;
    let swapped = phi.eval(s1 / t2) * t2 + phi.eval(s2 / t1) * t1;
    Ok((sorted, swapped))
}

/// A bijection of `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidConstruction(format!(
                    "not a bijection: image {i} out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn random<G: Rng>(n: usize, rng: &mut G) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `y(i) = x(sigma(i))`; the input is zero-padded up to the
    /// permutation's length.
    pub fn apply_seq<R: Real>(&self, x: &Seq<R>) -> Seq<R> {
        let out = self
            .images
            .iter()
            .map(|&j| x.get(j))
            .collect::<Vec<R>>();
        Seq::new(out).expect("permuted copy of a valid sequence")
    }
}

/// Reorders the cells of a finite-domain step function; the result is
/// equimeasurable with the input.
pub fn permute_cells<R: Real>(f: &StepFn<R>, sigma: &Permutation) -> Result<StepFn<R>> {
    if !f.domain_end().is_finite() {
        return Err(Error::Precondition(
            "cell permutation needs a finite domain".into(),
        ));
    }
    if sigma.len() != f.num_cells() {
        return Err(Error::DomainMismatch(format!(
            "permutation of length {} against {} cells",
            sigma.len(),
            f.num_cells()
        )));
    }
    let cells: Vec<(R, R)> = f.cells().map(|(lo, hi, v)| (hi - lo, v)).collect();
    let mut breaks = vec![R::zero()];
    let mut values = Vec::new();
    let mut acc = R::zero();
    for i in 0..cells.len() {
        let (len, v) = cells[sigma.image(i)];
        acc = acc + len;
        breaks.push(acc);
        values.push(v);
    }
    *breaks.last_mut().unwrap() = f.domain_end();
    StepFn::new(breaks, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn steps(breaks: &[f64], values: &[f64]) -> StepFn<f64> {
        StepFn::new(breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn dist_counts_superlevel_measure() {
        let f = steps(&[0.0, 1.0, 2.0], &[2.0, 5.0]);
        assert_eq!(dist(&f, 3.0), ExtReal::new(1.0));
        assert_eq!(dist(&f, 5.0), ExtReal::zero());
        let flat = steps(&[0.0, f64::INFINITY], &[1.0]);
        assert!(dist(&flat, 0.5).is_infinite());
    }

    #[test]
    fn rearrangement_sorts_and_is_idempotent() {
        let x = Seq::new(vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(seq_rearrangement(&x).entries(), &[3.0, 2.0, 1.0]);
        let f = steps(&[0.0, 1.0, 2.0], &[2.0, 5.0]);
        let fs = decreasing_rearrangement(&f);
        assert_eq!(fs, steps(&[0.0, 1.0, 2.0], &[5.0, 2.0]));
        assert_eq!(decreasing_rearrangement(&fs), fs);
        // A nonincreasing function is a fixed point.
        let dec = steps(&[0.0, 0.5, 2.0, 3.0], &[4.0, 1.0, 0.5]);
        assert_eq!(decreasing_rearrangement(&dec), dec);
    }

    #[test]
    fn rearrangement_respects_infinite_levels() {
        // Value below the infinite-cell level disappears.
        let f = steps(&[0.0, 1.0, f64::INFINITY], &[1.0, 3.0]);
        let fs = decreasing_rearrangement(&f);
        assert_eq!(fs, steps(&[0.0, f64::INFINITY], &[3.0]));
        // Value above it stacks in front.
        let g = steps(&[0.0, 1.0, f64::INFINITY], &[5.0, 3.0]);
        assert_eq!(
            decreasing_rearrangement(&g),
            steps(&[0.0, 1.0, f64::INFINITY], &[5.0, 3.0])
        );
    }

    #[test]
    fn equimeasurability_at_all_values() {
        let f = steps(&[0.0, 0.25, 1.0, 1.5, 4.0], &[2.0, 7.0, 2.0, 0.5]);
        let fs = decreasing_rearrangement(&f);
        for s in [0.0, 0.25, 0.5, 2.0, 3.0, 7.0, 8.0] {
            assert_eq!(dist(&f, s), dist(&fs, s));
        }
    }

    #[test]
    fn dilation_doubles_support() {
        let ind = StepFn::indicator(3.0, f64::INFINITY).unwrap();
        assert_eq!(dilate2(&ind), StepFn::indicator(6.0, f64::INFINITY).unwrap());
        let x = Seq::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(dilate2_seq(&x).entries(), &[2.0, 2.0, 1.0, 1.0]);
        assert!(dilate2_seq(&Seq::<f64>::empty()).is_empty());
    }

    #[test]
    fn submajorization_prefix_order() {
        let a = Seq::new(vec![2.0, 2.0]).unwrap().to_step();
        let b = Seq::new(vec![3.0, 1.0]).unwrap().to_step();
        assert!(submajorizes(&a, &b));
        assert!(!submajorizes(&b, &a));
        assert!(submajorizes(&a, &a));
        let c = Seq::new(vec![3.0, 0.0]).unwrap().to_step();
        let d = Seq::new(vec![2.0, 2.0]).unwrap().to_step();
        assert!(!submajorizes(&c, &d));
        assert!(submajorizes(&d, &d));
    }

    #[test]
    fn sum_submajorized_by_dilated_rearrangements() {
        let f = steps(&[0.0, 0.5, 2.0, 4.0], &[1.0, 4.0, 0.25]);
        let g = steps(&[0.0, 1.0, 2.5, 4.0], &[3.0, 0.5, 2.0]);
        let sum = f.compose(&g, |a, b| a + b).unwrap();
        let bound = dilate2(&decreasing_rearrangement(&f))
            .compose(&dilate2(&decreasing_rearrangement(&g)), |a, b| a + b)
            .unwrap();
        assert!(submajorizes(&sum, &bound));
    }

    #[test]
    fn hardy_littlewood_examples() {
        let f = Seq::new(vec![1.0, 2.0]).unwrap().to_step();
        let g = Seq::new(vec![2.0, 1.0]).unwrap().to_step();
        let (lhs, rhs) = hardy_littlewood_check(&f, &g);
        assert_eq!(lhs, ExtReal::new(4.0));
        assert_eq!(rhs, ExtReal::new(5.0));
        // Against a constant, both sides are the plain integral.
        let ones = steps(&[0.0, 2.0], &[1.0]);
        let (l2, r2) = hardy_littlewood_check(&f, &ones);
        assert_eq!(l2, r2);
        assert_eq!(l2, ExtReal::new(3.0));
        // f paired with itself: equality iff already sorted.
        let (l3, r3) = hardy_littlewood_check(&g, &g);
        assert_eq!(l3, r3);
    }

    #[test]
    fn exchange_two_point_example() {
        let sq = OrliczFn::power(2.0).unwrap();
        let (sorted, swapped) = exchange_inequality(2.0, 1.0, 2.0, 1.0, &sq).unwrap();
        assert_eq!(sorted, 3.0);
        assert_eq!(swapped, 4.5);
        let lin = OrliczFn::power(1.0).unwrap();
        let (a, b) = exchange_inequality(5.0, 2.0, 3.0, 1.0, &lin).unwrap();
        assert_eq!(a, 7.0);
        assert_eq!(b, 7.0);
        assert!(exchange_inequality(1.0, 2.0, 2.0, 1.0, &sq).is_err());
    }

    #[test]
    fn permutations_validate_and_permute() {
        assert!(Permutation::new(vec![0, 2, 1]).is_ok());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma = Permutation::random(5, &mut rng);
        let f = steps(&[0.0, 0.5, 1.5, 2.0, 3.0, 3.25], &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let g = permute_cells(&f, &sigma).unwrap();
        for s in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
            assert_eq!(dist(&f, s), dist(&g, s));
        }
        assert_eq!(
            decreasing_rearrangement(&g),
            decreasing_rearrangement(&f)
        );
    }
}
