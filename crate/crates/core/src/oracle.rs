//! Brute-force ground truth at desk scale: exhaustive permutation minima,
//! the balanced-matrix inequality, and a lattice search for the envelope
//! functional. Solvers are validated against these, never the reverse.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::modular::psi;
use crate::orlicz::OrliczFn;
use crate::rearrange::{decreasing_rearrangement, seq_rearrangement, Permutation};
use crate::scalar::{lit, wide, Real};
use crate::step::{Seq, StepFn};
use crate::weight::Weight;

/// Enumeration cap: 8! = 40320 arrangements per instance.
pub const MAX_ENUM: usize = 8;

/// Exact minimum of `sum_i phi(x*(i)/w(sigma(i))) w(sigma(i))` over all
/// permutations sigma of the padded index set, with the argmin.
///
/// Ties resolve to the lexicographically first arrangement, so the result
/// is deterministic.
pub fn min_over_permutations<R: Real>(
    x: &Seq<R>,
    w: &Seq<R>,
    phi: &OrliczFn<R>,
) -> Result<(ExtReal<R>, Permutation)> {
    let xs = seq_rearrangement(x);
    let n = xs.len().max(w.len());
    if n > MAX_ENUM {
        return Err(Error::TooLarge { n, max: MAX_ENUM });
    }
    if n == 0 {
        return Ok((ExtReal::zero(), Permutation::identity(0)));
    }
    let mut best: Option<(ExtReal<R>, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let mut total = ExtReal::zero();
        for (i, &j) in perm.iter().enumerate() {
            total += psi(phi, xs.get(i), w.get(j));
        }
        if best.as_ref().map(|(v, _)| total < *v).unwrap_or(true) {
            best = Some((total, perm));
        }
    }
    let (value, images) = best.expect("n >= 1 enumerates at least the identity");
    Ok((value, Permutation::new(images)?))
}

/// Both sides of the balanced-matrix comparison:
/// `lhs = sum_ij phi(x*(i)/w(i)) w(i) A_ij` pairs sorted entries with
/// sorted weights, `rhs = sum_ij phi(x*(i)/w(j)) w(j) A_ij` pairs across
/// the matrix. Requires row sum i = column sum i for every i.
pub fn balanced_matrix_check<R: Real>(
    x: &Seq<R>,
    w: &Seq<R>,
    a: &[Vec<R>],
    phi: &OrliczFn<R>,
) -> Result<(ExtReal<R>, ExtReal<R>)> {
    let n = a.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Precondition(format!(
                "matrix row {i} has length {} in an {n} x {n} matrix",
                row.len()
            )));
        }
        for &e in row {
            if !(e >= R::zero()) || !e.is_finite() {
                return Err(Error::Precondition("matrix entries must be finite and >= 0".into()));
            }
        }
    }
    for i in 0..n {
        let row: R = a[i].iter().fold(R::zero(), |s, &e| s + e);
        let col: R = a.iter().fold(R::zero(), |s, r| s + r[i]);
        if (row - col).abs() > lit::<R>(1e-9) * (R::one() + row.abs() + col.abs()) {
            return Err(Error::Unbalanced { index: i, row: wide(row), col: wide(col) });
        }
    }
    let xs = seq_rearrangement(x);
    let mut lhs = ExtReal::zero();
    let mut rhs = ExtReal::zero();
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == R::zero() {
                continue;
            }
            let entry = ExtReal::new(a[i][j]);
            lhs += psi(phi, xs.get(i), w.get(i)) * entry;
            rhs += psi(phi, xs.get(i), w.get(j)) * entry;
        }
    }
    Ok((lhs, rhs))
}

/// Seeded balanced matrix: a nonnegative integer combination of at most n
/// permutation matrices, so the balance condition holds exactly.
pub fn random_balanced_matrix<R: Real>(n: usize, max_coeff: u32, seed: u64) -> Vec<Vec<R>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![R::zero(); n]; n];
    for _ in 0..n {
        let coeff = lit::<R>(f64::from(rng.gen_range(0..=max_coeff)));
        let sigma = Permutation::random(n, &mut rng);
        for i in 0..n {
            a[i][sigma.image(i)] = a[i][sigma.image(i)] + coeff;
        }
    }
    a
}

/// Lattice upper bound for the envelope functional on instances with at
/// most 3 positive cells: exhaustive search over decreasing, prefix-feasible
/// grids, refined by nesting boxes around the incumbent. Values are
/// nonincreasing in both `resolution` and `rounds`.
pub fn grid_search_p<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    resolution: usize,
    rounds: usize,
) -> Result<ExtReal<R>> {
    let fstar = decreasing_rearrangement(f);
    let mut cells: Vec<(R, R, R)> = Vec::new(); // (right edge, len, value)
    for (lo, hi, c) in fstar.cells() {
        if c == R::zero() {
            continue;
        }
        if !hi.is_finite() {
            return Ok(ExtReal::infinity());
        }
        cells.push((hi, hi - lo, c));
    }
    if cells.is_empty() {
        return Ok(ExtReal::zero());
    }
    if cells.len() > 3 {
        return Err(Error::TooLarge { n: cells.len(), max: 3 });
    }
    let k = cells.len();
    let end = w.domain_end();
    let mut caps = Vec::with_capacity(k);
    for &(edge, _, _) in &cells {
        let cap = if edge >= end {
            match w.total_mass().finite() {
                Some(t) => t,
                None => w.cumulative(end)?,
            }
        } else {
            w.cumulative(edge)?
        };
        caps.push(cap);
    }
    // Search in suffix increments u_m >= 0 with v_k = sum_{m >= k} u_m.
    // Monotonicity of v is then structural, and the prefix constraints read
    // sum_m b_min(m, n) u_m <= W(b_n): the contribution of u_m to every
    // later constraint is b_m u_m. Lattice endpoints include the tight-cap
    // value exactly, and because the edges b_m increase, a cap-snapped
    // coordinate inherits at most the summed lattice error of the earlier
    // ones, so a four-step radius re-contains the optimum when shrinking.
    let mut lo_box = vec![R::zero(); k];
    let mut hi_box: Vec<R> = (0..k).map(|m| caps[m] / cells[m].0).collect();
    let mut best_val = ExtReal::infinity();
    let mut best_u = vec![R::zero(); k];
    let residuals = caps.clone();
    for _ in 0..rounds.max(1) {
        let mut u = vec![R::zero(); k];
        search_level(
            &cells,
            phi,
            resolution,
            &lo_box,
            &hi_box,
            0,
            &residuals,
            &mut u,
            &mut best_val,
            &mut best_u,
        );
        // Shrink around the incumbent for the next pass.
        for i in 0..k {
            let width = (hi_box[i] - lo_box[i]) / lit::<R>(resolution as f64);
            let radius = width * lit::<R>(4.0);
            lo_box[i] = (best_u[i] - radius).max(R::zero());
            hi_box[i] = (best_u[i] + radius).min(caps[i] / cells[i].0);
        }
    }
    Ok(best_val)
}

#[allow(clippy::too_many_arguments)]
fn search_level<R: Real>(
    cells: &[(R, R, R)],
    phi: &OrliczFn<R>,
    resolution: usize,
    lo_box: &[R],
    hi_box: &[R],
    depth: usize,
    residuals: &[R],
    u: &mut Vec<R>,
    best_val: &mut ExtReal<R>,
    best_u: &mut [R],
) {
    let kk = cells.len();
    if depth == kk {
        let mut suffix = R::zero();
        let mut total = ExtReal::zero();
        for m in (0..kk).rev() {
            suffix = suffix + u[m];
            let (_, len, c) = cells[m];
            total += psi(phi, c, suffix) * ExtReal::new(len);
        }
        if total < *best_val {
            *best_val = total;
            best_u.copy_from_slice(u);
        }
        return;
    }
    // The increment u_depth charges constraint n at rate b_min(n, depth):
    // the tightest residual bounds the lattice, whose top point lands on
    // that cap exactly.
    let mut bound = R::infinity();
    for (n, &r) in residuals.iter().enumerate() {
        bound = bound.min(r / cells[n.min(depth)].0);
    }
    let hi = hi_box[depth].min(bound).max(R::zero());
    let lo = lo_box[depth].min(hi);
    let steps = lit::<R>(resolution as f64);
    for j in 0..=resolution {
        let frac = lit::<R>(j as f64) / steps;
        let um = lo + (hi - lo) * frac;
        u[depth] = um;
        let next: Vec<R> = residuals
            .iter()
            .enumerate()
            .map(|(n, &r)| r - cells[n.min(depth)].0 * um)
            .collect();
        search_level(
            cells,
            phi,
            resolution,
            lo_box,
            hi_box,
            depth + 1,
            &next,
            u,
            best_val,
            best_u,
        );
    }
}

/// Deterministic scramble of a padded copy of x: the output rearranges
/// back to x* exactly.
pub fn random_equimeasurable<R: Real>(x: &Seq<R>, zero_padding: usize, seed: u64) -> Seq<R> {
    let mut entries = x.entries().to_vec();
    entries.extend(std::iter::repeat_n(R::zero(), zero_padding));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = Permutation::random(entries.len(), &mut rng);
    sigma.apply_seq(&Seq::new(entries).expect("padded copy of a valid sequence"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::seq_modular_m;
    use approx::assert_relative_eq;

    fn sq() -> OrliczFn<f64> {
        OrliczFn::power(2.0).unwrap()
    }

    #[test]
    fn enumeration_frozen_two_by_two() {
        let x = Seq::new(vec![8.0, 1.0]).unwrap();
        let w = Seq::new(vec![4.0, 1.0]).unwrap();
        let (min, sigma) = min_over_permutations(&x, &w, &sq()).unwrap();
        assert_eq!(min.value(), 17.0);
        assert_eq!(sigma.images(), &[0, 1]);
        // The swapped arrangement costs phi(8/1) 1 + phi(1/4) 4 = 64.25.
        let swapped = psi(&sq(), 8.0, 1.0) + psi(&sq(), 1.0, 4.0);
        assert_eq!(swapped.value(), 64.25);
    }

    #[test]
    fn enumeration_equals_sorted_modular() {
        let phi = sq();
        let xs = [vec![8.0, 1.0], vec![1.0, 5.0, 2.0], vec![3.0, 3.0, 1.0, 7.0]];
        let ws = [vec![4.0, 1.0], vec![3.0, 2.0, 1.0], vec![4.0, 3.0, 2.0, 1.0]];
        for (xv, wv) in xs.iter().zip(&ws) {
            let x = Seq::new(xv.clone()).unwrap();
            let w = Seq::new(wv.clone()).unwrap();
            let (min, _) = min_over_permutations(&x, &w, &phi).unwrap();
            let sorted = seq_modular_m(&x, &w, &phi);
            assert_relative_eq!(min.value(), sorted.value(), max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_x_ties_all_permutations() {
        let phi = sq();
        let x = Seq::new(vec![2.0, 2.0, 2.0]).unwrap();
        let w = Seq::new(vec![3.0, 2.0, 1.0]).unwrap();
        let (min, _) = min_over_permutations(&x, &w, &phi).unwrap();
        // Any arrangement gives sum phi(2/w_j) w_j over all j.
        let direct: ExtReal<f64> =
            (0..3).map(|j| psi(&phi, 2.0, w.get(j))).sum();
        assert_eq!(min.value(), direct.value());
    }

    #[test]
    fn short_weight_support_forces_infinity() {
        let phi = sq();
        let x = Seq::new(vec![3.0, 2.0, 1.0]).unwrap();
        let w = Seq::new(vec![4.0, 1.0]).unwrap();
        let (min, _) = min_over_permutations(&x, &w, &phi).unwrap();
        assert!(min.is_infinite());
    }

    #[test]
    fn enumeration_cap() {
        let x = Seq::new(vec![1.0; 9]).unwrap();
        let w = Seq::new(vec![1.0; 9]).unwrap();
        assert!(matches!(
            min_over_permutations(&x, &w, &sq()),
            Err(Error::TooLarge { n: 9, max: 8 })
        ));
    }

    #[test]
    fn balanced_identity_ties() {
        let x = Seq::new(vec![3.0, 1.0]).unwrap();
        let w = Seq::new(vec![2.0, 1.0]).unwrap();
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (lhs, rhs) = balanced_matrix_check(&x, &w, &a, &sq()).unwrap();
        assert_eq!(lhs.value(), rhs.value());
    }

    #[test]
    fn balanced_all_ones_holds() {
        let x = Seq::new(vec![5.0, 3.0, 1.0]).unwrap();
        let w = Seq::new(vec![3.0, 2.0, 1.0]).unwrap();
        let a = vec![vec![1.0; 3]; 3];
        let (lhs, rhs) = balanced_matrix_check(&x, &w, &a, &sq()).unwrap();
        assert!(lhs <= rhs, "lhs {} rhs {}", lhs.value(), rhs.value());
    }

    #[test]
    fn unbalanced_rejected_with_index() {
        let x = Seq::new(vec![1.0]).unwrap();
        let w = Seq::new(vec![1.0]).unwrap();
        let a = vec![vec![0.0, 1.0], vec![0.0, 0.0]];
        match balanced_matrix_check(&x, &w, &a, &sq()) {
            Err(Error::Unbalanced { index: 0, .. }) => {}
            other => panic!("expected unbalanced at 0, got {other:?}"),
        }
    }

    #[test]
    fn random_balanced_matrices_hold() {
        let phi = sq();
        for seed in 0..50u64 {
            let n = 2 + (seed as usize % 5);
            let a: Vec<Vec<f64>> = random_balanced_matrix(n, 3, seed);
            let x = random_equimeasurable(
                &Seq::new((1..=n).map(|i| i as f64).collect::<Vec<_>>()).unwrap(),
                0,
                seed,
            );
            let w =
                Seq::new((0..n).map(|i| (n - i) as f64).collect::<Vec<_>>()).unwrap();
            let (lhs, rhs) = balanced_matrix_check(&x, &w, &a, &phi).unwrap();
            assert!(
                lhs.value() <= rhs.value() * (1.0 + 1e-12),
                "seed {seed}: lhs {} rhs {}",
                lhs.value(),
                rhs.value()
            );
        }
    }

    #[test]
    fn grid_search_linear_phi_gives_mass() {
        let lin = OrliczFn::power(1.0).unwrap();
        let f = Seq::new(vec![3.0, 4.0]).unwrap().to_step();
        let w = Weight::constant(1.0).unwrap();
        let p = grid_search_p(&f, &w, &lin, 24, 3).unwrap();
        assert_relative_eq!(p.value(), 7.0, max_relative = 1e-9);
    }

    #[test]
    fn grid_search_indicator_closed_form() {
        let phi = sq();
        let w = Weight::constant(1.0).unwrap();
        let f = StepFn::indicator(4.0, 4.0).unwrap();
        // Optimum sits at the box top W(t)/t, a lattice point: exact.
        let p = grid_search_p(&f, &w, &phi, 40, 4).unwrap();
        assert_relative_eq!(p.value(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn grid_search_refinement_monotone() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![2.0, 1.0, 0.5]).unwrap().to_step()).unwrap();
        let f = Seq::new(vec![3.0, 2.0, 1.0]).unwrap().to_step();
        let coarse = grid_search_p(&f, &w, &phi, 16, 1).unwrap().value();
        let fine = grid_search_p(&f, &w, &phi, 16, 4).unwrap().value();
        let finer = grid_search_p(&f, &w, &phi, 32, 4).unwrap().value();
        assert!(fine <= coarse * (1.0 + 1e-12));
        assert!(finer <= fine * (1.0 + 1e-9));
    }

    #[test]
    fn equimeasurable_round_trip() {
        let x = Seq::new(vec![2.0, 1.0]).unwrap();
        for seed in 0..100u64 {
            let y = random_equimeasurable(&x, 3, seed);
            assert!(y.len() <= 5);
            assert_eq!(
                seq_rearrangement(&y).entries(),
                seq_rearrangement(&x).entries()
            );
        }
    }
}
