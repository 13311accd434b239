//! Seeded instance generators for the check suites.
//!
//! Values and cell lengths live on a dyadic grid (multiples of 1/256, so
//! every quantity is an exact double): order statistics, prefix sums, and
//! sorted pairings then incur no rounding, which is what lets the exact
//! suites demand 1e-12 agreement. Every generator is a pure function of
//! its `ChaCha8Rng`, so a trial is reproducible from its seed alone.

use olk_core::{OrliczFn64, Seq64, StepFn64, Weight64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dyadic scalar `k/256` with `k` drawn from `lo..=hi`.
pub fn dyadic(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    f64::from(rng.gen_range(lo..=hi)) / 256.0
}

/// Sequence with entries in `[0, 4]` (zeros allowed).
pub fn any_seq(rng: &mut ChaCha8Rng, n: usize) -> Seq64 {
    Seq64::new((0..n).map(|_| dyadic(rng, 0, 1024)).collect::<Vec<_>>())
        .expect("dyadic entries are finite and nonnegative")
}

/// Strictly positive, strictly ordered weight sequence (descending).
pub fn dec_pos_seq(rng: &mut ChaCha8Rng, n: usize) -> Seq64 {
    let mut w: Vec<f64> = (0..n).map(|_| dyadic(rng, 1, 1024)).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Seq64::new(w).expect("sorted positive entries form a valid sequence")
}

/// Step function with up to `max_cells` cells, dyadic values in `[0, 4]`
/// and dyadic cell lengths in `(0, 2]`.
pub fn step_fn(rng: &mut ChaCha8Rng, max_cells: usize) -> StepFn64 {
    let cells = rng.gen_range(1..=max_cells);
    build_step(
        (0..cells)
            .map(|_| (dyadic(rng, 0, 1024), dyadic(rng, 1, 512)))
            .collect(),
    )
}

/// Step function whose values are positive and nonincreasing.
pub fn dec_step_fn(rng: &mut ChaCha8Rng, max_cells: usize) -> StepFn64 {
    let cells = rng.gen_range(1..=max_cells);
    let mut vals: Vec<f64> = (0..cells).map(|_| dyadic(rng, 1, 1024)).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    build_step(
        vals.into_iter()
            .map(|v| (v, dyadic(rng, 1, 512)))
            .collect(),
    )
}

pub fn build_step(cells: Vec<(f64, f64)>) -> StepFn64 {
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    for (v, len) in cells {
        breaks.push(breaks.last().unwrap() + len);
        values.push(v);
    }
    StepFn64::new(breaks, values).expect("increasing dyadic breakpoints")
}

/// Piecewise-constant weight: a constant, or a 4-level decreasing staircase.
pub fn flat_weight(rng: &mut ChaCha8Rng) -> Weight64 {
    if rng.gen_bool(0.5) {
        Weight64::constant(dyadic(rng, 1, 1024)).expect("positive constant")
    } else {
        let mut vals: Vec<f64> = (0..4).map(|_| dyadic(rng, 1, 1024)).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let f = StepFn64::new(vec![0.0, 4.0, 8.0, 12.0, 16.0], vals)
            .expect("fixed breakpoints");
        Weight64::step(f).expect("positive nonincreasing staircase")
    }
}

/// Power-law weight `t^-gamma`, integrable exponents only.
pub fn pow_weight(rng: &mut ChaCha8Rng) -> Weight64 {
    let gamma = [0.25, 0.5, 0.75][rng.gen_range(0..3)];
    Weight64::power(gamma).expect("gamma in (0, 1)")
}

/// Either flavor of weight. Power-law pieces demand power-type phi for
/// exact modulars, so callers pairing with general phi use `flat_weight`.
pub fn any_weight(rng: &mut ChaCha8Rng) -> Weight64 {
    if rng.gen_bool(0.5) {
        flat_weight(rng)
    } else {
        pow_weight(rng)
    }
}

/// Power-type phi, exponents `{1, 1.5, 2, 3}`.
pub fn phi_pow(rng: &mut ChaCha8Rng) -> OrliczFn64 {
    let p = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4)];
    OrliczFn64::power(p).expect("p >= 1")
}

/// Power-type phi that is also an N-function (excludes p = 1, whose slope
/// at the origin is positive).
pub fn phi_pow_n(rng: &mut ChaCha8Rng) -> OrliczFn64 {
    let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
    OrliczFn64::power(p).expect("p > 1")
}

/// The full phi menu: powers, a scaled power, an exponential, a piecewise
/// linear ramp.
pub fn phi_any(rng: &mut ChaCha8Rng) -> OrliczFn64 {
    match rng.gen_range(0..6) {
        0 => OrliczFn64::power(1.0).expect("valid"),
        1 => OrliczFn64::power(1.5).expect("valid"),
        2 => OrliczFn64::power(2.0).expect("valid"),
        3 => OrliczFn64::power(3.0).expect("valid"),
        4 => OrliczFn64::scaled_power(2.0, 0.5).expect("valid"),
        _ => OrliczFn64::expm1(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_per_seed() {
        let a = step_fn(&mut rng(42), 5);
        let b = step_fn(&mut rng(42), 5);
        assert_eq!(a.breakpoints(), b.breakpoints());
        assert_eq!(a.values(), b.values());
        let c = step_fn(&mut rng(43), 5);
        assert!(a.breakpoints() != c.breakpoints() || a.values() != c.values());
    }

    #[test]
    fn decreasing_generators_are_sorted() {
        for seed in 0..20 {
            assert!(dec_step_fn(&mut rng(seed), 6).is_nonincreasing());
            let w = dec_pos_seq(&mut rng(seed), 5);
            assert!(w.entries().windows(2).all(|p| p[0] >= p[1]));
            assert!(w.entries().iter().all(|&e| e > 0.0));
        }
    }

    #[test]
    fn dyadic_grid_is_exact() {
        let mut r = rng(7);
        for _ in 0..1000 {
            let x = dyadic(&mut r, 0, 1024);
            assert_eq!(x * 256.0, (x * 256.0).round());
        }
    }
}
