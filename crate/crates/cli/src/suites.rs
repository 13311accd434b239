//! The check command: seeded property suites, one CSV row per trial.
//!
//! Every random suite derives trial `i`'s generator from `base_seed + i`,
//! so a failing row is reproducible by re-running with `--seed <row seed>
//! --trials 1`. Catalog suites (fundamental-sandwich, regular-equivalence,
//! trivial-dual) walk fixed grids instead; their rows are deterministic
//! outright. Trials run in parallel, rows are assembled in trial order.
//!
//! Row semantics: `lhs` and `rhs` are the two sides of the suite's
//! comparison, oriented so a healthy trial has `lhs <= rhs` (inequality
//! suites) or `lhs == rhs` (equality suites) at the suite tolerance.

use std::time::{Duration, Instant, SystemTime};

use olk_core::duality::{
    holder_pairing, norming_supremum, orlicz_norm_conjugate, trivial_dual_probe,
};
use olk_core::envelope::{
    envelope_modular_p, envelope_norm, fundamental_g, fundamental_m, fundamental_m_env,
    fundamental_ratio_at_edges,
};
use olk_core::modular::{
    check_p_concavity, check_superadditive, seq_modular_iv, seq_modular_m, unify_domains,
};
use olk_core::oracle::{
    balanced_matrix_check, grid_search_p, min_over_permutations, random_balanced_matrix,
    random_equimeasurable,
};
use olk_core::orlicz::log_grid;
use olk_core::rearrange::{
    exchange_inequality, hardy_littlewood_check, permute_cells, seq_rearrangement,
};
use olk_core::weight::ScanConfig;
use olk_core::{ExtReal64, OrliczFn64, Permutation, StepFn64, Weight64};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::eval::ext_json;
use crate::gen;
use crate::spec::Bundle;
use crate::CliError;

/// The property-check suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Permutation oracle minimum equals the sorted-pairing modular.
    PropFinite,
    /// Sorted pairing never beats the balanced-matrix mixture.
    BalancedMatrix,
    /// Sorted modular floors every equimeasurable pairing.
    SeqInfimum,
    /// Envelope bookkeeping `lower <= P <= upper` plus grid-oracle match.
    Sandwich,
    /// Modular superadditivity across disjoint supports.
    Superadditive,
    /// Norm aggregation inequality for p-concave phi.
    PConcavity,
    /// Envelope functional is invariant under cell permutation.
    RiEnvelope,
    /// Triangle inequality for the envelope norm.
    ConvexityEnvelope,
    /// `F_M(t) <= G(t) <= F_M(2t)` across the weight catalog.
    FundamentalSandwich,
    /// Regularity/doubling verdicts and fundamental-function equivalence.
    RegularEquivalence,
    /// Pairing bounded by the dual-norm product.
    Holder,
    /// Norming supremum reaches the Amemiya value.
    Norming,
    /// Unbounded pairings against the hyperbolic weight.
    TrivialDual,
    /// Pairing bounded by the sorted pairing.
    HlPairing,
    /// Two-point exchange prefers sorted pairing.
    Exchange,
}

impl Suite {
    pub const ALL: [Suite; 15] = [
        Suite::PropFinite,
        Suite::BalancedMatrix,
        Suite::SeqInfimum,
        Suite::Sandwich,
        Suite::Superadditive,
        Suite::PConcavity,
        Suite::RiEnvelope,
        Suite::ConvexityEnvelope,
        Suite::FundamentalSandwich,
        Suite::RegularEquivalence,
        Suite::Holder,
        Suite::Norming,
        Suite::TrivialDual,
        Suite::HlPairing,
        Suite::Exchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PropFinite => "prop-finite",
            Suite::BalancedMatrix => "balanced-matrix",
            Suite::SeqInfimum => "seq-infimum",
            Suite::Sandwich => "sandwich",
            Suite::Superadditive => "superadditive",
            Suite::PConcavity => "p-concavity",
            Suite::RiEnvelope => "ri-envelope",
            Suite::ConvexityEnvelope => "convexity-envelope",
            Suite::FundamentalSandwich => "fundamental-sandwich",
            Suite::RegularEquivalence => "regular-equivalence",
            Suite::Holder => "holder",
            Suite::Norming => "norming",
            Suite::TrivialDual => "trivial-dual",
            Suite::HlPairing => "hl-pairing",
            Suite::Exchange => "exchange",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|x| x.name() == s)
    }

    /// Default trial count; for fundamental-sandwich it is the number of
    /// sampled t per catalog pair, and the fixed-grid suites ignore it.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::PropFinite => 200,
            Suite::BalancedMatrix => 500,
            Suite::SeqInfimum => 500,
            Suite::Sandwich => 100,
            Suite::Superadditive => 200,
            Suite::PConcavity => 100,
            Suite::RiEnvelope => 100,
            Suite::ConvexityEnvelope => 200,
            Suite::FundamentalSandwich => 50,
            Suite::RegularEquivalence => 0,
            Suite::Holder => 200,
            Suite::Norming => 100,
            Suite::TrivialDual => 0,
            Suite::HlPairing => 200,
            Suite::Exchange => 200,
        }
    }

    /// Default relative tolerance for the suite comparison.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::PropFinite | Suite::BalancedMatrix | Suite::SeqInfimum => 1e-12,
            Suite::Sandwich => 1e-4,
            Suite::Superadditive => 1e-9,
            Suite::PConcavity => 1e-8,
            Suite::RiEnvelope => 1e-5,
            Suite::ConvexityEnvelope => 1e-6,
            Suite::FundamentalSandwich => 1e-9,
            Suite::RegularEquivalence => 1e-6,
            Suite::Holder => 1e-6,
            Suite::Norming => 1e-6,
            Suite::TrivialDual => 1e-12,
            Suite::HlPairing => 1e-12,
            Suite::Exchange => 1e-9,
        }
    }
}

/// One CSV row. `pass` renders as the `verdict` column.
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub digest: String,
    pub lhs: ExtReal64,
    pub rhs: ExtReal64,
    pub pass: bool,
}

/// Knobs accepted by `run_suite`; `None` means the suite default.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub trials: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub bundle: Option<Bundle>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub seed: u64,
    pub tol: f64,
    pub rows: Vec<TrialRow>,
    pub wall: Duration,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// The JSON report. Wall time and timestamp are the only
    /// nondeterministic fields, so `no_timestamp` drops both.
    pub fn summary_json(&self, no_timestamp: bool) -> Value {
        let failures: Vec<Value> = self
            .failures()
            .map(|r| {
                json!({
                    "trial": r.trial,
                    "seed": r.seed,
                    "digest": r.digest,
                    "lhs": ext_json(r.lhs),
                    "rhs": ext_json(r.rhs),
                })
            })
            .collect();
        let mut out = json!({
            "suite": self.suite.name(),
            "trials": self.rows.len(),
            "failures": failures,
            "config": { "seed": self.seed, "tol": self.tol },
        });
        if !no_timestamp {
            out["wall_ms"] = json!(self.wall.as_secs_f64() * 1e3);
            out["timestamp"] = json!(unix_seconds());
        }
        out
    }

    pub fn write_csv(&self, out: &mut String) {
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.suite.name(),
                r.trial,
                r.seed,
                fmt_ext(r.lhs),
                fmt_ext(r.rhs),
                if r.pass { "pass" } else { "fail" }
            ));
        }
    }
}

pub const CSV_HEADER: &str = "suite,trial,seed,lhs,rhs,verdict\n";

/// Floats carry 17 significant digits so the CSV round-trips exactly.
pub fn fmt_ext(x: ExtReal64) -> String {
    match x.finite() {
        Some(v) => format!("{v:.16e}"),
        None => "inf".to_string(),
    }
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(SystemTime::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn digest_of(parts: &[String]) -> String {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in parts {
        p.hash(&mut h);
    }
    format!("{:016x}", h.finish())
}

/// `a <= b` up to relative slack; infinities compare structurally.
fn le_rel(a: ExtReal64, b: ExtReal64, tol: f64) -> bool {
    match (a.finite(), b.finite()) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y + tol * y.abs(),
    }
}

/// `a == b` up to relative slack; infinities must agree.
fn eq_rel(a: ExtReal64, b: ExtReal64, tol: f64) -> bool {
    match (a.finite(), b.finite()) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300),
        _ => false,
    }
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<SuiteOutcome, CliError> {
    let started = Instant::now();
    let tol = cfg.tol.unwrap_or_else(|| suite.default_tol());
    let rows = match suite {
        Suite::FundamentalSandwich => {
            fundamental_sandwich_rows(cfg.trials.unwrap_or(50), cfg.seed, tol)?
        }
        Suite::RegularEquivalence => regular_equivalence_rows(cfg.seed, tol)?,
        Suite::TrivialDual => trivial_dual_rows(cfg.seed)?,
        Suite::Exchange if explicit_exchange(cfg).is_some() => {
            let [s1, s2, t1, t2] = explicit_exchange(cfg).unwrap();
            vec![exchange_explicit_row(s1, s2, t1, t2, cfg.seed, tol)?]
        }
        _ => {
            let n = cfg.trials.unwrap_or_else(|| suite.default_trials());
            let base = cfg.seed;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let seed = base.wrapping_add(i as u64);
                    trial_row(suite, i, seed, tol).map_err(|e| {
                        CliError::Failed(format!(
                            "suite {} trial {i} (seed {seed}): {e}",
                            suite.name()
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(SuiteOutcome {
        suite,
        seed: cfg.seed,
        tol,
        rows,
        wall: started.elapsed(),
    })
}

fn explicit_exchange(cfg: &RunConfig) -> Option<[f64; 4]> {
    cfg.bundle.as_ref().and_then(|b| b.exchange)
}

fn exchange_explicit_row(
    s1: f64,
    s2: f64,
    t1: f64,
    t2: f64,
    seed: u64,
    tol: f64,
) -> Result<TrialRow, CliError> {
    let phi = OrliczFn64::power(2.0).expect("valid exponent");
    // A bad point is the user's input, so the precondition diagnostic
    // surfaces as a usage error.
    let (sorted, swapped) =
        exchange_inequality(s1, s2, t1, t2, &phi).map_err(|e| CliError::User(e.to_string()))?;
    let lhs = ExtReal64::new(sorted);
    let rhs = ExtReal64::new(swapped);
    Ok(TrialRow {
        trial: 0,
        seed,
        digest: digest_of(&[format!("exchange {s1} {s2} {t1} {t2}")]),
        lhs,
        rhs,
        pass: le_rel(lhs, rhs, tol),
    })
}

/// One random trial. The generator is rebuilt from the row seed, so the
/// instance is a pure function of (suite, seed).
fn trial_row(suite: Suite, trial: usize, seed: u64, tol: f64) -> olk_core::Result<TrialRow> {
    let mut r = gen::rng(seed);
    let (digest, lhs, rhs, pass) = match suite {
        Suite::PropFinite => {
            let n = r.gen_range(2..=7);
            let x = gen::any_seq(&mut r, n);
            let w = gen::dec_pos_seq(&mut r, n);
            let phi = gen::phi_pow(&mut r);
            let (min, _) = min_over_permutations(&x, &w, &phi)?;
            let m = seq_modular_m(&x, &w, &phi);
            let d = digest_of(&[format!("{x:?} {w:?} {phi:?}")]);
            (d, min, m, eq_rel(min, m, tol))
        }
        Suite::BalancedMatrix => {
            let n = r.gen_range(2..=6);
            let x = gen::any_seq(&mut r, n);
            let w = gen::dec_pos_seq(&mut r, n);
            let phi = gen::phi_pow(&mut r);
            let a = random_balanced_matrix::<f64>(n, 4, r.gen());
            let (lhs, rhs) = balanced_matrix_check(&x, &w, &a, &phi)?;
            let d = digest_of(&[format!("{x:?} {w:?} {phi:?} {a:?}")]);
            (d, lhs, rhs, le_rel(lhs, rhs, tol))
        }
        Suite::SeqInfimum => {
            let n = r.gen_range(2..=6);
            let x = gen::any_seq(&mut r, n);
            let w = gen::dec_pos_seq(&mut r, n);
            let phi = gen::phi_pow(&mut r);
            let pad = r.gen_range(0..=3);
            let v = random_equimeasurable(&w, pad, r.gen());
            let xs = seq_rearrangement(&x);
            let m = seq_modular_m(&x, &w, &phi);
            let iv = seq_modular_iv(&xs, &v, &phi);
            // Sorting v recovers w (plus a zero tail), so the sorted
            // arrangement must attain the infimum exactly.
            let sorted = seq_modular_iv(&xs, &seq_rearrangement(&v), &phi);
            let d = digest_of(&[format!("{x:?} {w:?} {phi:?} {v:?}")]);
            (d, m, iv, le_rel(m, iv, tol) && eq_rel(m, sorted, tol))
        }
        Suite::Sandwich => {
            let f = gen::step_fn(&mut r, 3);
            let w = gen::any_weight(&mut r);
            let phi = gen::phi_pow(&mut r);
            let sol = envelope_modular_p(&f, &w, &phi, 1e-7)?;
            let grid = grid_search_p(&f, &w, &phi, 32, 5)?;
            let slack = ExtReal64::new(1.01 * sol.gap + 1e-12);
            let book = le_rel(sol.lower, sol.value, 1e-9)
                && le_rel(sol.value, sol.upper, 1e-9)
                && sol.minimizer_feasible(&w);
            // The grid point is feasible, so it can undercut the reported
            // value only by the solver's own residual gap.
            let agree = le_rel(sol.value, grid + slack, 0.0) && le_rel(grid, sol.value, tol);
            let d = digest_of(&[format!("{f:?} {w:?} {phi:?}")]);
            (d, sol.value, grid, book && agree)
        }
        Suite::Superadditive => {
            let f = gen::step_fn(&mut r, 4);
            let tail = gen::step_fn(&mut r, 3);
            let mut cells = vec![(0.0, f.domain_end())];
            cells.extend(
                tail.cells()
                    .map(|(lo, hi, v)| (v, hi - lo))
                    .collect::<Vec<_>>(),
            );
            let g = gen::build_step(cells);
            let phi = gen::phi_any(&mut r);
            let w = if phi.power_params().is_some() {
                gen::any_weight(&mut r)
            } else {
                gen::flat_weight(&mut r)
            };
            let (sum, parts) = check_superadditive(&f, &g, &w, &phi)?;
            let d = digest_of(&[format!("{f:?} {g:?} {w:?} {phi:?}")]);
            (d, parts, sum, le_rel(parts, sum, tol))
        }
        Suite::PConcavity => {
            let (q, p) = [(1.0, 1.0), (1.0, 2.0), (1.5, 2.0), (2.0, 2.0), (2.0, 3.0)]
                [r.gen_range(0..5)];
            let phi = OrliczFn64::power(q).expect("q >= 1");
            let k = r.gen_range(2..=3);
            let fs: Vec<StepFn64> = (0..k).map(|_| gen::step_fn(&mut r, 3)).collect();
            let w = gen::any_weight(&mut r);
            let (lhs, rhs) = check_p_concavity(&fs, p, &w, &phi)?;
            let d = digest_of(&[format!("{fs:?} {w:?} q={q} p={p}")]);
            (d, rhs, lhs, le_rel(rhs, lhs, tol))
        }
        Suite::RiEnvelope => {
            let f = gen::step_fn(&mut r, 5);
            let sigma = Permutation::random(f.num_cells(), &mut r);
            let g = permute_cells(&f, &sigma)?;
            let w = gen::any_weight(&mut r);
            let phi = gen::phi_pow(&mut r);
            let a = envelope_modular_p(&f, &w, &phi, 1e-7)?.value;
            let b = envelope_modular_p(&g, &w, &phi, 1e-7)?.value;
            let d = digest_of(&[format!("{f:?} {sigma:?} {w:?} {phi:?}")]);
            (d, a, b, eq_rel(a, b, tol))
        }
        Suite::ConvexityEnvelope => {
            let f = gen::step_fn(&mut r, 4);
            let g = gen::step_fn(&mut r, 4);
            let w = gen::flat_weight(&mut r);
            let phi = gen::phi_pow(&mut r);
            let (fu, gu) = unify_domains(&f, &g);
            let sum = fu.compose(&gu, |a, b| a + b)?;
            let ns = envelope_norm(&sum, &w, &phi, 1e-7)?;
            let parts =
                envelope_norm(&f, &w, &phi, 1e-7)? + envelope_norm(&g, &w, &phi, 1e-7)?;
            let d = digest_of(&[format!("{f:?} {g:?} {w:?} {phi:?}")]);
            (d, ns, parts, le_rel(ns, parts, tol))
        }
        Suite::Holder => {
            let f = gen::step_fn(&mut r, 4);
            let g = gen::step_fn(&mut r, 4);
            let w = gen::any_weight(&mut r);
            let phi = gen::phi_pow_n(&mut r);
            let (pairing, bound) = holder_pairing(&f, &g, &w, &phi, 1e-9)?;
            let d = digest_of(&[format!("{f:?} {g:?} {w:?} {phi:?}")]);
            (d, pairing, bound, le_rel(pairing, bound, tol))
        }
        Suite::Norming => {
            let f = gen::dec_step_fn(&mut r, 4);
            let w = gen::flat_weight(&mut r);
            let phi = gen::phi_pow_n(&mut r);
            let dual = orlicz_norm_conjugate(&f, &w, &phi, 1e-9)?.value;
            let sup = norming_supremum(&f, &w, &phi, 1e-9)?.value;
            let d = digest_of(&[format!("{f:?} {w:?} {phi:?}")]);
            // The supremum runs over the unit modular ball, so it can trail
            // the dual value, but never by more than 5 percent, and it can
            // never exceed it.
            let floor = match dual.finite() {
                Some(v) => ExtReal64::new(0.95 * v),
                None => ExtReal64::infinity(),
            };
            (d, sup, dual, le_rel(floor, sup, 0.0) && le_rel(sup, dual, tol))
        }
        Suite::HlPairing => {
            let f = gen::step_fn(&mut r, 5);
            let g = gen::step_fn(&mut r, 5);
            let (raw, sorted) = hardy_littlewood_check(&f, &g);
            let d = digest_of(&[format!("{f:?} {g:?}")]);
            (d, raw, sorted, le_rel(raw, sorted, tol))
        }
        Suite::Exchange => {
            let s2 = gen::dyadic(&mut r, 1, 1024);
            let s1 = s2 + gen::dyadic(&mut r, 1, 512);
            let t2 = gen::dyadic(&mut r, 1, 1024);
            let t1 = t2 + gen::dyadic(&mut r, 1, 512);
            let phi = gen::phi_any(&mut r);
            let (sorted, swapped) = exchange_inequality(s1, s2, t1, t2, &phi)?;
            let lhs = ExtReal64::new(sorted);
            let rhs = ExtReal64::new(swapped);
            let d = digest_of(&[format!("{s1} {s2} {t1} {t2} {phi:?}")]);
            (d, lhs, rhs, le_rel(lhs, rhs, tol))
        }
        Suite::FundamentalSandwich | Suite::RegularEquivalence | Suite::TrivialDual => {
            unreachable!("fixed-grid suites are dispatched in run_suite")
        }
    };
    Ok(TrialRow { trial, seed, digest, lhs, rhs, pass })
}

/// Catalog (weight, phi) pairs with their t ranges for the fundamental
/// sandwich. Truncated weights sample above 4x the floor and keep `2t`
/// inside the unit interval.
fn catalog_pairs() -> olk_core::Result<Vec<(&'static str, Weight64, OrliczFn64)>> {
    Ok(vec![
        ("example314-k6/power-2", Weight64::example314(6)?, OrliczFn64::power(2.0)?),
        ("example415-k6/power-1.5", Weight64::example415(6)?, OrliczFn64::power(1.5)?),
        ("const-1/expm1", Weight64::constant(1.0)?, OrliczFn64::expm1()),
        ("power-0.5/power-2", Weight64::power(0.5)?, OrliczFn64::power(2.0)?),
    ])
}

fn fundamental_sandwich_rows(
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<TrialRow>, CliError> {
    let mut rows = Vec::new();
    let pairs = catalog_pairs().map_err(|e| CliError::Failed(e.to_string()))?;
    for (label, w, phi) in &pairs {
        let (lo, hi) = match w.truncation_floor() {
            Some(floor) => (4.0 * floor, 0.5),
            None => (1e-3, 1e3),
        };
        for t in log_grid(lo, hi, samples.max(2)) {
            let push = |rows: &mut Vec<TrialRow>, lhs, rhs, side: &str| {
                let trial = rows.len();
                rows.push(TrialRow {
                    trial,
                    seed,
                    digest: digest_of(&[format!("{label} t={t:e} {side}")]),
                    lhs,
                    rhs,
                    pass: le_rel(lhs, rhs, tol),
                });
            };
            let fm = fundamental_m(t, w, phi).map_err(|e| CliError::Failed(e.to_string()))?;
            let g = ExtReal64::new(
                fundamental_g(t, w, phi).map_err(|e| CliError::Failed(e.to_string()))?,
            );
            let fm2 =
                fundamental_m(2.0 * t, w, phi).map_err(|e| CliError::Failed(e.to_string()))?;
            push(&mut rows, fm, g, "lower");
            push(&mut rows, g, fm2, "upper");
        }
    }
    Ok(rows)
}

/// Fixed verdict rows for the weight catalog, then fundamental-function
/// equivalence for the regular weights and the growth ladder for the
/// hyperbolic one.
fn regular_equivalence_rows(seed: u64, tol: f64) -> Result<Vec<TrialRow>, CliError> {
    let fail = |e: olk_core::Error| CliError::Failed(e.to_string());
    let cfg = ScanConfig::<f64>::default();
    let mut rows = Vec::new();
    let mut push = |label: &str, lhs: ExtReal64, rhs: ExtReal64, pass: bool| {
        let trial = rows.len();
        rows.push(TrialRow {
            trial,
            seed,
            digest: digest_of(&[label.to_string()]),
            lhs,
            rhs,
            pass,
        });
    };

    // Verdicts with their known constants.
    let flat = Weight64::constant(1.0).map_err(fail)?;
    let v = flat.is_regular(&cfg);
    push(
        "const-1 regular C=1",
        ExtReal64::new(v.constant),
        ExtReal64::new(1.0),
        v.regular && (v.constant - 1.0).abs() <= tol,
    );

    let sqrt_inv = Weight64::power(0.5).map_err(fail)?;
    let v = sqrt_inv.is_regular(&cfg);
    push(
        "power-0.5 regular C=2",
        ExtReal64::new(v.constant),
        ExtReal64::new(2.0),
        v.regular && (v.constant - 2.0).abs() <= tol * 2.0,
    );

    let w314 = Weight64::example314(6).map_err(fail)?;
    let v = w314.inv_w_delta2(&cfg);
    push(
        "example314-k6 doubling unbounded",
        ExtReal64::new(v.constant),
        ExtReal64::new(cfg.ceiling),
        !v.bounded && v.witness.is_some(),
    );

    let w415 = Weight64::example415(6).map_err(fail)?;
    let v = w415.inv_w_delta2(&cfg);
    push(
        "example415-k6 doubling C=2",
        ExtReal64::new(v.constant),
        ExtReal64::new(2.0),
        v.bounded && (v.constant - 2.0).abs() <= tol * 2.0,
    );
    let v = w415.is_regular(&cfg);
    push(
        "example415-k6 not regular",
        ExtReal64::new(v.constant),
        ExtReal64::new(cfg.ceiling),
        !v.regular,
    );

    // Regular weights: F_M / F_env stays in a narrow band, so the two
    // fundamental functions are equivalent.
    let phi = OrliczFn64::power(2.0).map_err(fail)?;
    for (label, w) in [("const-1", &flat), ("power-0.5", &sqrt_inv)] {
        let mut worst: f64 = 1.0;
        let mut least = f64::INFINITY;
        for t in log_grid(1e-3, 1e3, 40) {
            let fm = fundamental_m(t, w, &phi)
                .map_err(fail)?
                .finite()
                .ok_or_else(|| CliError::Failed(format!("F_M infinite at t = {t:e}")))?;
            let fe = fundamental_m_env(t, w, &phi).map_err(fail)?;
            worst = worst.max(fm / fe);
            least = least.min(fm / fe);
        }
        push(
            &format!("{label} fundamental equivalence"),
            ExtReal64::new(worst),
            ExtReal64::new(4.0),
            least >= 1.0 - 1e-9 && worst <= 4.0,
        );
    }

    // Hyperbolic catalog: the edge-ratio peaks grow toward the singular
    // end, so no equivalence constant exists.
    let deep = Weight64::example415(8).map_err(fail)?;
    let pairs = fundamental_ratio_at_edges(&deep, &phi).map_err(fail)?;
    let ratios: Vec<f64> = pairs.iter().map(|&(_, x)| x).collect();
    let mut maxima = Vec::new();
    for i in 0..ratios.len() {
        let left = if i == 0 { 0.0 } else { ratios[i - 1] };
        let right = if i + 1 == ratios.len() { 0.0 } else { ratios[i + 1] };
        if ratios[i] > left && ratios[i] > right {
            maxima.push(ratios[i]);
        }
    }
    let deepest = maxima.first().copied().unwrap_or(0.0);
    let shallowest = maxima.last().copied().unwrap_or(f64::INFINITY);
    push(
        "example415-k8 ratio ladder grows",
        ExtReal64::new(deepest),
        ExtReal64::new(1.3 * shallowest),
        maxima.len() >= 5 && deepest >= 2.3 && deepest >= 1.3 * shallowest,
    );

    Ok(rows)
}

/// Admissible scalings of capped-hyperbola test functions produce pairings
/// beyond any ceiling: the rows freeze the closed-form ladder per exponent.
fn trivial_dual_rows(seed: u64) -> Result<Vec<TrialRow>, CliError> {
    let ceiling = 1e3;
    let mut rows = Vec::new();
    for (i, p) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let phi = OrliczFn64::power(p).map_err(|e| CliError::Failed(e.to_string()))?;
        let probe = trivial_dual_probe(1.0, &phi, ceiling)
            .map_err(|e| CliError::Failed(e.to_string()))?;
        let admissible = probe.rows.iter().all(|r| r.modular <= 1.0 + 1e-12);
        let last = probe.rows.last().map(|r| r.pairing).unwrap_or(0.0);
        rows.push(TrialRow {
            trial: i,
            seed,
            digest: digest_of(&[format!("trivial-dual p={p}")]),
            lhs: ExtReal64::new(ceiling),
            rhs: ExtReal64::new(last),
            pass: probe.diverges && admissible && last > ceiling,
        });
    }
    Ok(rows)
}
