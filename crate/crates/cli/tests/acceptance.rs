//! Acceptance gate for the workspace: one test per promised behavior, at
//! pinned trial counts and tolerances. Each test prints as its own
//! pass/fail line; a failure message carries the seed and instance digest
//! needed to reproduce the offending trial.

use std::time::{Duration, Instant};

use olk_cli::gen;
use olk_cli::suites::{run_suite, RunConfig, Suite, SuiteOutcome};
use olk_core::envelope::{envelope_norm, fundamental_m_env};
use olk_core::modular::luxemburg_norm;
use olk_core::orlicz::log_grid;
use olk_core::weight::ScanConfig;
use olk_core::{OrliczFn64, StepFn64, Weight64};

fn suite_clean(suite: Suite, trials: usize) -> SuiteOutcome {
    let cfg = RunConfig { trials: Some(trials), seed: 0, ..Default::default() };
    let outcome = run_suite(suite, &cfg).expect("suite runs to completion");
    let failures: Vec<String> = outcome
        .failures()
        .map(|r| format!("trial {} seed {} digest {} lhs {:?} rhs {:?}", r.trial, r.seed, r.digest, r.lhs, r.rhs))
        .collect();
    assert!(
        failures.is_empty(),
        "{} reported {} failures:\n{}",
        suite.name(),
        failures.len(),
        failures.join("\n")
    );
    outcome
}

#[test]
fn a01_permutation_minimum_equals_sorted_modular_exactly() {
    let started = Instant::now();
    suite_clean(Suite::PropFinite, 200);
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10s");
}

#[test]
fn a02_balanced_matrix_mixture_never_beats_sorted_pairing() {
    suite_clean(Suite::BalancedMatrix, 500);
}

#[test]
fn a03_sorted_modular_floors_equimeasurable_pairings() {
    suite_clean(Suite::SeqInfimum, 500);
}

#[test]
fn a04_luxemburg_reduces_to_lp_on_the_flat_weight() {
    let w = Weight64::constant(1.0).unwrap();
    for seed in 0..100u64 {
        let mut r = gen::rng(seed);
        let f = gen::step_fn(&mut r, 5);
        let p = [1.0, 1.5, 2.0, 3.0][seed as usize % 4];
        let phi = OrliczFn64::power(p).unwrap();
        let closed: f64 = f
            .cells()
            .map(|(lo, hi, v)| v.powf(p) * (hi - lo))
            .sum::<f64>()
            .powf(1.0 / p);
        let norm = luxemburg_norm(&f, &w, &phi).unwrap().value();
        assert!(
            (norm - closed).abs() <= 1e-8 * closed.max(1e-300),
            "seed {seed}: got {norm}, lp norm {closed}"
        );
    }
}

#[test]
fn a05_linear_phi_flat_weight_collapses_both_norms_to_the_integral() {
    let w = Weight64::constant(1.0).unwrap();
    let phi = OrliczFn64::power(1.0).unwrap();
    for seed in 0..50u64 {
        let mut r = gen::rng(seed);
        let f = gen::step_fn(&mut r, 5);
        let integral = f.integrate().value();
        let lux = luxemburg_norm(&f, &w, &phi).unwrap().value();
        let env = envelope_norm(&f, &w, &phi, 1e-6).unwrap().value();
        let tol = 1e-6 * integral.max(1e-300);
        assert!((lux - integral).abs() <= tol, "seed {seed}: lux {lux} vs {integral}");
        assert!((env - integral).abs() <= tol, "seed {seed}: env {env} vs {integral}");
    }
}

#[test]
fn a06_envelope_bookkeeping_and_grid_oracle_agree() {
    suite_clean(Suite::Sandwich, 100);
}

#[test]
fn a07_envelope_norm_of_indicators_matches_the_closed_form() {
    let pairs = [
        (Weight64::constant(1.0).unwrap(), OrliczFn64::power(2.0).unwrap()),
        (Weight64::power(0.5).unwrap(), OrliczFn64::power(2.0).unwrap()),
        (Weight64::example314(6).unwrap(), OrliczFn64::power(2.0).unwrap()),
        (Weight64::example415(6).unwrap(), OrliczFn64::power(1.5).unwrap()),
    ];
    for (w, phi) in &pairs {
        let (lo, hi) = match w.truncation_floor() {
            Some(floor) => (4.0 * floor, 1.0),
            None => (1e-3, 1e3),
        };
        for t in log_grid(lo, hi, 20) {
            let ind = StepFn64::indicator(t, t).unwrap();
            let norm = envelope_norm(&ind, w, phi, 1e-7).unwrap().value();
            let closed = fundamental_m_env(t, w, phi).unwrap();
            assert!(
                (norm - closed).abs() <= 1e-6 * closed,
                "t = {t:e}: solver {norm:e} vs closed form {closed:e}"
            );
        }
    }
}

#[test]
fn a08_fundamental_sandwich_holds_across_the_catalog() {
    suite_clean(Suite::FundamentalSandwich, 50);
}

#[test]
fn a09_weight_verdicts_match_their_analytic_behavior() {
    let cfg = ScanConfig::<f64>::default();

    let v = Weight64::constant(1.0).unwrap().is_regular(&cfg);
    assert!(v.regular && (v.constant - 1.0).abs() <= 1e-9, "flat: {v:?}");

    let v = Weight64::power(0.5).unwrap().is_regular(&cfg);
    assert!(v.regular && (v.constant - 2.0).abs() <= 1e-9, "sqrt: {v:?}");

    let v = Weight64::example314(6).unwrap().inv_w_delta2(&cfg);
    assert!(!v.bounded && v.witness.is_some(), "314 doubling: {v:?}");

    let w415 = Weight64::example415(6).unwrap();
    let v = w415.inv_w_delta2(&cfg);
    assert!(v.bounded && (v.constant - 2.0).abs() <= 1e-9, "415 doubling: {v:?}");
    let v = w415.is_regular(&cfg);
    assert!(!v.regular, "415 regularity: {v:?}");
}

#[test]
fn a10_duality_pairings_norming_floor_and_degenerate_dual() {
    suite_clean(Suite::Holder, 200);
    suite_clean(Suite::Norming, 100);
    suite_clean(Suite::TrivialDual, 0);
}

#[test]
fn a11_structure_superadditivity_triangle_invariance_concavity() {
    suite_clean(Suite::Superadditive, 200);
    suite_clean(Suite::ConvexityEnvelope, 200);
    suite_clean(Suite::RiEnvelope, 100);
    suite_clean(Suite::PConcavity, 100);
}

#[test]
fn a12_full_check_all_exits_clean_within_budget() {
    let started = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_olk"))
        .args(["check", "--all", "--no-timestamp"])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5min");
}
