//! End-to-end contract of the `olk` binary: JSON output shapes, the
//! exit-code convention (0 clean, 1 check failures, 2 malformed input),
//! CSV schema, and byte-identical reports under --no-timestamp.

use std::path::PathBuf;
use std::process::{Command, Output};

fn olk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("olk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

fn write_spec(name: &str, text: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, text).expect("spec written");
    path.display().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

#[test]
fn eval_luxemburg_norm_is_the_euclidean_norm() {
    let spec = write_spec(
        "euclid.json",
        r#"{"phi": {"kind": "power", "p": 2.0},
            "weight": {"kind": "const", "c": 1.0},
            "functions": [{"name": "x", "seq": [3.0, 4.0]}]}"#,
    );
    let out = olk(&["eval", "norm-luxemburg", "--spec", &spec]);
    let v = stdout_json(&out)["value"].as_f64().unwrap();
    assert!((v - 5.0).abs() <= 1e-8 * 5.0, "got {v}");
}

#[test]
fn eval_fundamental_env_closed_form() {
    let spec = write_spec(
        "fenv.json",
        r#"{"phi": {"kind": "power", "p": 2.0}, "weight": {"kind": "const", "c": 1.0}}"#,
    );
    let out = olk(&["eval", "fundamental-env", "--spec", &spec, "--t", "4"]);
    let v = stdout_json(&out)["value"].as_f64().unwrap();
    assert!((v - 2.0).abs() <= 1e-12, "got {v}");
}

#[test]
fn eval_pairing_form_reports_inf() {
    let spec = write_spec(
        "pairing.json",
        r#"{"phi": {"kind": "power", "p": 2.0},
            "functions": [{"name": "x", "seq": [1.0]}, {"name": "v", "seq": [0.0]}]}"#,
    );
    let out = olk(&["eval", "modular-M", "--spec", &spec]);
    assert_eq!(stdout_json(&out)["value"], serde_json::json!("inf"));
}

#[test]
fn eval_envelope_solution_carries_certificates() {
    let spec = write_spec(
        "envelope.json",
        r#"{"phi": {"kind": "power", "p": 2.0},
            "weight": {"kind": "power", "gamma": 0.5},
            "functions": [{"name": "f", "breaks": [0.0, 1.0, 2.0], "values": [2.0, 1.0]}]}"#,
    );
    let out = olk(&["eval", "envelope-P", "--spec", &spec]);
    let v = stdout_json(&out);
    let (lower, value, upper) = (
        v["lower"].as_f64().unwrap(),
        v["value"].as_f64().unwrap(),
        v["upper"].as_f64().unwrap(),
    );
    assert!(lower <= value * (1.0 + 1e-9) && value <= upper * (1.0 + 1e-9));
    assert!(v["minimizer"]["breakpoints"].is_array());
}

#[test]
fn malformed_spec_exits_2_with_location() {
    let spec = write_spec("broken.json", "{\n  \"phi\": 3\n}");
    let out = olk(&["eval", "norm-luxemburg", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.json:2:"), "stderr: {err}");
}

#[test]
fn unknown_functional_and_suite_exit_2() {
    let spec = write_spec("empty.json", "{}");
    let out = olk(&["eval", "norm-lux", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));

    let out = olk(&["check", "--suite", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fundamental-sandwich"), "stderr: {err}");
}

#[test]
fn injected_bad_exchange_point_exits_2_with_diagnostic() {
    let spec = write_spec("exchange.json", r#"{"exchange": [1.0, 2.0, 3.0, 1.0]}"#);
    let out = olk(&["check", "--suite", "exchange", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("precondition"), "stderr: {err}");
}

#[test]
fn clean_check_exits_0_and_failing_check_exits_1() {
    let out = olk(&["check", "--suite", "exchange", "--trials", "20", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));

    // A negative tolerance demands lhs strictly below rhs, which ties
    // violate, so this seeded run fails deterministically.
    let out = olk(&[
        "check", "--suite", "hl-pairing", "--trials", "20", "--seed", "7", "--tol=-0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!report["failures"].as_array().unwrap().is_empty());
    // Failures are reproducible: rerunning one failed seed as its own
    // single-trial run rebuilds the same instance digest.
    let failed = &report["failures"][0];
    let seed = failed["seed"].as_u64().unwrap().to_string();
    let again = olk(&[
        "check", "--suite", "hl-pairing", "--trials", "1", "--seed", &seed, "--tol=-0.5",
    ]);
    let report2: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(report2["failures"][0]["digest"], failed["digest"]);
}

#[test]
fn reports_are_byte_identical_without_timestamps() {
    let args = [
        "check", "--suite", "hl-pairing", "--trials", "25", "--seed", "11", "--no-timestamp",
    ];
    let a = olk(&args);
    let b = olk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let csv_path = scratch("rows.csv").display().to_string();
    let mut with_out = args.to_vec();
    with_out.extend(["--format", "csv", "--out", &csv_path]);
    olk(&with_out);
    let first = std::fs::read(&csv_path).unwrap();
    olk(&with_out);
    let second = std::fs::read(&csv_path).unwrap();
    assert_eq!(first, second);
}

#[test]
fn csv_schema_is_stable() {
    let out = olk(&[
        "check", "--suite", "exchange", "--trials", "5", "--seed", "3", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,trial,seed,lhs,rhs,verdict"));
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6, "row {i}: {line}");
        assert_eq!(cols[0], "exchange");
        assert_eq!(cols[1], i.to_string());
        assert!(cols[5] == "pass" || cols[5] == "fail");
        // 17 significant digits, exponent notation.
        assert!(cols[3].contains('e'), "row {i}: {line}");
    }
}

#[test]
fn json_out_file_collects_all_requested_suites() {
    let path = scratch("all.json").display().to_string();
    let out = olk(&[
        "check", "--suite", "trivial-dual", "--no-timestamp", "--format", "json", "--out", &path,
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["suite"], "trivial-dual");
    assert_eq!(reports[0]["failures"], serde_json::json!([]));
}
