//! End-to-end checks of the binary: exit codes, output schema, determinism.

use std::process::{Command, Output};

fn rhls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhls"))
        .args(args)
        .env("RHLS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json_lines(output: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("every line is JSON"))
        .collect()
}

fn find_constant(lines: &[serde_json::Value], quantity: &str) -> Option<f64> {
    lines
        .iter()
        .find(|l| l["quantity"] == quantity)
        .and_then(|l| l["value"].as_f64())
}

#[test]
fn constants_reversed_regime() {
    let out = rhls(&["constants", "--n", "1", "--alpha", "6"]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    assert_eq!(lines[0]["record"], "manifest");
    let lower = find_constant(&lines, "conformal_lower_bound").unwrap();
    let upper = find_constant(&lines, "conformal_upper_bound_quadrature").unwrap();
    assert!((lower - 0.0879215).abs() < 1e-6);
    assert!((upper - 0.254737).abs() < 1e-3);
    // classical-regime constant is not applicable here
    let fl = lines.iter().find(|l| l["quantity"] == "frank_lieb_constant").unwrap();
    assert!(fl["value"].is_null());
    assert_eq!(fl["note"], "not applicable");
}

#[test]
fn constants_classical_regime() {
    let out = rhls(&["constants", "--n", "1", "--alpha", "2"]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    let d = find_constant(&lines, "frank_lieb_constant").unwrap();
    assert!((d - 4.0).abs() < 1e-12);
    let lower = lines.iter().find(|l| l["quantity"] == "conformal_lower_bound").unwrap();
    assert!(lower["value"].is_null());
}

#[test]
fn constants_boundary_rejected() {
    let out = rhls(&["constants", "--n", "1", "--alpha", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("differ from Q"));
}

#[test]
fn solve_stationary_at_constants() {
    let out = rhls(&[
        "solve", "--n", "1", "--alpha", "8", "--rule", "hopf", "--res", "6",
        "--init", "constants",
    ]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    let report = &lines[1];
    assert_eq!(report["converged"], true);
    assert!(report["iterations"].as_u64().unwrap() <= 2);
    // value at constants for alpha = 8 on any exact rule: |S|^(1-2/p) 3 pi^2
    let expected = (2.0 * std::f64::consts::PI.powi(2)).powf(-2.0)
        * 3.0
        * std::f64::consts::PI.powi(2);
    let n_est = report["n_est"].as_f64().unwrap();
    assert!((n_est - expected).abs() < 1e-10);
}

#[test]
fn solve_random_init_converges() {
    let out = rhls(&[
        "solve", "--n", "1", "--alpha", "6", "--p", "0.7", "--rule", "hopf", "--res", "6",
        "--init", "random", "--seed", "7",
    ]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    assert_eq!(lines[1]["converged"], true);
    assert!(lines[1]["el_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn solve_rejects_supercritical_exponent() {
    let out = rhls(&["solve", "--n", "1", "--alpha", "6", "--p", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_nonconvergence_exit_code() {
    let out = rhls(&[
        "solve", "--n", "1", "--alpha", "6", "--p", "0.7", "--rule", "hopf", "--res", "6",
        "--init", "random", "--seed", "7", "--max-iter", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let lines = json_lines(&out);
    assert_eq!(lines[1]["converged"], false);
}

#[test]
fn deterministic_output_modulo_timestamp() {
    let args = [
        "solve", "--n", "1", "--alpha", "6", "--p", "0.7", "--rule", "mc", "--nodes", "400",
        "--seed", "11", "--init", "random",
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = rhls(&args);
        assert!(out.status.success());
        let mut lines = json_lines(&out);
        for l in lines.iter_mut() {
            if let Some(obj) = l.as_object_mut() {
                obj.remove("timestamp");
            }
        }
        runs.push(lines);
    }
    assert_eq!(runs[0], runs[1], "same command and seed must reproduce bit-identical records");
}

#[test]
fn continuation_default_ladder() {
    let out = rhls(&[
        "continuation", "--n", "1", "--alpha", "6", "--rule", "hopf", "--res", "6",
        "--init", "random", "--seed", "3",
    ]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    let summary = lines.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(summary["in_sandwich"], true);
    assert_eq!(summary["completed"], true);
    // one report per rung: 6 geometric steps plus the critical endpoint
    let reports = lines.iter().filter(|l| l["record"].is_null() && l["n_est"].is_number()).count();
    assert_eq!(reports, 7);
}

#[test]
fn continuation_rejects_descending_ladder() {
    let out = rhls(&[
        "continuation", "--n", "1", "--alpha", "6", "--ladder", "0.6,0.4,0.8",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn continuation_partial_on_failed_rung() {
    // max-iter 1 cannot converge from a random start, so the ladder stops at
    // the first rung and the process reports partial results with exit 1
    let out = rhls(&[
        "continuation", "--n", "1", "--alpha", "6", "--rule", "hopf", "--res", "6",
        "--init", "random", "--seed", "5", "--max-iter", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let lines = json_lines(&out);
    let summary = lines.last().unwrap();
    assert_eq!(summary["completed"], false);
    let reports =
        lines.iter().filter(|l| l["record"].is_null() && l["n_est"].is_number()).count();
    assert_eq!(reports, 1, "ladder halts after the failed rung");
}

#[test]
fn continuation_single_step_ladder_is_plain_solve() {
    let out = rhls(&[
        "continuation", "--n", "1", "--alpha", "6", "--ladder", "0.8", "--rule", "hopf",
        "--res", "6",
    ]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    let reports =
        lines.iter().filter(|l| l["record"].is_null() && l["n_est"].is_number()).count();
    assert_eq!(reports, 1);
}

#[test]
fn verify_gamma_suite() {
    let out = rhls(&["verify", "--suite", "gamma", "--seed", "1"]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    let summary = lines.last().unwrap();
    assert_eq!(summary["violations"], 0);
    let verdicts: Vec<&serde_json::Value> =
        lines.iter().filter(|l| l["name"].as_str().is_some_and(|n| n.starts_with("verdict"))).collect();
    assert_eq!(verdicts.len(), 3);
    for v in verdicts {
        assert!(v["detail"].as_str().unwrap().contains("QuarterExponent"));
    }
}

#[test]
fn verify_unknown_suite_rejected() {
    let out = rhls(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_format() {
    let out = rhls(&["constants", "--n", "1", "--alpha", "6", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "), "manifest becomes a comment");
    let header = lines.next().unwrap();
    assert!(header.split(',').any(|c| c == "quantity"));
    assert!(header.split(',').any(|c| c == "value"));
    assert!(lines.next().unwrap().contains("ball_volume"));
}

#[test]
fn output_file_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.jsonl");
    let out = rhls(&[
        "constants", "--n", "1", "--alpha", "6", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let contents = std::fs::read_to_string(&path).unwrap();
    assert!(contents.lines().count() >= 10);
}
