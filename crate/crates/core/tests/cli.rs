use std::process::{Command, Output};

use serde_json::Value;

fn qmqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmqkd")).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

/// Data rows of a CSV (after the provenance line and header).
fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# {\"provenance\""));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn algebra_check_passes_and_reports_json() {
    let out = qmqkd(&["algebra-check"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_pass"], true);
    for c in doc["checks"].as_array().unwrap() {
        assert!(c["residual"].as_f64().unwrap() < 1e-10, "{c}");
    }
    assert_eq!(doc["provenance"]["command"], "algebra-check");
}

#[test]
fn over_tight_tolerance_fails() {
    let out = qmqkd(&["algebra-check", "--tol", "1e-18"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_pass"], false);
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(qmqkd(&["fading-scan", "--bogus"]).status.code(), Some(2));
    assert_eq!(qmqkd(&["session", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(qmqkd(&["sweep-distance", "--lengths", ""]).status.code(), Some(2));
}

#[test]
fn bad_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[detector]\nefficiancy = 0.1\n").unwrap();
    let out = qmqkd(&["session", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("efficiancy"));
}

#[test]
fn fading_scan_rows_and_summary() {
    let out = qmqkd(&["fading-scan", "--config", "fading-demo", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(text(&out.stdout));
    assert_eq!(r.len(), 300);
    for row in &r {
        let v: f64 = row[2].parse().unwrap();
        if row[0] != "plain-mirror" {
            assert!(v >= 1.0 - 1e-6);
        }
    }
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["summary"].as_array().unwrap().len(), 3);
}

#[test]
fn session_writes_120_rows_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.csv");
    let out = qmqkd(&["session", "--config", "paper-50km", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(rows(&csv).len(), 120);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mean_qber = summary["summary"]["mean_qber"].as_f64().unwrap();
    assert!((0.006..=0.0106).contains(&mean_qber));
}

#[test]
fn zero_drift_session_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.toml");
    std::fs::write(&path, "[session]\nshot_noise = false\n").unwrap();
    let out = qmqkd(&["session", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["summary"]["std_qber"], 0.0);
    assert_eq!(doc["summary"]["std_rate_bps"], 0.0);
}

#[test]
fn sweep_rates_decrease_with_length() {
    let out = qmqkd(&["sweep-distance", "--config", "paper-50km"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(text(&out.stdout));
    let rates: Vec<f64> = r.iter().map(|row| row[2].parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));
    let at = |km: &str| r.iter().find(|row| row[0] == km).map(|row| row[2].parse::<f64>().unwrap()).unwrap();
    assert!((6620.0..=8060.0).contains(&at("50.4")));
    assert!((175.0..=325.0).contains(&at("100")));
}

#[test]
fn seed_changes_output_and_repeats_identically() {
    let a = qmqkd(&["fading-scan", "--samples", "50", "--seed", "3"]);
    let b = qmqkd(&["fading-scan", "--samples", "50", "--seed", "3"]);
    let c = qmqkd(&["fading-scan", "--samples", "50", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn calibrate_writes_a_loadable_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calibrated.toml");
    let out = qmqkd(&["calibrate", "--config", "paper-50km", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["calibration"]["rate_bps"].as_f64().unwrap() - 7340.0).abs() < 1e-3);
    let again = qmqkd(&["session", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(again.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert!(doc["calibration"].is_null());
}
