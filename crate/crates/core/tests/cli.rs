use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cma-lift")).args(args).output().unwrap()
}

fn verify(cfg: &str, extra: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let cfg = config(cfg);
    let mut args = vec!["verify", "--config", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = cli(&args);
    let text = std::fs::read_to_string(&report).unwrap();
    (out.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

fn failing(report: &Value) -> Vec<String> {
    let mut out = Vec::new();
    for s in report["suites"].as_array().unwrap() {
        for c in s["checks"].as_array().unwrap() {
            if !c["pass"].as_bool().unwrap() {
                out.push(format!("{}.{}", s["name"].as_str().unwrap(), c["id"].as_str().unwrap()));
            }
        }
    }
    out
}

#[test]
fn passing_config_exits_zero_with_report_shape() {
    let (code, r) = verify("family_c.json", &[]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r["elapsed_ms"].is_u64());
    assert_eq!(r["config"]["family"], "FAMILY_C");
    let check = &r["suites"][0]["checks"][0];
    for key in ["id", "anchor", "value", "tol", "pass"] {
        assert!(check.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn printed_bracket_entries_fail_with_exit_two() {
    let (code, r) = verify("zeroc.json", &["--suite", "symmetry"]);
    assert_eq!(code, 2);
    assert_eq!(failing(&r), ["symmetry.table[X_a,W_h]", "symmetry.table[X_a,W̄_h̄]"]);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut r: Value| {
        r.as_object_mut().unwrap().remove("elapsed_ms");
        r
    };
    let (_, a) = verify("zerocom.json", &["--seed", "9"]);
    let (_, b) = verify("zerocom.json", &["--seed", "9"]);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn domain_and_config_errors_exit_one() {
    let (code, r) = verify("linear_profile.json", &[]);
    assert_eq!(code, 1);
    assert!(r["suites"][0]["error"].as_str().unwrap().contains("a″ = ā″ = 0"));
    let out = cli(&["verify", "--config", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));
    let cfg = config("zeroc.json");
    let out = cli(&["scan", "--config", cfg.to_str().unwrap(), "--grid", "1:-1:5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan_prints_grid() {
    let cfg = config("zeroc.json");
    let out = cli(&["scan", "--config", cfg.to_str().unwrap(), "--grid", "-1:1:6"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["nodes"].as_array().unwrap().len(), 36);
    assert_eq!(r["verdict"], "REGULAR");
}
