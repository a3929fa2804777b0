use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gw")).args(args).output().expect("gw runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gw-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn extinction_prints_q() {
    let out = gw(&["extinction", "--family", "binary", "--p", "0.75"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0.333333333333");
}

#[test]
fn domain_errors_exit_one_with_json() {
    let out = gw(&["build-law", "--family", "binary", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "invalid_family");

    let config = scratch("subcritical.json");
    fs::write(&config, r#"{"center": {"family": "binary", "p": 0.4}, "grid": [{"family": "binary", "p": 0.45}]}"#).unwrap();
    let out = gw(&["modulus", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "not_supercritical");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gw(&["--bogus"]).status.code(), Some(2));
    let out = gw(&["law", "-n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
}

#[test]
fn output_is_reproducible_without_timestamp() {
    let args = ["simulate", "--family", "binary", "--p", "0.75", "--reps", "20000", "--seed", "9", "--no-timestamp"];
    let a = gw(&args);
    let b = gw(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("# gw.simulate.v1"));

    let json = gw(&["law", "--family", "three-point", "--p0", "0.2", "--p2", "0.5", "--p3", "0.3", "-n", "3", "--format", "json", "--no-timestamp"]);
    let again = gw(&["law", "--family", "three-point", "--p0", "0.2", "--p2", "0.5", "--p3", "0.3", "-n", "3", "--format", "json", "--no-timestamp"]);
    assert_eq!(json.stdout, again.stdout);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v.get("timestamp").is_none());
}

#[test]
fn metric_between_saved_laws() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    for (path, p) in [(&a, "0.75"), (&b, "0.7")] {
        let out = gw(&["build-law", "--family", "binary", "--p", p, "-o", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let run = |kind: &str, x: &PathBuf, y: &PathBuf| -> f64 {
        let out = gw(&["metric", "--kind", kind, "--format", "json", x.to_str().unwrap(), y.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["value"].as_f64().or_else(|| v["result"]["distance"].as_f64()).unwrap()
    };
    assert_eq!(run("prohorov", &a, &a), 0.0);
    assert!((run("tv", &a, &b) - 0.05).abs() < 1e-12);
    // integer supports: Prohorov coincides with TV
    assert!((run("prohorov", &a, &b) - 0.05).abs() < 1e-12);
}

#[test]
fn verify_lists_every_claim() {
    let out = gw(&["verify", "--suite", "all", "--instances", "5", "--no-timestamp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], Value::Bool(true));
    let text = stdout(&out);
    for claim in gw_core::lab::CLAIMS {
        assert!(text.contains(claim), "missing {claim}");
    }
    let out = gw(&["verify", "--suite", "no-such-claim"]);
    assert_eq!(out.status.code(), Some(1));
}
