use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_edgeworth"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir)
        .arg("--timestamp")
        .arg("t0")
        .env("EDGEWORTH_THREADS", "2")
        .output()
        .unwrap()
}

fn files(out: &Output) -> Vec<PathBuf> {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["files"].as_array().unwrap().iter().map(|f| PathBuf::from(f.as_str().unwrap())).collect()
}

fn report(out: &Output) -> Value {
    let path = files(out).into_iter().find(|p| p.extension().unwrap() == "json").unwrap();
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn stderr_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"].as_str().unwrap().to_string()
}

const RUNNING: &str = r#""model": {"type": "markov", "p": [[0.7, 0.3], [0.4, 0.6]], "h": [[1, 0], [0, 0]]}"#;

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/expand-running-chain.json")
}

#[test]
fn expand_report_matches_golden_file() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "expand", "order": 3}}}}"#);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run(a.path(), &[], &cfg);
    let ob = run(b.path(), &[], &cfg);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    let fa = files(&oa);
    let fb = files(&ob);
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{x:?} differs between runs");
    }
    let name = fa[0].file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("expand-") && name.ends_with("-t0.json"), "{name}");
    let body = std::fs::read_to_string(&fa[0]).unwrap();
    if std::env::var_os("EDGEWORTH_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), &body).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file; set EDGEWORTH_UPDATE_GOLDEN=1 to create");
    assert_eq!(body, golden);
}

#[test]
fn expand_iid_skewed_unit_variance() {
    // two-point law with mean 0, variance 1 and third moment 1
    let p = (5.0 - 5f64.sqrt()) / 10.0;
    let q = 1.0 - p;
    let b = (q / p).sqrt();
    let a = -p * b / q;
    let cfg = format!(
        r#"{{"model": {{"type": "iid", "pmf": [[{a}, {q}], [{b}, {p}]]}}, "run": {{"command": "expand", "order": 1}}}}"#
    );
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    assert!(out.status.success());
    let r = report(&out);
    let p1 = r["P"][1].as_array().unwrap();
    assert!((num(&p1[0]) - 1.0 / 6.0).abs() < 1e-12);
    assert!(num(&p1[1]).abs() < 1e-12);
    assert!((num(&p1[2]) + 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn expand_symmetric_iid_has_zero_p1() {
    let cfg = r#"{"model": {"type": "iid", "pmf": [[-1, 0.5], [1, 0.5]]}, "run": {"command": "expand", "order": 2}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    let r = report(&out);
    assert!(r["P"][1].as_array().unwrap().iter().all(|c| num(c).abs() < 1e-14));
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "expand", "order": 1}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    let csv = files(&out).into_iter().find(|p| p.extension().unwrap() == "csv").unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("family,p,degree,coefficient\n"));
    assert!(!text.contains('\r'));
    let value = text.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    let mantissa = value.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17, "{value}");
}

#[test]
fn verify_lattice_chain_passes() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "verify", "order": 1, "N_list": [64, 256, 1024], "forms": ["lattice"]}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    let csv = files(&out).into_iter().find(|p| p.to_str().unwrap().ends_with(".lattice.csv")).unwrap();
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("N,raw_error,scaled_error\n"));
}

#[test]
fn verify_order_zero_passes() {
    let cfg = r#"{"model": {"type": "iid", "pmf": [[0, 0.3], [1, 0.5], [3, 0.2]]},
                  "run": {"command": "verify", "order": 0, "N_list": [16, 64, 256], "forms": ["classical"]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_failed_verdict_exits_4() {
    // classical form on a lattice law: the scaled error grows with N
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "verify", "order": 2, "N_list": [64, 256], "forms": ["classical"]}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn degenerate_observable_exits_2() {
    let cfg = r#"{"model": {"type": "markov", "p": [[0.7, 0.3], [0.4, 0.6]], "h": [[1, 1], [1, 1]]},
                  "run": {"command": "verify", "order": 1, "N_list": [8, 16]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_kind(&out), "DegenerateVariance");
}

#[test]
fn infeasible_oracle_exits_3() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "verify", "order": 1, "N_list": [10000000], "oracle": "dp"}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "TableTooLarge");
    assert!(v["message"].as_str().unwrap().contains("N = 10000000"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], r#"{"model": {"type": "markov"}}"#);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_kind(&out), "InvalidConfig");
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "expand", "order": 9}}}}"#);
    let out = run(dir.path(), &[], &cfg);
    assert_eq!(stderr_kind(&out), "OrderOutOfRange");
}

#[test]
fn flags_override_config() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "expand", "order": 1}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["expand", "--order", "3"], &cfg);
    assert_eq!(report(&out)["order"], 3);
}

#[test]
fn diagnose_flags_small_gap_and_lattice_resonance() {
    let cfg = r#"{"model": {"type": "markov", "p": [[0.9999999999, 1e-10], [1e-10, 0.9999999999]],
                            "h": [[1, 0], [0, 0]], "mu0": [1, 0]},
                  "run": {"command": "diagnose", "t_grid": [1.0]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["gap"]["flag"], "GapBelowTolerance");

    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "diagnose", "t_grid": [1.0, 6.283185307179586]}}}}"#);
    let out = run(dir.path(), &[], &cfg);
    let r = report(&out);
    let row = &r["table"][1];
    assert!((num(&row["spectral_radius"]) - 1.0).abs() < 1e-9);
    assert_eq!(row["lattice_resonance"], true);
    assert!(num(&r["table"][0]["spectral_radius"]) < 1.0);
}

#[test]
fn diagnose_reports_diophantine_fit() {
    let cfg = r#"{"model": {"type": "markov", "p": [[0.45, 0.55], [0.6, 0.4]],
                            "h": [[0, 0], [0.3819660112501051, 1]]},
                  "run": {"command": "diagnose", "t_grid": [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    let r = report(&out);
    assert!(r["diophantine"]["beta"].is_number());
    assert!(r["diophantine"]["residual"].is_number());
    assert!(num(&r["theta"]) > 0.0);
}

#[test]
fn moments_iid_variance() {
    let cfg = r#"{"model": {"type": "iid", "pmf": [[0, 0.3], [2, 0.7]]}, "run": {"command": "moments", "kmax": 4}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], cfg);
    let r = report(&out);
    let a21 = r["moment_coefficients"].as_array().unwrap().iter().find(|e| e["k"] == 2 && e["j"] == 1).unwrap();
    assert!((num(&a21["value"]) - 0.84).abs() < 1e-12);
}

#[test]
fn lclt_density_at_zero() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "lclt", "u": 0, "N": 100}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    let r = report(&out);
    let v: Value = {
        let e = tempfile::tempdir().unwrap();
        let o = run(e.path(), &[], &format!(r#"{{{RUNNING}, "run": {{"command": "expand", "order": 0}}}}"#));
        report(&o)
    };
    let s2 = num(&v["sigma2"]);
    assert!((num(&r["density"]) - 1.0 / (2.0 * std::f64::consts::PI * s2).sqrt()).abs() < 1e-15);
}

#[test]
fn moddev_lattice_chain_ratio() {
    let cfg = format!(r#"{{{RUNNING}, "run": {{"command": "moddev", "order": 1, "c": 0.5, "N": 4096}}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ratio = num(&report(&out)["rows"][0]["ratio"]);
    assert!((0.8..=1.2).contains(&ratio), "{ratio}");
}

#[test]
fn monte_carlo_verify_is_seed_deterministic() {
    let cfg = r#"{"model": {"type": "ulam", "map": {"kind": "doubling"},
                            "observable": {"kind": "cos", "amplitude": 1, "frequency": 1, "phase": 0}, "cells": 64},
                  "run": {"command": "verify", "order": 1, "N_list": [16, 32], "oracle": "mc",
                          "seed": 7, "trials": 20000, "forms": ["classical"]}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run(a.path(), &[], cfg);
    let ob = run(b.path(), &[], cfg);
    assert_ne!(oa.status.code(), Some(2));
    for (x, y) in files(&oa).iter().zip(files(&ob).iter()) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let mut missing_seed = String::from(cfg);
    missing_seed = missing_seed.replace(r#""seed": 7, "#, "");
    assert_eq!(run(a.path(), &[], &missing_seed).status.code(), Some(2));
}
