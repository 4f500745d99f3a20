use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn honest_always_passes() {
    let v = json(&qpq(&["run", "--seed", "3", "--trials", "300"]));
    assert_eq!(v["pass_frequency"], 1.0);
    assert_eq!(v["recovered_answers"]["0"], 300);
}

#[test]
fn measure_resend_passes_half_the_time() {
    let v = json(&qpq(&["run", "--strategy", "measure_resend", "--seed", "11", "--trials", "4000"]));
    let f = v["pass_frequency"].as_f64().unwrap();
    assert!((f - 0.5).abs() < 0.03, "{f}");
    assert!((v["exact_pass_probability"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for tag in ["a", "b"] {
        let path = dir.path().join(format!("{tag}.json"));
        let out = qpq(&[
            "run",
            "--strategy",
            "lucky_reprepare",
            "--variant",
            "phase",
            "--seed",
            "99",
            "--trials",
            "200",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        files.push((
            read(&path),
            read(&dir.path().join(format!("{tag}.transcript.json"))),
            read(&dir.path().join(format!("{tag}.alice.json"))),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn missing_seed_is_a_config_error() {
    assert_eq!(qpq(&["run"]).status.code(), Some(2));
}

#[test]
fn unknown_strategy_is_a_config_error() {
    assert_eq!(qpq(&["run", "--seed", "1", "--strategy", "nope"]).status.code(), Some(2));
}

#[test]
fn out_of_order_attack_is_refused() {
    let out = qpq(&["attack", "joint_measurement"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--unconstrained"));
    assert!(qpq(&["--unconstrained", "attack", "joint_measurement"]).status.success());
}

#[test]
fn multi_answer_attack_report() {
    let v = json(&qpq(&["attack", "multi_answer_rhetoric"]));
    assert!((v["chi_bits"].as_f64().unwrap() - 3f64.log2() + 1.0).abs() < 1e-9);
    for row in v["rows"].as_array().unwrap() {
        assert!((row["pass_mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!(row["reference_distance"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn phase_randomization_against_lucky_reprepare() {
    let v = json(&qpq(&["--variant", "phase", "attack", "lucky_reprepare"]));
    let row = &v["rows"][1];
    assert!((row["pass_mean"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((row["canonical_pass_mean"].as_f64().unwrap() - 0.625).abs() < 1e-9);
}

#[test]
fn sweep_csv() {
    let out = qpq(&["sweep", "--points", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("parameter,epsilon,"));
    assert!(lines[1].starts_with("0,0,1,1,0,1,1,"));
    assert!(lines[3].starts_with("1.57079632679,0.5,1,0.5,"));
}

#[test]
fn verify_small_family() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qpq(&["--d-r", "4", "verify", "--count", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&read(&path)).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["strategies"].as_array().unwrap().len(), 13);
    assert_eq!(v["metadata"]["seed"], 2024);
}

#[test]
fn decoy_table() {
    let out = qpq(&["--n", "3", "decoy"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,M,bound_bits");
    assert_eq!(lines[1], "8,1,3");
    assert_eq!(lines[8], "8,8,0");
    let v = json(&qpq(&["decoy", "--m", "2", "--format", "json"]));
    assert!((v[0]["bound_bits"].as_f64().unwrap() - 0.207518749639).abs() < 1e-11);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": 3, "d_R": 4, "seed": 5, "trials": 50, "strategy": "measure_resend"}"#).unwrap();
    let v = json(&qpq(&["--config", path.to_str().unwrap(), "--trials", "20", "run"]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["d_R"], 4);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["trials"], 20);
    assert_eq!(v["strategy"], "measure_resend");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": 2, "colour": "red"}"#).unwrap();
    assert_eq!(qpq(&["--config", path.to_str().unwrap(), "decoy"]).status.code(), Some(2));
}
