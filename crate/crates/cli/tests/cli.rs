use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn halpern() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_halpern"));
    c.env_remove("HALPERN_OUT_DIR");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(config("identity.json")).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn identity_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = halpern()
        .args(["run", config("identity.json").to_str().unwrap(), "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("identity.summary.json"));
    assert_eq!(s["converged"], true);
    assert_eq!(s["oracle"]["method"], "whole_space");
    assert!(s["error"].is_null());
    let trace = std::fs::read_to_string(dir.path().join("identity.trace.csv")).unwrap();
    assert!(trace.starts_with("n,beta,x0,x1,x2,d_oracle,s,gamma,t,lyap_slack,res_1,d_u_w\r\n"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = halpern()
        .env("HALPERN_OUT_DIR", dir.path())
        .args(["run", config("identity.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("identity.summary.json").exists());
    assert!(dir.path().join("identity.trace.csv").exists());
}

#[test]
fn stride_thins_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = halpern()
        .args([
            "run",
            config("three_caps.json").to_str().unwrap(),
            "--stride",
            "1000",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("three_caps.summary.json"));
    let n = s["iterations"].as_u64().unwrap();
    assert_eq!(s["stride"], 1000);
    assert_eq!(s["trace_rows"].as_u64().unwrap(), n / 1000 + 1 + 1);
    assert_eq!(s["monitor"]["steps_checked"].as_u64().unwrap(), n);
}

#[test]
fn max_iters_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "short.json", |v| {
        v["max_iters"] = 3.into();
    });
    let o = halpern()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let s = summary(&dir.path().join("short.summary.json"));
    assert_eq!(s["converged"], false);
    assert_eq!(s["stop_reason"], "max_iters");
}

#[test]
fn bad_coefficient_bound_exits_one_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad_a.json", |v| {
        v["alpha"]["a"] = 0.6.into();
    });
    let o = halpern()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("a must lie in (0, 1/2), got 0.6"), "{err}");
    let s = summary(&dir.path().join("bad_a.summary.json"));
    assert!(s["error"].as_str().unwrap().contains("a must lie in (0, 1/2)"));
    assert!(!dir.path().join("bad_a.trace.csv").exists());
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\"schema\": 1,").unwrap();
    let o = halpern()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let missing = halpern()
        .args(["run", "/nonexistent/x.json", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&missing), 1);
}

#[test]
fn worst_status_wins_across_configs() {
    let dir = tempfile::tempdir().unwrap();
    let short = write_config(dir.path(), "short.json", |v| {
        v["max_iters"] = 3.into();
    });
    let o = halpern()
        .arg("run")
        .arg(config("identity.json"))
        .arg(&short)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(dir.path().join("identity.summary.json").exists());
    assert!(dir.path().join("short.summary.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&halpern().output().unwrap()), 1);
    assert_eq!(code(&halpern().arg("bogus").output().unwrap()), 1);
    let o = halpern().args(["run", "x.json", "--stride", "0"]).output().unwrap();
    assert_eq!(code(&o), 1);
    assert_eq!(code(&halpern().arg("--help").output().unwrap()), 0);
}

#[test]
fn oracle_writes_a_certified_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = halpern()
        .args([
            "oracle",
            config("three_caps.json").to_str().unwrap(),
            "--resolution",
            "1e-6",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    let written = summary(&dir.path().join("three_caps.oracle.json"));
    assert_eq!(printed, written);
    assert_eq!(written["method"], "grid_refine");
    assert_eq!(written["resolution"], 1e-6);
    assert!(written["certified_gap"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn oracle_on_an_empty_intersection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "disjoint.json", |v| {
        v["mappings"] = serde_json::json!([
            {"kind": "cap_projection", "center": [0.0, 0.0, 1.0], "radius": 0.2},
            {"kind": "cap_projection", "center": [1.0, 0.0, 0.0], "radius": 0.2}
        ]);
        v["alpha"] = serde_json::json!({"kind": "constant", "values": [0.5, 0.5], "a": 0.25});
    });
    let o = halpern()
        .arg("oracle")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("empty declared intersection"), "{}", stderr(&o));
}

#[test]
fn geometry_check_passes_and_catches_corruption() {
    let ok = halpern()
        .args(["check-geometry", "--count", "2000", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let rep: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["count"], 2000);

    let bad = halpern()
        .args(["check-geometry", "--count", "2000", "--self-test-corrupt"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
    let rep: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(rep["pass"], false);
    assert_eq!(rep["corrupted"], true);
}

#[test]
fn geometry_check_with_no_samples_is_empty() {
    let o = halpern().args(["check-geometry", "--count", "0"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn negation_example_report() {
    let o = halpern().arg("example44").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["qne_violations"], 0);
    assert_eq!(rep["grid_points"], 10_000);
    assert_eq!(rep["not_strongly_quasinonexpansive"], true);
    assert!(rep["ratio_log"].as_array().unwrap().iter().all(|r| r == 1.0));
    assert!(rep["residual_log"].as_array().unwrap().iter().all(|r| r == 1.0));
}

#[test]
fn segment_run_reaches_the_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = halpern()
        .args(["run", config("segment_negation.json").to_str().unwrap(), "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("segment_negation.summary.json"));
    assert!(s["final_d_oracle"].as_f64().unwrap() <= 1e-4);
    assert_eq!(s["oracle"]["point"][0], 0.0);
    assert_eq!(s["monitor"]["lyapunov_failures"], 0);
}
