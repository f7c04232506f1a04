use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ergofit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergofit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn assert_error(out: &Output, code: i32, needle: &str) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.lines().count(), 1, "one-line error expected, got {err:?}");
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains(needle), "`{needle}` missing from {err}");
}

fn simulate(dir: &Path, model: &str, theta: Option<&str>) -> String {
    let path = dir.join("traj.csv");
    let path_s = path.to_str().unwrap().to_string();
    let mut args = vec!["simulate", "--model", model, "--T", "100", "--seed", "7", "--out", &path_s];
    if let Some(t) = theta {
        args.extend(["--theta", t]);
    }
    let out = ergofit(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    path_s
}

#[test]
fn simulate_then_test_with_autocalibration() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(dir.path(), "family:gamma=1", Some("0.5,1"));
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("t,x\n"));
    assert_eq!(text.lines().count(), 10_002);

    let out = ergofit(&[
        "test", "--traj", &traj, "--stat", "ParamEDF:CvM", "--model", "family:gamma=1",
        "--eps", "0.05", "--calibration-n", "2000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let verdict: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["statistic"], "ParamEDF:CvM");
    assert_eq!(verdict["law_id"], "Delta:gamma=1");
    assert!(verdict["threshold"].as_f64().unwrap() > 0.0);
    assert!(["accept", "reject"].contains(&verdict["decision"].as_str().unwrap()));
    let alpha_hat = verdict["theta_hat"]["alpha_hat"].as_f64().unwrap();
    assert!((alpha_hat - 0.5).abs() < 0.5);
}

#[test]
fn calibrate_then_test_with_table() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(dir.path(), "simple:ou", None);
    let table = dir.path().join("table.json");
    let table_s = table.to_str().unwrap();
    let out = ergofit(&[
        "calibrate", "--law", "int_w2", "--eps", "0.05,0.1", "--n", "2000", "--seed", "3", "--out", table_s,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(saved["version"], 1);
    assert_eq!(saved["law_id"], "int_w2");

    let out = ergofit(&[
        "test", "--traj", &traj, "--stat", "ADF:CvM", "--model", "simple:ou", "--table", table_s, "--eps", "0.1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let verdict: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(verdict.get("theta_hat").is_none());
    assert_eq!(verdict["epsilon"], 0.1);

    let out = ergofit(&[
        "test", "--traj", &traj, "--stat", "KSIncrement", "--model", "simple:ou", "--table", table_s, "--eps", "0.1",
    ]);
    assert_error(&out, 2, "int_w2");
}

#[test]
fn unsupported_regime_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(dir.path(), "simple:ou", None);
    let out = ergofit(&[
        "test", "--traj", &traj, "--stat", "ParamEDF:CvM", "--model", "family:gamma=0.5", "--eps", "0.05",
    ]);
    assert_error(&out, 2, "unsupported regime gamma=0.5");
}

#[test]
fn missing_table_without_autocalibration() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(dir.path(), "simple:ou", None);
    let out = ergofit(&[
        "test", "--traj", &traj, "--stat", "ADF:CvM", "--model", "simple:ou", "--eps", "0.05", "--no-autocalibrate",
    ]);
    assert_error(&out, 2, "--no-autocalibrate");
}

#[test]
fn malformed_input_names_the_token() {
    assert_error(&ergofit(&["simulate", "--frobnicate"]), 2, "--frobnicate");
    let out = ergofit(&[
        "simulate", "--model", "family:gamma=1,sigmaa=2", "--theta", "0,1", "--T", "1", "--seed", "1", "--out", "x.csv",
    ]);
    assert_error(&out, 2, "sigmaa");
    let out = ergofit(&["calibrate", "--law", "int_w3", "--eps", "0.05", "--n", "2000", "--seed", "1", "--out", "t.json"]);
    assert_error(&out, 2, "int_w3");
    let out = ergofit(&["calibrate", "--law", "int_w2", "--eps", "0.05", "--n", "100", "--seed", "1", "--out", "t.json"]);
    assert_error(&out, 2, "100");
    let out = ergofit(&["study", "--config", "/nonexistent/study.json", "--out", "r"]);
    assert_error(&out, 2, "/nonexistent/study.json");
}

#[test]
fn dry_run_prints_a_round_tripping_command() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(dir.path(), "simple:ou", None);
    let out = ergofit(&[
        "--dry-run", "test", "--traj", &traj, "--stat", "SimpleDensity:KS", "--model", "simple:ou", "--eps", "0.05",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let cmd = ergofit::commands::Command::from_json(text.trim()).unwrap();
    assert_eq!(cmd.to_json(), text.trim());
    assert!(matches!(cmd, ergofit::commands::Command::Test { autocalibrate: true, .. }));
}

#[test]
fn defaults_dump() {
    let out = ergofit(&["defaults"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["dt", "grid_points", "m_y", "n_steps", "field_grids", "laws"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["field_grids"]["gamma=1"]["L"].as_f64().unwrap() > 0.0);
    assert!(v["field_grids"]["gamma=1"]["dz"].as_f64().unwrap() > 0.0);
}

#[test]
fn study_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.json");
    std::fs::write(
        &config,
        r#"{"version": 1, "study": "size", "model": "simple:ou", "T": 20, "n_replicates": 50,
            "stats": ["ADF:CvM"], "epsilons": [0.1], "seed": 5,
            "calibration": {"n_replicates": 2000}}"#,
    )
    .unwrap();
    let report = dir.path().join("report");
    let out = ergofit(&["study", "--config", config.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = std::fs::read_to_string(report.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "replicate,stat_kind,norm,value,alpha_hat,beta_hat,arm,T");
    assert_eq!(rows.lines().count(), 51);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(report.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rates"][0]["n"], 50);

    std::fs::write(&config, r#"{"version": 2, "study": "size"}"#).unwrap();
    let out = ergofit(&["study", "--config", config.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_error(&out, 2, "version 2");
}
