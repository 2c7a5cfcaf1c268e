use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const REFERENCE: &str = r#"{"omega": 1.0, "alpha": 8.5,
  "gamma": {"g11": 0.05, "g22": 0.1, "g33": 1.0, "g23": 0.3},
  "t_stop": 2.0, "n_traj": 300}"#;

fn zeno(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .current_dir(dir)
        .args(args)
        .env_remove("ZENO_THREADS")
        .output()
        .unwrap()
}

fn with_config(text: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), text).unwrap();
    dir
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

#[test]
fn spectrum_json_lists_closed_form_eigenvalues() {
    let dir = with_config(r#"{"omega": 1.0, "alpha": 10.0}"#);
    let out = zeno(
        dir.path(),
        &[
            "spectrum", "--config", "run.json", "--format", "json", "--out", "s.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&read(&dir, "s.json")).unwrap();
    assert_eq!(
        doc["result"]["eigenvalues"]["re"],
        serde_json::json!([-5.0, -4.0, -1.0])
    );
    assert_eq!(
        doc["result"]["eigenvalues"]["im"],
        serde_json::json!([0.0, 0.0, 0.0])
    );
    assert_eq!(doc["meta"]["seed"], 42);
    assert_eq!(doc["meta"]["config"]["alpha"], 10.0);
    assert!(doc["meta"]["tool_version"].is_string());
}

#[test]
fn indefinite_noise_exits_with_validation_status() {
    let dir = with_config(r#"{"omega": 1.0, "gamma": {"g22": 0.1, "g33": 1.0, "g23": 0.9}}"#);
    let out = zeno(dir.path(), &["validate", "--config", "run.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive semidefinite"));
}

#[test]
fn malformed_and_missing_configs() {
    let dir = with_config("{\"omega\": 1.0,\n \"alpha\": }");
    let out = zeno(dir.path(), &["validate", "--config", "run.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = zeno(dir.path(), &["validate", "--config", "absent.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_decay_csv_header_and_format() {
    let dir = with_config(REFERENCE);
    let out = zeno(
        dir.path(),
        &["sweep-decay", "--config", "run.json", "--out", "d.csv"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = read(&dir, "d.csv");
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("alpha,rate_nonoise,rate_dn,rate_fn,flags")
    );
    assert_eq!(text.lines().count(), 1002);
    assert!(!text.contains('\r'));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    // 17 significant digits.
    assert_eq!(row[2], "1.2000000000000002e0");
    assert!(text
        .lines()
        .any(|l| l.starts_with("8.0000000000000000e0,") && l.ends_with(",exc_n;enh_dn;enh_fn")));
    assert!(text.contains("enh_dn"));
}

#[test]
fn montecarlo_output_is_byte_identical() {
    let dir = with_config(REFERENCE);
    for (name, threads) in [("a.csv", "1"), ("b.csv", "4")] {
        let out = zeno(
            dir.path(),
            &[
                "montecarlo",
                "--config",
                "run.json",
                "--out",
                name,
                "--threads",
                threads,
            ],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(read(&dir, "a.csv"), read(&dir, "b.csv"));
    assert!(read(&dir, "a.csv").starts_with("t,p_mean,p_stderr,p_exact\n"));

    let out = zeno(
        dir.path(),
        &[
            "montecarlo",
            "--config",
            "run.json",
            "--out",
            "c.csv",
            "--seed",
            "7",
        ],
    );
    assert!(out.status.success());
    assert_ne!(read(&dir, "a.csv"), read(&dir, "c.csv"));
}

#[test]
fn json_sweeps_are_reproducible() {
    let dir = with_config(REFERENCE);
    for name in ["a.json", "b.json"] {
        let out = zeno(
            dir.path(),
            &[
                "sweep-survival",
                "--config",
                "run.json",
                "--format",
                "json",
                "--out",
                name,
            ],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(read(&dir, "a.json"), read(&dir, "b.json"));
    let doc: serde_json::Value = serde_json::from_str(&read(&dir, "a.json")).unwrap();
    assert_eq!(doc["result"]["series"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_survival_with_monte_carlo_columns() {
    let dir = with_config(
        r#"{"omega": 1.0, "alpha": 4.0, "variants": ["noiseless", "montecarlo"],
            "t_stop": 1.0, "t_points": 11, "n_traj": 200}"#,
    );
    let out = zeno(dir.path(), &["sweep-survival", "--config", "run.json"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,noiseless,montecarlo,montecarlo_stderr\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn regions_need_noise() {
    let dir = with_config(r#"{"omega": 1.0}"#);
    assert_eq!(
        zeno(dir.path(), &["regions", "--config", "run.json"])
            .status
            .code(),
        Some(1)
    );

    let dir = with_config(REFERENCE);
    let out = zeno(
        dir.path(),
        &["regions", "--config", "run.json", "--format", "json"],
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let run = &doc["result"]["map"]["rows"][0]["intervals"][0];
    assert!((run[0].as_f64().unwrap() - 5.4155).abs() < 1e-3);
    assert!((run[1].as_f64().unwrap() - 11.3671).abs() < 1e-3);
}

#[test]
fn remaining_subcommands_succeed() {
    let dir = with_config(REFERENCE);
    for cmd in ["evolve", "validate", "kraus-check", "spectrum"] {
        let out = zeno(dir.path(), &[cmd, "--config", "run.json"]);
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn threads_fall_back_to_environment() {
    let dir = with_config(r#"{"omega": 1.0, "alpha": 4.0}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .current_dir(dir.path())
        .args(["validate", "--config", "run.json"])
        .env("ZENO_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .current_dir(dir.path())
        .args(["validate", "--config", "run.json"])
        .env("ZENO_THREADS", "many")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
