//! End-to-end behaviour of the `qosc` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qosc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qosc"));
    c.env_remove("QOSC_OUT_DIR");
    c
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// The single stderr line of a failed run, parsed.
fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {text}");
    serde_json::from_str(lines[0]).unwrap()
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn golden_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let status = qosc()
        .args(["run", "--config"])
        .arg(golden("impulse_run.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let produced = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let expected_path = golden("impulse_trajectory.csv");
    if std::env::var_os("QOSC_BLESS").is_some() {
        std::fs::write(&expected_path, &produced).unwrap();
    }
    let expected = std::fs::read_to_string(&expected_path).expect("golden file; regenerate with QOSC_BLESS=1");
    let (h1, a) = parse_csv(&produced);
    let (h2, b) = parse_csv(&expected);
    assert_eq!(h1, h2);
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        let ok = qosc()
            .args(["trajectory", "--config"])
            .arg(golden("impulse_run.json"))
            .args(["--set", "t_max=3", "--log-grid", "--out"])
            .arg(d)
            .output()
            .unwrap()
            .status;
        assert!(ok.success());
    }
    assert_eq!(std::fs::read(a.path().join("trajectory.csv")).unwrap(), std::fs::read(b.path().join("trajectory.csv")).unwrap());
}

#[test]
fn out_flag_overrides_environment() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |extra: Option<&Path>| {
        let mut c = qosc();
        c.env("QOSC_OUT_DIR", env_dir.path()).args(["trajectory", "--config"]).arg(golden("impulse_run.json"));
        if let Some(d) = extra {
            c.arg("--out").arg(d);
        }
        assert!(c.output().unwrap().status.success());
    };
    run(None);
    assert!(env_dir.path().join("trajectory.csv").exists());
    std::fs::remove_file(env_dir.path().join("trajectory.csv")).unwrap();
    run(Some(flag_dir.path()));
    assert!(flag_dir.path().join("trajectory.csv").exists());
    assert!(!env_dir.path().join("trajectory.csv").exists());
}

#[test]
fn errors_are_single_line_json() {
    let out = qosc().args(["trajectory", "--config", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "io");

    let out = qosc().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");

    let dir = tempfile::tempdir().unwrap();
    let out = qosc()
        .args(["trajectory", "--config"])
        .arg(golden("impulse_run.json"))
        .args(["--set", "t_max=-1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("t_max"));

    let out = qosc()
        .args(["ellipse", "--config"])
        .arg(golden("impulse_run.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["message"].as_str().unwrap().contains("harmonic"));
}

#[test]
fn help_exits_zero() {
    let out = qosc().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("figures"));
}

#[test]
fn verify_is_deterministic_under_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut reports = Vec::new();
    for d in [a.path(), b.path()] {
        let out = qosc().args(["verify", "--seed", "7", "--out"]).arg(d).output().unwrap();
        let report: Value = serde_json::from_slice(&std::fs::read(d.join("verify.json")).unwrap()).unwrap();
        assert_eq!(out.status.success(), report["pass"].as_bool().unwrap());
        assert_eq!(report["seed"], 7);
        reports.push(report);
    }
    assert_eq!(reports[0]["checks"], reports[1]["checks"]);
}

#[test]
fn sweep_creates_point_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = qosc()
        .args(["trajectory", "--config"])
        .arg(golden("impulse_run.json"))
        .args(["--sweep", "params.gamma=0.5:1.5:3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..3 {
        assert!(dir.path().join(format!("sweep_{i:03}/trajectory.csv")).exists());
    }
    assert!(dir.path().join("sweep.json").exists());
}
