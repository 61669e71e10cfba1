use std::path::Path;
use std::process::{Command, Output};

use supercrit::output::parse_series_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_supercrit"))
}

fn run_in(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn supercrit")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run_in(&["--help"])), 0);
    assert_eq!(code(&run_in(&["run", "--help"])), 0);
    assert_eq!(code(&run_in(&["--version"])), 0);
}

#[test]
fn bad_flags_exit_64() {
    assert_eq!(code(&run_in(&["run", "--bogus"])), 64);
    assert_eq!(code(&run_in(&["run", "--case", "1", "--dim", "4"])), 64);
    assert_eq!(code(&run_in(&["run", "--case", "9", "--dim", "3"])), 64);
    assert_eq!(code(&run_in(&["run", "--dim", "3"])), 64);
    assert_eq!(code(&run_in(&["verify", "everything"])), 64);
    assert_eq!(code(&run_in(&[])), 64);
}

#[test]
fn stability_violation_exits_65_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&["run", "--case", "1", "--dim", "3", "--dt", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    assert!(!out.exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = bin().env("SUPERCRIT_THREADS", "zero").args(["verify", "energy"]).output().unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn incoming_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = bin()
        .env("SUPERCRIT_THREADS", "2")
        .args(["run", "--case", "3", "--dim", "5", "--budget", "desk", "--tfinal", "1"])
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config"]["case_id"], "incoming_ring");
    assert_eq!(m["config"]["mu"], 1.0);
    assert_eq!(m["config"]["diag_interval"], 0.05);
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in &files {
        assert!(out.join(f).is_file(), "{f} listed but missing");
    }
    for f in ["series.csv", "snapshots/u_t0.csv", "snapshots/u_t1.csv", "plots/sobolev.svg", "plots/profiles.svg"] {
        assert!(files.contains(&f), "{f} not listed");
    }

    let series = parse_series_csv(&std::fs::read_to_string(out.join("series.csv")).unwrap()).unwrap();
    assert_eq!(series.rows.len(), 21);
    for row in &series.rows {
        assert!(row.to_array().iter().all(|v| v.is_finite()));
    }
    let svg = std::fs::read_to_string(out.join("plots/sobolev.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<polyline"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = run_in(&["run", "--case", "4", "--dim", "3", "--budget", "desk", "--tfinal", "0.5", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        csv.push((
            std::fs::read(out.join("series.csv")).unwrap(),
            std::fs::read(out.join("snapshots/u_t0.csv")).unwrap(),
        ));
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn focusing_blowup_exits_2_and_keeps_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("focus.json");
    std::fs::write(
        &cfg,
        r#"{"d": 3, "p": 6, "mu": -1, "r_max": 10, "dr": 0.01, "dt": 0.0025,
            "t_final": 5, "case_id": "gaussian", "diag_interval": 0.01}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&out)["status"], "blowup");
    let series = parse_series_csv(&std::fs::read_to_string(out.join("series.csv")).unwrap()).unwrap();
    assert!(!series.rows.is_empty());
    assert!(series.rows.last().unwrap().t < 5.0);
}

#[test]
fn custom_expressions_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("custom.json");
    std::fs::write(
        &cfg,
        r#"{"d": 5, "p": 2, "r_max": 10, "dr": 0.01, "dt": 0.002, "t_final": 0.5,
            "case_id": "custom", "u0": "2*exp(-r^2)", "snapshot_times": [0.5]}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("snapshots/u_t0.5.csv").is_file());

    std::fs::write(
        &cfg,
        r#"{"d": 5, "p": 2, "r_max": 10, "dr": 0.01, "dt": 0.002, "t_final": 0.5,
            "case_id": "custom", "u0": "2*exp(-r^"}"#,
    )
    .unwrap();
    let o = run_in(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

#[test]
fn verify_energy_desk_reports_every_case() {
    let o = run_in(&["verify", "energy", "--dim", "5", "--budget", "desk"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("verdict: PASS"));
    assert_eq!(text.lines().filter(|l| l.trim_end().ends_with("true")).count(), 5);
}
