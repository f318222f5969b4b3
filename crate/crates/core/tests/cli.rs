use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("torus-hodge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-hodge")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const FLAT: &str = r#"{"family": {"id": "elliptic", "t": [0.2, 1.3]}, "bundle": {"kind": "flat", "character": [0, 0]}}"#;

#[test]
fn flat_hodge_check_passes() {
    let dir = scratch_dir("flat");
    let cfg = write_config(&dir, "flat.json", FLAT);
    let out = run(&["hodge-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["tolerances"]["operator"], 1e-10);
    for r in report["identities"]["residuals"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap() <= r["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn coarse_grid_is_a_tolerance_failure() {
    let dir = scratch_dir("coarse");
    let cfg = write_config(
        &dir,
        "coarse.json",
        r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "positive", "degree": 1},
            "discretization": {"backend": "grid", "n": 8}}"#,
    );
    let out = run(&["hodge-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn config_problems_exit_with_two() {
    let dir = scratch_dir("bad");
    let malformed = write_config(&dir, "malformed.json", "{");
    let unknown = write_config(
        &dir,
        "unknown.json",
        r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "flat", "character": [0, 0]}, "extra": 1}"#,
    );
    for path in [malformed.to_str().unwrap(), unknown.to_str().unwrap(), "/nonexistent/config.json"] {
        let out = run(&["curvature", "--config", path]);
        assert_eq!(code(&out), 2, "{path}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    assert_eq!(code(&run(&["bls"])), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = scratch_dir("numerical");
    // the FD oracle rejects steps below its cancellation limit
    let cfg = write_config(
        &dir,
        "step.json",
        r#"{"family": {"id": "elliptic", "t": [0, 1]}, "bundle": {"kind": "positive", "degree": 1},
            "discretization": {"backend": "grid", "n": 16}, "oracle": true, "tolerances": {"fd_step": 1e-9}}"#,
    );
    assert_eq!(code(&run(&["curvature", "--config", cfg.to_str().unwrap()])), 3);
}

#[test]
fn bls_report_is_deterministic_and_flags_two_positivity() {
    let dir = scratch_dir("bls");
    let cfg = write_config(
        &dir,
        "bls.json",
        r#"{"family": {"id": "elliptic", "t": [0.2, 1.3]}, "bundle": {"kind": "flat", "character": [0, 0]},
            "bls": {"instances": 12}}"#,
    );
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    for out in [&a, &b] {
        let o = run(&["bls", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let report: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report["seed"], 3);
    assert_eq!(report["cases"].as_array().unwrap().len(), 24);
    assert_eq!(report["griffiths_not_nakano"]["one_positive"], true);
    assert_eq!(report["griffiths_not_nakano"]["two_positive"], false);
}

#[test]
fn scan_rank_writes_csv() {
    let dir = scratch_dir("scan");
    let cfg = write_config(
        &dir,
        "scan.json",
        r#"{"family": {"id": "jumping", "t": [0, 1]}, "scan": {"from": [-0.5, 1], "to": [0.5, 1], "samples": 11}}"#,
    );
    let out = run(&["scan-rank", "--config", cfg.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("t_re,t_im,rank,lambda1"));
    let ranks: Vec<&str> = rows.map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(ranks.len(), 11);
    assert_eq!(ranks.iter().filter(|&&r| r == "1").count(), 1);
    assert_eq!(ranks[5], "1");
}

#[test]
fn spectrum_dump_sits_next_to_the_report() {
    let dir = scratch_dir("spectrum");
    let cfg = write_config(&dir, "flat.json", FLAT);
    let out_path = dir.join("check.json");
    let out = run(&["hodge-check", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--dump-spectrum"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let mut reader = csv::Reader::from_path(dir.join("check.spectrum.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["bidegree", "index", "eigenvalue"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][0], "(0,0)");
    assert_eq!(&rows[0][1], "0");
    assert!(rows[0][2].parse::<f64>().unwrap().abs() < 1e-12);
    // 17² modes per bidegree on a curve with cutoff 8
    assert_eq!(rows.len(), 4 * 289);
}

#[test]
fn primitive_lift_on_a_surface() {
    let dir = scratch_dir("primitive");
    let cfg = write_config(
        &dir,
        "siegel.json",
        r#"{"family": {"id": "siegel-diagonal", "t": [0.1, 1.2], "b": [0.1, 0.2], "c": [0, 1.1]},
            "bundle": {"kind": "flat", "character": [0, 0, 0, 0]}, "lift": {"kind": "perturbed"}}"#,
    );
    let out = run(&["primitive-lift", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["residual_before"].as_f64().unwrap() > 1e-3);
    assert!(report["residual_after"].as_f64().unwrap() <= 1e-8);
}
