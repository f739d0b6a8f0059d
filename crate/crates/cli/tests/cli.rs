//! End-to-end tests of the command-line surface: flag validation, exit
//! codes, the emitted file sets, and rerun determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixedmf"))
}

#[test]
fn estimate_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "estimate",
            "--base",
            "2",
            "--levels",
            "10",
            "--weights",
            "0.25,0.75",
            "--weights",
            "0.5,0.5",
            "--q-min",
            "-2",
            "--q-max",
            "2",
            "--q-step",
            "0.5",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let dims = std::fs::read_to_string(dir.path().join("dimensions.csv")).unwrap();
    assert!(dims.starts_with("q_1,b_hat,B_hat,Lambda_hat,residual\n"));
    assert_eq!(dims.lines().count(), 1 + 9, "one row per grid point");
    for name in ["tstar.csv", "config.toml", "report.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn estimate_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let out = bin()
            .args([
                "estimate",
                "--levels",
                "9",
                "--weights",
                "0.3,0.7",
                "--weights",
                "0.5,0.5",
                "--q-min",
                "-1",
                "--q-max",
                "1",
                "--q-step",
                "0.25",
                "--seed",
                "5",
                "--out",
                dir.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        (
            std::fs::read(dir.path().join("dimensions.csv")).unwrap(),
            std::fs::read(dir.path().join("tstar.csv")).unwrap(),
        )
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
}

#[test]
fn missing_weights_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["estimate", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_step_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "estimate",
            "--weights",
            "0.25,0.75",
            "--weights",
            "0.5,0.5",
            "--q-step",
            "0",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inconsistent_weight_lengths_is_usage_error() {
    let out = bin()
        .args([
            "estimate",
            "--weights",
            "0.25,0.75",
            "--weights",
            "0.2,0.3,0.5",
            "--out",
            "/tmp/unused",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = bin().args(["estimate", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ingest_reads_plain_text_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("points.txt");
    std::fs::write(&samples, "0.1\n0.3\n0.6\n0.9\n").unwrap();
    let out = bin()
        .args([
            "ingest",
            "--levels",
            "4",
            "--samples",
            samples.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("measure,level,alpha_level,alpha_hat\n"));
}

#[test]
fn spectrum_k2_warns_and_skips_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "spectrum",
            "--levels",
            "8",
            "--weights",
            "0.25,0.75",
            "--weights",
            "0.7,0.3",
            "--weights",
            "0.5,0.5",
            "--q-min",
            "-1",
            "--q-max",
            "1",
            "--q-step",
            "0.5",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("spectrum.csv").exists());
    assert!(!dir.path().join("spectrum.svg").exists());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipped"), "warning expected, got: {stderr}");
}

#[test]
fn config_file_roundtrip_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin()
        .args([
            "estimate",
            "--levels",
            "9",
            "--weights",
            "0.25,0.75",
            "--weights",
            "0.5,0.5",
            "--q-min",
            "0",
            "--q-max",
            "1",
            "--q-step",
            "0.5",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(first.status.success());
    // Re-run from the emitted config into a second directory.
    let dir2 = tempfile::tempdir().unwrap();
    let second = bin()
        .args([
            "estimate",
            "--config",
            dir.path().join("config.toml").to_str().unwrap(),
            "--out",
            dir2.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(second.status.success());
    let a = std::fs::read(dir.path().join("dimensions.csv")).unwrap();
    let b = std::fs::read(dir2.path().join("dimensions.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_reports_ten_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("10 checks, suite passed"));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(report.matches("\"status\"").count(), 10);
}
