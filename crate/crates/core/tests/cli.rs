//! End-to-end runs of the command-line binary.

use std::fs;
use std::process::{Command, Output};

fn bns_lrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bns-lrm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_default_preset() {
    let o = bns_lrm(&["--validate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("c1_error = 6.50e-8"), "{text}");
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn validate_reports_failures_with_exit_code() {
    let o = bns_lrm(&["--preset", "scho", "--set", "b=0.7995", "--validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("VIOLATED"));

    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("coarse.toml");
    fs::write(&grid, "tolerance = 1e-5\nnodes = [0.05, 0.1, 0.2]\n").unwrap();
    let o = bns_lrm(&["--grid", grid.to_str().unwrap(), "--validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("[FAIL] grid"));
}

#[test]
fn run_aborts_on_assumption_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = bns_lrm(&["--preset", "scho", "--set", "b=0.7995", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("assumption"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn custom_params_run_and_plot_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("desk.txt");
    fs::write(
        &params,
        "alpha = 0.007\nrho = -4.7039\nlambda = 2.4958\na = 0.0872\nb = 11.98\nS0 = 468.40\nsigma0_sq = 0.0041\nT = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = bns_lrm(&[
        "--params",
        params.to_str().unwrap(),
        "--t",
        "0.5",
        "--strikes",
        "0.9:1.1:0.1",
        "--paths",
        "50",
        "--step",
        "0.05",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("lrm_desk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let manifest = fs::read_to_string(out.join("manifest_desk.json")).unwrap();
    assert!(manifest.contains("\"grid\": \"desk\""));

    let svg = fs::read(out.join("lrm_desk.svg")).unwrap();
    fs::remove_file(out.join("lrm_desk.svg")).unwrap();
    let o = bns_lrm(&["--plot-from", out.join("lrm_desk.csv").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("lrm_desk.svg")).unwrap(), svg);
}

#[test]
fn bad_arguments_fail_cleanly() {
    assert!(!bns_lrm(&["--strikes", "1.5:0.5:0.1", "--validate"]).status.success());
    assert!(!bns_lrm(&["--preset", "xyz", "--validate"]).status.success());
    assert!(!bns_lrm(&["--set", "beta=1", "--validate"]).status.success());
}
