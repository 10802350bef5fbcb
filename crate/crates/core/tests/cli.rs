use std::path::Path;
use std::process::{Command, Output};

use vsc_ambient::fixtures::{build_fixture, run_case, Case, CaseOptions};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vsc-ambient"));
    c.env_remove("VSC_AMBIENT_OUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn modes_of_second_order_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let w = 2.0 * std::f64::consts::PI;
    std::fs::write(dir.path().join("osc.csv"), format!("0,1\n{},{}\n", -w * w, -0.1 * w)).unwrap();
    let out = run(dir.path(), &["modes", "--matrix", "osc.csv", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["freq_hz"].as_f64().unwrap() - 0.99875).abs() < 1e-5);
    assert!((rows[0]["damping_pct"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn chained_commands_reproduce_library_case() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["simulate", "--model", "ninebus_1vsc", "--duration", "60", "--dt", "0.02", "--sigma", "0.05", "--seed", "1", "-o", "traj.csv"]);
    run(d, &["estimate", "--traj", "traj.csv", "--tau", "1", "-o", "ahat.csv"]);
    run(d, &["compare", "--truth", "ninebus_1vsc", "--est", "ahat.csv", "-o", "table.csv"]);
    run(d, &["case", "I", "--fixture", "ninebus_1vsc", "--seeds", "1", "--duration", "60", "-o", "report.json"]);

    let mut opts = CaseOptions::default();
    opts.sim.duration = 60.0;
    let fixture = build_fixture("ninebus_1vsc").unwrap();
    let report = run_case(&fixture, Case::I, &[1], &opts).unwrap();

    let mut expected = Vec::new();
    report.runs[0].comparison.write_csv(&mut expected).unwrap();
    assert_eq!(std::fs::read(d.join("table.csv")).unwrap(), expected);

    let mut json = serde_json::to_string_pretty(&report).unwrap();
    json.push('\n');
    assert_eq!(std::fs::read_to_string(d.join("report.json")).unwrap(), json);

    for f in ["traj.json", "traj.manifest.json", "ahat.diagnostics.json", "ahat.manifest.json", "table.manifest.json", "report.csv", "report.manifest.json"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("traj.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["config"]["duration"], 60.0);
}

#[test]
fn model_build_and_check() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["model", "build", "twomachine_1vsc", "-o", "two.json"]);
    let out = run(dir.path(), &["model", "check", "two.json", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_gen"], 2);
    assert_eq!(report["hurwitz"], true);
    assert_eq!(report["modes"].as_array().unwrap().len(), 1);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let status = bin()
        .current_dir(dir.path())
        .env("VSC_AMBIENT_OUT_DIR", &out_dir)
        .args(["model", "build", "ninebus_1vsc"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("ninebus_1vsc.json").exists());
    assert!(out_dir.join("ninebus_1vsc.manifest.json").exists());
}

#[test]
fn exit_codes_and_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().current_dir(dir.path()).args(["estimate", "--traj", "missing.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "io");
    assert!(record["message"].as_str().unwrap().contains("missing.csv"));

    let out = bin().args(["simulate", "--model", "ninebus_1vsc", "--dt", "abc"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().current_dir(dir.path()).args(["model", "build", "fourteenbus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "unknown_fixture");
}

#[test]
fn full_coordinates_need_ridge_on_command_line() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["simulate", "--model", "twomachine_1vsc", "--duration", "20", "-o", "t.csv"]);
    let out = bin().current_dir(dir.path()).args(["estimate", "--traj", "t.csv", "--coords", "full"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "config");
}
