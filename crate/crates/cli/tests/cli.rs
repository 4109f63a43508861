use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn yblaser(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yblaser"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_grid(dir: &Path) {
    fs::write(dir.join("c.txt"), "nx = 6\nny = 5\n# coarse\n").unwrap();
}

#[test]
fn params_prints_derived_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = yblaser(dir.path(), &["params"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("c1 = 0.341"), "{text}");
    assert!(text.contains("omega_cavity_mhz = 18.07"), "{text}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "delta_mot_mhz = -30\ndelta_mot_mhz = -31\n").unwrap();
    let out = yblaser(dir.path(), &["gain", "--config", "bad.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");

    let out = yblaser(dir.path(), &["gain", "--config", "missing.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = yblaser(dir.path(), &["threshold-map", "--svg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // Collective coupling far beyond what the step control can follow.
    fs::write(
        dir.path().join("c.txt"),
        "n_atoms = 1e10\nnx = 2\nny = 2\nx_min_mhz = 1\nx_max_mhz = 3\ny_min_mhz = -31\ny_max_mhz = -29\n",
    )
    .unwrap();
    let out = yblaser(dir.path(), &["freq-map", "--config", "c.txt", "--out", "f"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step-doubling"));
    let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("-31,,"));
}

#[test]
fn unsampleable_step_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "dt_us = 0.01\nnx = 2\nny = 2\n").unwrap();
    let out = yblaser(dir.path(), &["freq-map", "--config", "c.txt"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn threshold_map_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    small_grid(dir.path());
    let a = yblaser(dir.path(), &["threshold-map", "--config", "c.txt", "--out", "a", "--svg", "--workers", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = yblaser(dir.path(), &["threshold-map", "--config", "c.txt", "--out", "b", "--workers", "3"]);
    assert!(b.status.success());
    let csv_a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv_a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 6);
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.contains("<polyline"));
    let meta = fs::read_to_string(dir.path().join("a.meta.jsonl")).unwrap();
    assert!(meta.lines().all(|l| l.starts_with('{') && l.ends_with('}')));
}

#[test]
fn resume_reuses_checkpoint_and_refuses_other_grid() {
    let dir = tempfile::tempdir().unwrap();
    small_grid(dir.path());
    let args = ["threshold-map", "--config", "c.txt", "--out", "m", "--resume", "ck.txt"];
    assert!(yblaser(dir.path(), &args).status.success());
    let first = fs::read(dir.path().join("m.csv")).unwrap();
    let ck = fs::read_to_string(dir.path().join("ck.txt")).unwrap();
    assert_eq!(ck.lines().count(), 31);

    assert!(yblaser(dir.path(), &args).status.success());
    assert_eq!(first, fs::read(dir.path().join("m.csv")).unwrap());
    assert_eq!(fs::read_to_string(dir.path().join("ck.txt")).unwrap(), ck);
    let meta = fs::read_to_string(dir.path().join("m.meta.jsonl")).unwrap();
    assert!(meta.contains("\"resumed_cells\":30"), "{meta}");

    fs::write(dir.path().join("c.txt"), "nx = 7\nny = 5\n").unwrap();
    let out = yblaser(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn power_curve_has_threshold() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "p_mot_mw = 20\nn_power = 4\np_pump_max_mw = 3\n").unwrap();
    let out = yblaser(dir.path(), &["power-curve", "--config", "c.txt", "--out", "pc"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("pc.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][2], 0.0);
    assert!(rows[3][2] > rows[2][2] && rows[2][2] > 0.0);
    let meta = fs::read_to_string(dir.path().join("pc.meta.jsonl")).unwrap();
    assert!(meta.contains("\"record\":\"threshold\""));
}

#[test]
fn pump_rate_scan_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    small_grid(dir.path());
    let out = yblaser(dir.path(), &["pump-rate", "--config", "c.txt"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("delta_pump_mhz,w_per_us\n"));
    assert_eq!(text.lines().count(), 7);
}
