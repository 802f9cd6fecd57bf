//! End-to-end runs of the `sirpf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sirpf::report::{read_report_csv, read_trajectory_csv, SWEEP_PARTICLES_HEADER, SWEEP_Q_HEADER};

fn sirpf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sirpf"))
        .current_dir(dir)
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = sirpf(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn noiseless_simulation_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--q-true",
            "0",
            "--r",
            "0",
            "--horizon",
            "1",
            "--seed",
            "123",
            "--out",
            "t.csv",
        ],
    );
    let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,x_true,y"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "1");
    assert_eq!(fields[1].parse::<f64>().unwrap(), 8.0);
    assert!((fields[2].parse::<f64>().unwrap() - 3.2).abs() < 1e-12);
    assert!(dir.path().join("t.manifest.json").exists());
}

#[test]
fn sweep_q_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep-q",
        "--seed",
        "7",
        "--trials",
        "2",
        "--horizon",
        "50",
        "--out",
        "q.csv",
    ];
    ok(dir.path(), &args);
    let first = fs::read(dir.path().join("q.csv")).unwrap();
    let first_manifest = fs::read(dir.path().join("q.manifest.json")).unwrap();
    ok(dir.path(), &args);
    assert_eq!(first, fs::read(dir.path().join("q.csv")).unwrap());
    assert_eq!(
        first_manifest,
        fs::read(dir.path().join("q.manifest.json")).unwrap()
    );

    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next().unwrap(), SWEEP_Q_HEADER.join(","));
    assert_eq!(text.lines().count(), 37);
}

#[test]
fn missing_seed_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = sirpf(dir.path(), &["sweep-q", "--trials", "2", "--out", "q.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    assert!(!dir.path().join("q.csv").exists());
    assert!(!dir.path().join("q.manifest.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sirpf(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        sirpf(dir.path(), &["sweep-q", "--bogus", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn invalid_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "sweep-q",
            "--seed",
            "1",
            "--out",
            "a.csv",
            "--q-grid",
            "4:0.5:0.1",
        ][..],
        &[
            "sweep-q",
            "--seed",
            "1",
            "--out",
            "a.csv",
            "--resampler",
            "residual",
        ][..],
        &[
            "simulate", "--seed", "1", "--out", "a.csv", "--q-true", "-1",
        ][..],
        &["sweep-q", "--seed", "1", "--out", "a.csv", "--trials", "0"][..],
    ] {
        assert_eq!(sirpf(dir.path(), args).status.code(), Some(1), "{args:?}");
    }
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sirpf(
        dir.path(),
        &[
            "simulate",
            "--seed",
            "1",
            "--horizon",
            "3",
            "--out",
            "no/such/dir/t.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn filter_over_simulated_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--seed",
            "5",
            "--horizon",
            "60",
            "--out",
            "t.csv",
        ],
    );
    ok(
        dir.path(),
        &[
            "filter",
            "--seed",
            "5",
            "--in",
            "t.csv",
            "--n-particles",
            "100",
            "--out",
            "f.csv",
        ],
    );
    let text = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "k,x_true,y,x_hat,ess,unique_ancestors"
    );
    assert_eq!(text.lines().count(), 61);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("f.manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["result"]["rmse"].as_f64().unwrap() > 0.0);
    assert!(manifest["result"]["rmsd"].as_f64().unwrap() > 0.0);

    let traj = read_trajectory_csv(&dir.path().join("t.csv")).unwrap();
    assert_eq!(traj.observations.len(), 60);
}

#[test]
fn filter_requires_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = sirpf(dir.path(), &["filter", "--seed", "5", "--out", "f.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("f.csv").exists());
}

#[test]
fn sweep_particles_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep-particles",
            "--seed",
            "3",
            "--trials",
            "2",
            "--horizon",
            "30",
            "--n-list",
            "10,20",
            "--out",
            "p.csv",
        ],
    );
    let path = dir.path().join("p.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        SWEEP_PARTICLES_HEADER.join(",")
    );
    let report = read_report_csv(&path, 0).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert_eq!(report.rows[4].n_particles, 20);
    assert!(report.rows.iter().all(|r| r.trials == 2 && r.seed == 3));
}

#[test]
fn estimate_q_reports_grid_argmin() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "estimate-q",
            "--seed",
            "11",
            "--trials",
            "3",
            "--horizon",
            "40",
            "--q-grid",
            "0.5:2:0.5",
            "--out",
            "e.csv",
        ],
    );
    let report = read_report_csv(&dir.path().join("e.csv"), 50).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("e.manifest.json")).unwrap())
            .unwrap();
    let q_hat = manifest["result"]["q_hat"].as_f64().unwrap();
    let best = report
        .rows
        .iter()
        .min_by(|a, b| a.mean_rmsd.total_cmp(&b.mean_rmsd))
        .unwrap();
    assert_eq!(q_hat, best.q_prop);
    assert_eq!(manifest["config"]["resampler"], "systematic");
}

#[test]
fn manifest_replays_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep-q",
            "--seed",
            "9",
            "--trials",
            "2",
            "--horizon",
            "25",
            "--q-grid",
            "1:2:0.5",
            "--resampler",
            "multinomial",
            "--out",
            "r.csv",
        ],
    );
    let original = fs::read(dir.path().join("r.csv")).unwrap();
    fs::rename(
        dir.path().join("r.manifest.json"),
        dir.path().join("saved.json"),
    )
    .unwrap();
    fs::remove_file(dir.path().join("r.csv")).unwrap();
    ok(dir.path(), &["sweep-q", "--config", "saved.json"]);
    assert_eq!(original, fs::read(dir.path().join("r.csv")).unwrap());
}
