use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dislo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dislo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn constants_prints_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dislo(&["constants"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"minimal_energy\": 1.0965735902799727"));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["el_constant"].as_f64(), Some(0.8465735902799727));
    assert!(v["el_constant_deviation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn two_particle_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dislo(
        &[
            "simulate", "--n", "2", "--seed", "1", "--init", "perturbed_wall",
            "--out", "run.csv", "--trajectory", "traj.csv", "--svg", "plot.svg",
            "--report", "report.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!((report["energy"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);

    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# n=2 seed=1 label=perturbed_wall"));
    assert_eq!(lines.next(), Some("i,x1,x2"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!(cols[0].abs() < 1e-6 && (cols[1].abs() - 0.5).abs() < 1e-6, "{line}");
    }
    let traj = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    assert!(traj.starts_with("iter,energy,scaled_energy,grad_norm,step\n"));
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.matches("<circle").count() == 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, tag: &str| {
        let csv = format!("run{tag}.csv");
        let traj = format!("traj{tag}.csv");
        let out = dislo(
            &[
                "--threads", threads, "simulate", "--n", "40", "--seed", "3",
                "--max-iters", "200", "--out", &csv, "--trajectory", &traj,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
        (
            out.stdout,
            std::fs::read(dir.path().join(csv)).unwrap(),
            std::fs::read(dir.path().join(traj)).unwrap(),
        )
    };
    let a = run("1", "a");
    let b = run("4", "b");
    assert_eq!(a, b);
}

#[test]
fn verify_el_coarse_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dislo(
        &["verify-el", "--step", "0.25", "--report", "el.json", "--axis-csv", "axis.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["global_min_margin"].as_f64().unwrap() >= -1e-6);
    assert!(v["note"].as_str().unwrap().contains("quasi-everywhere"));
    let axis = std::fs::read_to_string(dir.path().join("axis.csv")).unwrap();
    assert!(axis.starts_with("t,f_closed,f_quad,diff\n"));
    assert_eq!(axis.lines().count(), 51);
}

#[test]
fn contract_violation_exits_one_with_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dislo(
        &["verify-fourier", "--grid", "32", "--cases", "1", "--pairing-grid", "64", "--tol", "1e-12"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--bogus"][..],
        &["simulate"][..],
        &["verify-el", "--step", "3", "--xmax", "3"][..],
        &["simulate", "--n", "3", "--init", "square"][..],
        &["simulate", "--n", "3", "--backtrack-factor", "1.5"][..],
        &["frobnicate"][..],
    ] {
        let out = dislo(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"simulate": {"n": 3, "seed": 4, "init": "perturbed_wall", "max-iters": 50}}"#,
    )
    .unwrap();
    let out = dislo(&["--config", "cfg.json", "simulate", "--seed", "9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["n"], 3);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["init"], "perturbed_wall");

    std::fs::write(dir.path().join("bad.json"), r#"{"simulate": {"particles": 3}}"#).unwrap();
    let out = dislo(&["--config", "bad.json", "simulate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn field_evaluates_points() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.csv"), "x1,x2\n0,0\n0,2\n1,0\n").unwrap();
    let out = dislo(&["field", "--points", "in.csv", "--out", "F.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("F.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!((rows[0][2] - 0.8465735902799727).abs() < 1e-9);
    assert!((rows[1][2] - 1.3794135656335247).abs() < 1e-9);
    assert!((rows[2][2] - 1.054120045602003).abs() < 1e-9);

    std::fs::write(dir.path().join("bad.csv"), "x1,x2\n0,zero\n").unwrap();
    let out = dislo(&["field", "--points", "bad.csv", "--out", "G.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convexity_probe_reports_convex_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dislo(&["convexity", "--grid", "96", "--report", "cvx.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["strictly_convex"], true);
    assert_eq!(v["values"].as_array().unwrap().len(), 11);
}
