//! End-to-end runs of the qsfm binary: scenario execution, artifact output,
//! exit codes and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qsfm")
}

fn run_args(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("QSFM_LOG", "error")
        .output()
        .expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsfm-cli-{name}-{}", std::process::id()));
    fs::remove_dir_all(&dir).ok();
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_scenario(dir: &Path, name: &str, payload: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(payload).unwrap()).unwrap();
    path
}

#[test]
fn sis_scenario_matches_decoupled_exponential() {
    let dir = workdir("sis");
    let scenario = serde_json::json!({
        "kind": "fsm",
        "generator": [[-1.0, 0.0], [0.0, 1.0]],
        "p0": [1.0, 0.0],
        "t0": 0.0,
        "t1": 1.0,
        "steps": 100
    });
    let path = write_scenario(&dir, "sis.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,p1,p2");
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (t, p1, p2) = (cols[0], cols[1], cols[2]);
        assert!((p1 - (-t).exp()).abs() < 1e-9, "t = {t}");
        assert!(p2.abs() < 1e-12);
    }

    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["wall_time"].as_f64().unwrap() >= 0.0);
    assert!(summary["inputs"]["kind"] == "fsm");

    // Schema round trip: the echoed inputs re-validate as a scenario and
    // reproduce the same run.
    let echoed = summary["inputs"].to_string();
    let rerun_path = dir.join("echoed.json");
    fs::write(&rerun_path, &echoed).unwrap();
    let rerun_dir = dir.join("rerun");
    let out2 = run_args(&[
        "run",
        "--scenario",
        rerun_path.to_str().unwrap(),
        "--out",
        rerun_dir.to_str().unwrap(),
    ]);
    assert!(out2.status.success());
    assert_eq!(
        fs::read(dir.join("trajectory.csv")).unwrap(),
        fs::read(rerun_dir.join("trajectory.csv")).unwrap()
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_scenario_and_seed_give_identical_bytes() {
    let dir = workdir("determinism");
    let scenario = serde_json::json!({
        "kind": "fsm",
        "generator": [[0.1, 0.7], [0.4, -0.3]],
        "p0": [0.6, 0.4],
        "t0": 0.0,
        "t1": 2.0,
        "steps": 64
    });
    let path = write_scenario(&dir, "scenario.json", &scenario);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let res = run_args(&[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert!(res.status.success());
    }
    let a = fs::read(out_a.join("trajectory.csv")).unwrap();
    let b = fs::read(out_b.join("trajectory.csv")).unwrap();
    assert_eq!(a, b, "CSV output must be byte-identical");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn quantum_scenario_emits_full_csv_schema() {
    let dir = workdir("quantum");
    let scenario = serde_json::json!({
        "kind": "quantum",
        "hamiltonian": {
            "E_p": [0.1, 0.2, 0.15, 0.25],
            "t_s": {"1A2A": [0.3, 0.0], "1B2B": [0.2, 0.1]},
            "q": 0.5,
            "d": [1.0, 1.4, 1.4, 1.0]
        },
        "psi0": [[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]],
        "t0": 0.0,
        "t1": 1.0,
        "steps": 50
    });
    let path = write_scenario(&dir, "quantum.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,p1,p2,p3,p4,theta1,theta2,theta3,theta4,norm,S_A,S_B\n"));
    assert_eq!(csv.lines().count(), 52);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let drift = summary["max_residuals"]["norm_drift"].as_f64().unwrap();
    assert!(drift < 1e-10, "norm drift {drift}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn q2c_map_meets_equivalence_tolerance() {
    let dir = workdir("q2c");
    // Two-qubit Hamiltonian with a zero eigenvalue; the dominant zero-mode
    // state keeps every encoded component away from the singular set.
    let zero = [0.5, -0.5, -0.5, 0.5];
    let top = [0.5, 0.5, 0.5, 0.5];
    let mid = [0.5, 0.5, -0.5, -0.5];
    let raw: Vec<f64> = (0..4).map(|k| zero[k] + 0.1 * (top[k] + mid[k])).collect();
    let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let quarter = std::f64::consts::FRAC_PI_4;
    let psi0: Vec<[f64; 2]> = raw
        .iter()
        .map(|x| [x / norm * quarter.cos(), x / norm * quarter.sin()])
        .collect();
    let scenario = serde_json::json!({
        "kind": "map-q2c",
        "hamiltonian": {
            "E_p": [0.2, 0.2, 0.2, 0.2],
            "t_s": {"1A2A": [0.3, 0.0], "1B2B": [0.3, 0.0]},
            "q": 0.2f64.sqrt(),
            "d": [1.0, 1.0, 1.0, 1.0]
        },
        "psi0": psi0,
        "t1": 2.0,
        "dt": 2e-4
    });
    let path = write_scenario(&dir, "q2c.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let dev = summary["max_residuals"]["max_deviation"].as_f64().unwrap();
    assert!(dev <= 1e-6, "max deviation {dev}");
    let csv = fs::read_to_string(dir.join("two_route.csv")).unwrap();
    assert!(csv.starts_with("t,enc1"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn c2q_map_writes_classical_hamiltonian() {
    let dir = workdir("c2q");
    let scenario = serde_json::json!({
        "kind": "map-c2q",
        "generator": [[0.0, 1.0], [1.0, 0.0]],
        "p": [0.5, 0.5]
    });
    let path = write_scenario(&dir, "c2q.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let payload: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("classical_hamiltonian.json")).unwrap())
            .unwrap();
    let hc = payload["classical_hamiltonian"].as_array().unwrap();
    assert_eq!(hc[0][1].as_f64().unwrap(), 0.5);
    assert_eq!(hc[0][0].as_f64().unwrap(), 0.0);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn wannier_scenarios_produce_reports() {
    let dir = workdir("wannier");
    let scenario = serde_json::json!({
        "kind": "wannier-1d",
        "potential": {"type": "double_well", "barrier_height": 30.0, "well_width": 1.0, "separation": 0.4}
    });
    let path = write_scenario(&dir, "w1.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("wannier_report.json")).unwrap())
            .unwrap();
    assert!(report["left_mass"].as_f64().unwrap() >= 0.95);
    assert_eq!(report["E"].as_array().unwrap().len(), 2);

    let scenario = serde_json::json!({"kind": "wannier-2d", "box_side": 2.0});
    let path = write_scenario(&dir, "w2.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("wannier2d_report.json")).unwrap())
            .unwrap();
    let th1 = report["theta1"].as_f64().unwrap();
    assert!((th1 - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_subcommand_passes_and_filters() {
    let dir = workdir("verify");
    let out = run_args(&["verify", "--out", dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("verify_report.json")).unwrap()).unwrap();
    let entries = report.as_array().unwrap();
    assert!(entries.len() >= 20);
    assert!(entries.iter().all(|e| e["status"] == "pass"));

    let out = run_args(&["verify", "--suite", "fsm", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("verify_report.json")).unwrap()).unwrap();
    assert!(report
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["suite"] == "fsm"));

    // Unknown suite name: validation failure.
    let out = run_args(&["verify", "--suite", "nope", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_kind_exits_2_with_schema_listing() {
    let dir = workdir("badkind");
    let path = dir.join("bad.json");
    fs::write(&path, r#"{"kind": "frobnicate"}"#).unwrap();
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("known kinds"), "stderr: {stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn numerical_failure_exits_3() {
    let dir = workdir("numfail");
    // Real initial amplitudes put sin(Theta) = 0: the encoding is singular
    // from the first synthesis step.
    let scenario = serde_json::json!({
        "kind": "map-q2c",
        "hamiltonian": {
            "E_p": [0.2, 0.2, 0.2, 0.2],
            "t_s": {"1A2A": [0.3, 0.0], "1B2B": [0.3, 0.0]},
            "q": 0.2f64.sqrt(),
            "d": [1.0, 1.0, 1.0, 1.0]
        },
        "psi0": [[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]],
        "t1": 1.0,
        "dt": 1e-3
    });
    let path = write_scenario(&dir, "singular.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("singularity"), "stderr: {stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn entropy_scenario_reports_both_subsystems() {
    let dir = workdir("entropy");
    let inv = 1.0 / 2.0f64.sqrt();
    let scenario = serde_json::json!({
        "kind": "entropy",
        "psi": [[inv, 0.0], [0.0, 0.0], [0.0, 0.0], [inv, 0.0]],
        "log_base": "bits"
    });
    let path = write_scenario(&dir, "entropy.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sa = summary["derived_parameters"]["S_A"].as_f64().unwrap();
    assert!((sa - 1.0).abs() < 1e-10, "Bell state is one bit, got {sa}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn steps_override_rewrites_row_count() {
    let dir = workdir("steps");
    let scenario = serde_json::json!({
        "kind": "fsm",
        "generator": [[-0.2, 0.0], [0.0, 0.2]],
        "p0": [0.5, 0.5],
        "t0": 0.0,
        "t1": 1.0,
        "steps": 10
    });
    let path = write_scenario(&dir, "steps.json", &scenario);
    let out = run_args(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--steps",
        "25",
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 27, "header plus 26 samples");
    fs::remove_dir_all(&dir).ok();
}
