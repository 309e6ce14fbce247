//! End-to-end checks of the `cmaflow` binary: config parsing, exit codes,
//! artifact emission, and thread-count independence of the outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cmaflow")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn solve_elliptic_manufactured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ell.json",
        r#"{
            "geometry": {"n": 1, "grid": 64},
            "mode": {"kind": "fixed_rhs", "density": {"constant": 1.0,
                "terms": [{"coeff": -0.4934802200544679, "wave": [1, 0], "kind": "cos"}]}}
        }"#,
    );
    let out = dir.path().join("out");
    let res = run(&[
        "solve-elliptic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("report.json").exists());
    assert!(out.join("solution.cmaf").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], serde_json::json!(true));
}

#[test]
fn unknown_config_key_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{
            "geometry": {"n": 1, "grid": 16},
            "mode": {"kind": "fixed_rhs", "density": {"constant": 1.0}},
            "tolerance": 1e-8
        }"#,
    );
    let res = run(&[
        "solve-elliptic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("tolerance"), "stderr: {stderr}");
}

#[test]
fn flow_monitor_and_corrupt_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let flow_cfg = write_config(
        dir.path(),
        "flow.json",
        r#"{
            "geometry": {"n": 1, "grid": 16},
            "initial": {"kind": "trig", "terms": [{"coeff": 0.02, "wave": [1, 0], "kind": "cos"}]},
            "nonlinearity": {"a": 1.0},
            "flow": {"t_final": 0.1, "snapshot_times": [0.04, 0.05, 0.06]}
        }"#,
    );
    let out = dir.path().join("flow_out");
    let res = run(&[
        "run-flow",
        "--config",
        flow_cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--emit-plots-data",
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("steps.csv").exists());

    // Monitor the emitted snapshots (t > 0 ones).
    let snaps: Vec<String> = ["state_t0.04.cmaf", "state_t0.05.cmaf", "state_t0.06.cmaf"]
        .iter()
        .map(|n| out.join(n).to_str().unwrap().to_string())
        .collect();
    let mon_cfg = write_config(
        dir.path(),
        "mon.json",
        &format!(
            r#"{{"snapshots": ["{}", "{}", "{}"], "nonlinearity": {{"a": 1.0}}}}"#,
            snaps[0], snaps[1], snaps[2]
        ),
    );
    let mon_out = dir.path().join("mon_out");
    let res = run(&[
        "monitor",
        "--config",
        mon_cfg.to_str().unwrap(),
        "--out",
        mon_out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(mon_out.join("monitors.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(mon_out.join("report.json")).unwrap()).unwrap();
    assert!(report["measured"]["t_tensor_identity_residual"].is_number());

    // Corrupt a snapshot's magic: the monitor run must fail cleanly.
    let victim = out.join("state_t0.05.cmaf");
    let mut bytes = fs::read(&victim).unwrap();
    bytes[1] = b'?';
    fs::write(&victim, &bytes).unwrap();
    let res = run(&[
        "monitor",
        "--config",
        mon_cfg.to_str().unwrap(),
        "--out",
        mon_out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("magic"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_body = r#"{
        "geometry": {"n": 1, "grid": 32},
        "nonlinearity": {"a": 1.0},
        "seed": 11,
        "truncations": [2, 4, 8],
        "target_min_eigenvalue": 0.3,
        "horizon_cap": 0.04,
        "snapshot_count": 3
    }"#;
    let cfg = write_config(dir.path(), "cauchy.json", cfg_body);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("out_{threads}"));
        let res = run(&[
            "experiment",
            "cauchy",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(
            res.status.code() == Some(0) || res.status.code() == Some(1),
            "unexpected exit: {:?}, stderr: {}",
            res.status.code(),
            String::from_utf8_lossy(&res.stderr)
        );
        let mut files: Vec<PathBuf> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        outputs.push(
            files
                .into_iter()
                .map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(outputs[0].len(), outputs[1].len());
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(a.0, b.0, "file sets differ");
        assert_eq!(a.1, b.1, "file {:?} differs between thread counts", a.0);
    }
}
