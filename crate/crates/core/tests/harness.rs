//! Manifests, checkpoints, output files and the command line interface.

use std::path::Path;
use std::process::Command;

use kinlab::harness::{
    path_seeds, run_and_write, Experiment, ExperimentConfig, PathCheckpoint, RunManifest, RunStatus,
};
use kinlab::solver::run_path;

fn small(pair: bool) -> ExperimentConfig {
    let pair = if pair {
        r#""initial_pair": {"kind": "constant", "c": 0.1},"#
    } else {
        ""
    };
    ExperimentConfig::from_json(&format!(
        r#"{{
        "grid": {{"n": 16}},
        "noise": {{"kind": "additive", "K": 2, "amplitude": 0.3}},
        "solver": {{"eta": 0.05, "t_end": 0.1}},
        "initial": {{"kind": "trig", "mean": 0.2, "terms": [{{"k": [1, 0], "sin": 0.5}}]}},
        {pair}
        "ensemble_size": 4,
        "master_seed": 11,
        "checks": {{"time_samples": 4}}
    }}"#
    ))
    .unwrap()
}

fn manifest(dir: &Path, exp: &str) -> RunManifest {
    let s = std::fs::read_to_string(dir.join(format!("{exp}_manifest.json"))).unwrap();
    serde_json::from_str(&s).unwrap()
}

#[test]
fn completed_run_records_manifest_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(true);
    let rep = run_and_write(Experiment::Contraction, &cfg, 1, dir.path()).unwrap();
    let m = manifest(dir.path(), "contraction");
    assert_eq!(m.status, RunStatus::Completed);
    assert_eq!(m.pass, Some(rep.pass));
    assert_eq!(m.path_seeds, path_seeds(11, 4));
    assert_eq!(m.config_hash, cfg.hash());
    assert!(m.finished_at.is_some());
    for f in &m.output_files {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("contraction.csv")).unwrap();
    assert!(csv.starts_with("t,e_pos_l1,mc_stderr\n"));
}

#[test]
fn failed_run_marks_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_and_write(Experiment::Contraction, &small(false), 1, dir.path()).is_err());
    let m = manifest(dir.path(), "contraction");
    assert_eq!(m.status, RunStatus::Failed);
    assert!(m.error.is_some());
    assert!(m.pass.is_none());
}

#[test]
fn config_hash_tracks_seed() {
    let a = small(true);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.master_seed += 1;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(true).solver_config().unwrap();
    let run = run_path(&cfg, 5).unwrap();
    let path = dir.path().join("ck/path.json");
    let ck = PathCheckpoint::from_run(&run);
    ck.write(&path).unwrap();
    assert_eq!(PathCheckpoint::load(&path, &cfg.hash()).unwrap(), ck);
    assert!(PathCheckpoint::load(&path, "deadbeef").is_err());
}

fn kinlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kinlab"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn cli_oracles_exit_codes() {
    let ok = kinlab(&["oracle", "collapse", "{}"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    let strict = kinlab(&[
        "oracle",
        "riemann",
        r#"{"n":[64],"eta_factors":[4],"max_final_error":1e-9}"#,
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn cli_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, small(true).to_json().unwrap()).unwrap();
    let cfg = cfg.to_str().unwrap();
    for kind in ["d0d1", "gamma"] {
        assert_eq!(
            kinlab(&["check", kind, cfg]).status.code(),
            Some(0),
            "{kind}"
        );
    }
    let psi = kinlab(&["check", "psipair", r#"{"deltas":[0.5,0.05]}"#]);
    assert_eq!(psi.status.code(), Some(0));
}

#[test]
fn cli_experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, small(true).to_json().unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = kinlab(&[
        "experiment",
        "contraction",
        cfg.to_str().unwrap(),
        "--paths",
        "3",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let m = manifest(&out, "contraction");
    assert_eq!(m.path_seeds, path_seeds(9, 3));
    let csv = std::fs::read_to_string(out.join("contraction.csv")).unwrap();
    assert!(csv.starts_with("t,e_pos_l1,mc_stderr\n"));
}

#[test]
fn cli_bad_input_exits_two() {
    assert_eq!(
        kinlab(&["simulate", "/nonexistent/config.json"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"grid": {"n": 2}}"#).unwrap();
    assert_eq!(
        kinlab(&["experiment", "energy", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
