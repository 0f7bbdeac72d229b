// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use thermogate::io::{load_trajectory_dump, write_iteration_log};

const SMALL: [&str; 4] = ["--set", "grid.n_times=61", "--set", "oct.max_iters=2"];

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermogate"))
        .args(args)
        .env_remove("THERMOGATE_OUTPUT_DIR")
        .arg("--set")
        .arg(format!("output.directory=\"{}\"", dir.display()))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("config ok"));
    assert!(s.contains("[bath]"));
    assert!(s.contains("workers"));
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["validate", "--set", "bath.gamma=-1"])), 1);
    let o = run(dir.path(), &["validate", "--set", "bath.gama=1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bath.gama"));
    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&run(dir.path(), &["validate", "--config", missing.to_str().unwrap()])), 3);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[bath\ngamma = ").unwrap();
    assert_eq!(code(&run(dir.path(), &["validate", "--config", bad.to_str().unwrap()])), 4);
    let wrong_type = dir.path().join("wt.toml");
    std::fs::write(&wrong_type, "[bath]\ngamma = \"hot\"\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["validate", "--config", wrong_type.to_str().unwrap()])), 4);
}

#[test]
fn scan_is_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(
        &cfg,
        "[scan]\ngammas = [1e-3, 1e-2, 1e-1]\ntemperatures = [0.1, 1.0, 5.0]\nmode = \"degrade_only\"\n",
    )
    .unwrap();
    let mut args = vec!["scan", "--config", cfg.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let csv = dir.path().join("run_scan.csv");
    let first = std::fs::read(&csv).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("gamma,T,IF_U,IF_noise"));
    assert_eq!(code(&run(dir.path(), &args)), 0);
    assert_eq!(first, std::fs::read(&csv).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run_scan_manifest.json")).unwrap()).unwrap();
    let config = manifest["config"].as_str().unwrap();
    let expect: String = Sha256::digest(config.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["config_hash"].as_str().unwrap(), expect);
    assert_eq!(manifest["command"], "scan");
    assert!(manifest["timings"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn propagate_then_reuse_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["optimize"];
    args.extend(SMALL);
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let log = std::fs::read_to_string(dir.path().join("run_iterations.csv")).unwrap();
    assert!(log.starts_with("iter,J_max,F,IF,field_norm,seconds"));
    assert!(log.lines().count() >= 2);

    let fields = dir.path().join("run_fields.csv");
    let set = format!("oct.guess.file=\"{}\"", fields.display());
    let mut args = vec!["propagate", "--set", &set, "--set", "bath.gamma=1e-2"];
    args.extend(SMALL);
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let dump = load_trajectory_dump(&dir.path().join("run_trajectory.bin")).unwrap();
    assert_eq!(dump.times.len(), 61);
    assert_eq!(dump.maps[0].nrows(), 9);
    assert!((dump.maps[0][(0, 0)].re - 1.0).abs() < 1e-15);

    let mut args = vec!["diagnose", "--set", &set, "--set", "bath.gamma=1e-2"];
    args.extend(SMALL);
    let o = run(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run_diagnose_manifest.json")).unwrap()).unwrap();
    assert!(m["summary"]["purity_sub"].as_f64().unwrap() < 1.0);

    let mut args = vec!["bohr-trace"];
    args.extend(SMALL);
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let trace = std::fs::read_to_string(dir.path().join("run_bohr.csv")).unwrap();
    assert_eq!(trace.lines().count(), 62);
}

#[test]
fn fields_with_wrong_channel_count_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    std::fs::write(&f, "t,eps_0\n0,0\n0.1,0\n").unwrap();
    let set = format!("oct.guess.file=\"{}\"", f.display());
    let o = run(dir.path(), &["propagate", "--set", &set]);
    assert_ne!(code(&o), 0);
}

#[test]
fn empty_iteration_log_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("it.csv");
    write_iteration_log(&p, &[]).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().trim_end(), "iter,J_max,F,IF,field_norm,seconds");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_thermogate"))
        .args(["bohr-trace", "--set", "grid.n_times=11"])
        .env("THERMOGATE_OUTPUT_DIR", dir.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("run_bohr.csv").exists());
    assert!(dir.path().join("run_bohr-trace_manifest.json").exists());
}
