// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every command reads one config document (`--config`, optional) plus
//! `--set section.key=value` overrides, writes its artifacts under
//! `output.directory` and a JSON manifest next to them.
//! `THERMOGATE_OUTPUT_DIR` replaces `output.directory` unless a `--set`
//! names that key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{load_config, parse_config_with, RunConfig};
use crate::diagnostics::{
    bohr_trace, energy_change, energy_change_heisenberg, map_purity, purity_loss_rate, scan_grid, subspace_purity,
    SubspaceSelection,
};
use crate::io::{
    write_bohr_trace, write_fields_csv, write_iteration_log, write_manifest, write_matrix_csv, write_scan_csv,
    write_trajectory_dump, Manifest,
};
use crate::oct::{fidelity_mat, optimize};
use crate::ops::{choi_cptp_check, SuperOperator};
use crate::propagator::{propagate_map, Direction, Stepper};
use crate::thermal::BathSpec;
use crate::Result;

pub const OUTPUT_DIR_ENV: &str = "THERMOGATE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "thermogate", version, about = "Optimal control of gates under thermal GKLS noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set bath.gamma=1e-3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Resolve and check the config, print it with all defaults.
    Validate,
    /// Propagate the guess (or fields file) and write the final map.
    Propagate,
    /// Optimize the fields towards the target gate.
    Optimize,
    /// Evaluate a reference field over the (gamma, T) grid.
    Scan,
    /// Write the instantaneous Bohr frequencies of the dressed levels.
    BohrTrace,
    /// Map metrics for the configured bath: fidelity, purity, energy, CPTP.
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Propagate => "propagate",
            Command::Optimize => "optimize",
            Command::Scan => "scan",
            Command::BohrTrace => "bohr-trace",
            Command::Diagnose => "diagnose",
        }
    }
}

/// Loads the config for a command line, applying the output-directory
/// environment override.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p, &cli.overrides)?,
        None => parse_config_with("", &cli.overrides)?,
    };
    let dir_set = cli
        .overrides
        .iter()
        .any(|o| o.split('=').next().map(str::trim) == Some("output.directory"));
    if !dir_set {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output.directory = dir;
            }
        }
    }
    Ok(cfg)
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub line: String,
    pub manifest: Option<PathBuf>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    command: Command,
    started: Instant,
    timings: BTreeMap<String, f64>,
    artifacts: Vec<String>,
    summary: BTreeMap<String, serde_json::Value>,
    warnings: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig, command: Command) -> Self {
        Self {
            cfg,
            command,
            started: Instant::now(),
            timings: BTreeMap::new(),
            artifacts: Vec::new(),
            summary: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}_{suffix}", self.cfg.output.prefix);
        self.artifacts.push(name.clone());
        Path::new(&self.cfg.output.directory).join(name)
    }

    fn lap(&mut self, key: &str, since: Instant) {
        self.timings.insert(key.into(), since.elapsed().as_secs_f64());
    }

    fn finish(mut self, line: String) -> Result<Outcome> {
        self.timings
            .insert("total".into(), self.started.elapsed().as_secs_f64());
        let path = Path::new(&self.cfg.output.directory).join(format!(
            "{}_{}_manifest.json",
            self.cfg.output.prefix,
            self.command.name()
        ));
        let manifest = Manifest {
            command: self.command.name().into(),
            config_hash: self.cfg.hash(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            config: self.cfg.to_toml_string(),
            timings: self.timings,
            artifacts: self.artifacts,
            summary: self.summary,
            warnings: self.warnings,
        };
        write_manifest(&path, &manifest)?;
        Ok(Outcome {
            line,
            manifest: Some(path),
        })
    }
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Validate => Ok(Outcome {
            line: format!("config ok (hash {})\n{}", cfg.hash(), cfg.to_toml_string().trim_end()),
            manifest: None,
        }),
        Command::Propagate => propagate(cfg),
        Command::Optimize => run_optimize(cfg),
        Command::Scan => scan(cfg),
        Command::BohrTrace => trace(cfg),
        Command::Diagnose => diagnose(cfg),
    }
}

fn propagate(cfg: &RunConfig) -> Result<Outcome> {
    let mut run = Run::new(cfg, Command::Propagate);
    let model = cfg.build_model()?;
    let target = cfg.target()?;
    let field = cfg.initial_field(&model)?;
    let t0 = Instant::now();
    let traj = propagate_map(&model, &field, &cfg.bath(), &cfg.propagator_config(), Direction::Forward)?;
    run.lap("propagate", t0);
    let f = fidelity_mat(traj.final_map(), &target)?;
    let map_path = run.path("map.csv");
    write_matrix_csv(&map_path, traj.final_map())?;
    let dump_path = run.path("trajectory.bin");
    write_trajectory_dump(&dump_path, &traj.times, &traj.maps)?;
    run.summary.insert("fidelity".into(), json!(f));
    run.summary.insert("infidelity".into(), json!(1.0 - f));
    run.finish(format!("propagate: IF = {:.6e}", 1.0 - f))
}

fn run_optimize(cfg: &RunConfig) -> Result<Outcome> {
    let mut run = Run::new(cfg, Command::Optimize);
    let model = cfg.build_model()?;
    let target = cfg.target()?;
    let field = cfg.initial_field(&model)?;
    let t0 = Instant::now();
    let r = optimize(&model, &cfg.bath(), &target, &cfg.oct_config(), &cfg.propagator_config(), &field)?;
    run.lap("optimize", t0);
    let log = run.path("iterations.csv");
    write_iteration_log(&log, &r.records)?;
    let fields = run.path("fields.csv");
    write_fields_csv(&fields, &r.best_field)?;
    if r.damping_events > 0 {
        run.warnings
            .push(format!("{} iterations rejected and damped", r.damping_events));
    }
    if !r.converged {
        run.warnings
            .push(format!("target infidelity not reached in {} iterations", cfg.oct.max_iters));
    }
    run.summary.insert("best_infidelity".into(), json!(r.best_infidelity));
    run.summary.insert("converged".into(), json!(r.converged));
    run.summary.insert("iterations".into(), json!(r.records.len() - 1));
    run.summary.insert("damping_events".into(), json!(r.damping_events));
    run.finish(format!(
        "optimize: IF = {:.6e} after {} iterations{}",
        r.best_infidelity,
        r.records.len() - 1,
        if r.converged { "" } else { " (not converged)" }
    ))
}

fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let mut run = Run::new(cfg, Command::Scan);
    let model = cfg.build_model()?;
    let target = cfg.target()?;
    let initial = cfg.initial_field(&model)?;
    let prop = cfg.propagator_config();
    // the reference is the closed-system optimum unless a fields file is given
    let reference = if cfg.oct.guess.file.is_some() {
        initial
    } else {
        let t0 = Instant::now();
        let r = optimize(&model, &BathSpec::closed(), &target, &cfg.oct_config(), &prop, &initial)?;
        run.lap("reference_optimize", t0);
        if !r.converged {
            run.warnings.push(format!(
                "closed-system reference stopped at IF = {:.3e}",
                r.best_infidelity
            ));
        }
        let p = run.path("reference_fields.csv");
        write_fields_csv(&p, &r.best_field)?;
        r.best_field
    };
    let t0 = Instant::now();
    let res = scan_grid(&model, &target, &reference, &cfg.scan.gammas, &cfg.scan.temperatures, &cfg.scan_config())?;
    run.lap("scan", t0);
    for p in &res.points {
        if let Some(e) = &p.error {
            run.warnings
                .push(format!("gamma={} T={}: {e}", p.gamma, p.temperature));
        }
    }
    let path = run.path("scan.csv");
    write_scan_csv(&path, &res)?;
    run.summary.insert("points".into(), json!(res.points.len()));
    run.summary.insert("if_u".into(), json!(res.if_u));
    run.finish(format!("scan: {} points", res.points.len()))
}

fn trace(cfg: &RunConfig) -> Result<Outcome> {
    let mut run = Run::new(cfg, Command::BohrTrace);
    let model = cfg.build_model()?;
    let field = cfg.initial_field(&model)?;
    let t0 = Instant::now();
    let tr = bohr_trace(&model, &field)?;
    run.lap("bohr_trace", t0);
    let path = run.path("bohr.csv");
    write_bohr_trace(&path, &tr)?;
    run.summary.insert("pairs".into(), json!(tr.pairs.len()));
    run.finish(format!("bohr-trace: {} pairs x {} times", tr.pairs.len(), tr.times.len()))
}

fn diagnose(cfg: &RunConfig) -> Result<Outcome> {
    let mut run = Run::new(cfg, Command::Diagnose);
    let model = cfg.build_model()?;
    let target = cfg.target()?;
    let field = cfg.initial_field(&model)?;
    let bath = cfg.bath();
    let prop = cfg.propagator_config();
    let t0 = Instant::now();
    let traj = propagate_map(&model, &field, &bath, &prop, Direction::Forward)?;
    run.lap("propagate", t0);
    let map = SuperOperator::new(traj.final_map().clone())?;
    let f = fidelity_mat(map.matrix(), &target)?;
    let cptp = choi_cptp_check(&map, 1e-10, 1e-8)?;
    let stepper = Stepper::new(&model, &field, &bath, &prop)?;
    let u = stepper.unitary_grid(&field)?;
    let n = field.n_times() - 1;
    let gen = stepper.gen.generator(&field, field.time(n), &u[n]);
    let rate = purity_loss_rate(traj.final_map(), &gen)?;
    let metrics = [
        ("fidelity", f),
        ("infidelity", 1.0 - f),
        ("purity_sub", subspace_purity(&map, &SubspaceSelection::from_target(&target))?),
        ("map_purity", map_purity(map.matrix())),
        ("purity_loss_rate_final", rate),
        ("delta_E", energy_change_heisenberg(&map, &model.drift)?),
        ("delta_E_literal", energy_change(&map, &model.drift)?),
        ("trace_residual", cptp.trace_residual),
        ("min_choi_eigenvalue", cptp.min_choi_eigenvalue),
    ];
    for (k, v) in metrics {
        run.summary.insert(k.into(), json!(v));
    }
    run.summary.insert("cptp".into(), json!(cptp.passed()));
    if !cptp.passed() {
        run.warnings.push("map fails the CPTP check".into());
    }
    run.finish(format!(
        "diagnose: IF = {:.6e}, purity_sub = {:.6}, CPTP {}",
        1.0 - f,
        metrics[2].1,
        if cptp.passed() { "ok" } else { "FAILED" }
    ))
}

/// Parses arguments, runs, prints the summary; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = resolve_config(&cli).and_then(|cfg| run_command(cli.command, &cfg));
    match result {
        Ok(out) => {
            println!("{}", out.line);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
