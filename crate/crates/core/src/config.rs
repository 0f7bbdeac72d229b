// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML document with one table per concern.
//!
//! Every key has a default. Defaults that depend on other keys
//! (`model.eps_uc_scale`, `propagator.dt`, `oct.shape_sigma`,
//! `scan.workers`) are filled by [`RunConfig::resolve`], so a resolved
//! config serializes every value it runs with.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{EnergyForm, ScanConfig, ScanMode};
use crate::models::{
    build_qubit_ancilla_model, build_two_qubit_model, target_superoperator, CoefficientTable, ControlField, Gate,
    GateTarget, ModelSystem, Shape, UncontrolledMode,
};
use crate::oct::{OctConfig, UpdateMode};
use crate::propagator::PropagatorConfig;
use crate::thermal::{BathSpec, SpectralDensity};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    /// Qubit with one ancilla.
    #[default]
    Qutrit,
    QubitAncilla,
    TwoQubit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Coefficients {
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub d: Option<Vec<f64>>,
    pub a_x: f64,
    pub a_y: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            a: None,
            b: None,
            c: None,
            d: None,
            a_x: 1.0,
            a_y: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "type")]
    pub kind: ModelType,
    pub n_ancillas: usize,
    pub omega: f64,
    /// Two-qubit splitting `ω₁`.
    pub omega1: f64,
    /// Two-qubit energy offset `a`.
    pub a: f64,
    pub eps_uc_scale: Option<f64>,
    pub uncontrolled_mode: UncontrolledMode,
    pub coefficients: Coefficients,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelType::Qutrit,
            n_ancillas: 1,
            omega: 1.0,
            omega1: 1.0,
            a: 0.0,
            eps_uc_scale: None,
            uncontrolled_mode: UncontrolledMode::Static,
            coefficients: Coefficients::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub gamma: f64,
    pub temperature: f64,
    pub spectral_density: SpectralDensity,
    pub gamma_p: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            temperature: 1.0,
            spectral_density: SpectralDensity::Ohmic,
            gamma_p: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub n_times: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dt: 0.1, n_times: 4001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorSection {
    /// Propagation step; defaults to `grid.dt`.
    pub dt: Option<f64>,
    pub m: usize,
    pub k: usize,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let p = PropagatorConfig::default();
        Self {
            dt: None,
            m: p.m,
            k: p.k,
            inner_tol: p.inner_tol,
            max_inner_iters: p.max_inner_iters,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuessSection {
    pub amplitude: f64,
    pub seed: u64,
    /// Fields CSV used instead of the generated guess.
    pub file: Option<String>,
}

impl Default for GuessSection {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            seed: 1,
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OctSection {
    pub target: Gate,
    pub lambda: f64,
    pub shape_floor: f64,
    pub shape_sigma: Option<f64>,
    pub gamma_a: f64,
    pub max_iters: usize,
    pub target_infidelity: f64,
    pub mode: UpdateMode,
    pub guess: GuessSection,
}

impl Default for OctSection {
    fn default() -> Self {
        Self {
            target: Gate::Hadamard,
            lambda: 1.0,
            shape_floor: 1e-4,
            shape_sigma: None,
            gamma_a: 0.0,
            max_iters: 5000,
            target_infidelity: 1e-4,
            mode: UpdateMode::SequentialKrotov,
            guess: GuessSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub mode: ScanMode,
    pub energy_form: EnergyForm,
    pub workers: Option<usize>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            gammas: vec![1e-5, 1e-4, 1e-3, 1e-2],
            temperatures: vec![0.1, 1.0, 5.0],
            mode: ScanMode::DegradeOnly,
            energy_form: EnergyForm::Heisenberg,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            prefix: "run".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub bath: BathSection,
    pub grid: GridSection,
    pub propagator: PropagatorSection,
    pub oct: OctSection,
    pub scan: ScanSection,
    pub output: OutputSection,
}

/// Parses, resolves and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// As [`parse_config`], applying `section.key=value` overrides first.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    check_keys(&table, &known_keys(), "")?;
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let cfg = cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with(&text, overrides)
}

/// Sets `section.key` (dotted path) to a TOML value; bare words that do
/// not parse as TOML are taken as strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must have the form section.key=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::config(path, "empty key segment"));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{k}` is not a table")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Shape of the key space: a resolved default plus the optional keys that
/// a default leaves unset.
fn known_keys() -> toml::Table {
    let mut t = toml::Table::try_from(RunConfig::default().resolve()).expect("default config serializes");
    for (section, key) in [
        ("model.coefficients", "a"),
        ("model.coefficients", "b"),
        ("model.coefficients", "c"),
        ("model.coefficients", "d"),
        ("oct.guess", "file"),
    ] {
        apply_override(&mut t, &format!("{section}.{key}=0")).expect("static key");
    }
    t
}

fn check_keys(user: &toml::Table, known: &toml::Table, prefix: &str) -> Result<()> {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match known.get(k) {
            None => return Err(Error::config(path, "unknown key")),
            Some(toml::Value::Table(kt)) => match v {
                toml::Value::Table(ut) => check_keys(ut, kt, &path)?,
                _ => return Err(Error::config(path, "expected a table")),
            },
            Some(_) => {}
        }
    }
    Ok(())
}

fn require(ok: bool, key: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, msg))
    }
}

impl RunConfig {
    /// Fills derived defaults.
    pub fn resolve(mut self) -> Self {
        let n = match self.model.kind {
            ModelType::Qutrit => 1,
            _ => self.model.n_ancillas,
        };
        if self.model.kind == ModelType::Qutrit {
            self.model.n_ancillas = 1;
        }
        if self.model.kind != ModelType::TwoQubit {
            let c = &mut self.model.coefficients;
            for v in [&mut c.a, &mut c.b, &mut c.c, &mut c.d] {
                v.get_or_insert_with(|| vec![1.0; n]);
            }
        }
        self.model
            .eps_uc_scale
            .get_or_insert(1e-3 * self.oct.guess.amplitude);
        self.propagator.dt.get_or_insert(self.grid.dt);
        let tau = self.tau();
        self.oct.shape_sigma.get_or_insert(tau / 6.0);
        self.scan
            .workers
            .get_or_insert_with(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        self
    }

    pub fn tau(&self) -> f64 {
        self.grid.dt * self.grid.n_times.saturating_sub(1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        require(m.omega > 0.0 && m.omega.is_finite(), "model.omega", "must be > 0")?;
        require(m.omega1 > 0.0 && m.omega1.is_finite(), "model.omega1", "must be > 0")?;
        require(m.a.is_finite(), "model.a", "must be finite")?;
        if m.kind == ModelType::QubitAncilla {
            require((1..=3).contains(&m.n_ancillas), "model.n_ancillas", "must be 1, 2 or 3")?;
        }
        require(
            m.eps_uc_scale.is_some_and(f64::is_finite),
            "model.eps_uc_scale",
            "must be finite",
        )?;
        for (key, v) in [
            ("model.coefficients.a", &m.coefficients.a),
            ("model.coefficients.b", &m.coefficients.b),
            ("model.coefficients.c", &m.coefficients.c),
            ("model.coefficients.d", &m.coefficients.d),
        ] {
            if let Some(v) = v {
                if m.kind != ModelType::TwoQubit {
                    require(v.len() >= m.n_ancillas, key, "needs one entry per ancilla")?;
                }
                require(v.iter().all(|x| x.is_finite()), key, "entries must be finite")?;
            }
        }
        let b = &self.bath;
        require(b.gamma >= 0.0 && b.gamma.is_finite(), "bath.gamma", "must be >= 0")?;
        require(
            b.temperature > 0.0 && b.temperature.is_finite(),
            "bath.temperature",
            "must be > 0",
        )?;
        require(b.gamma_p >= 0.0 && b.gamma_p.is_finite(), "bath.gamma_p", "must be >= 0")?;
        let g = &self.grid;
        require(g.dt > 0.0 && g.dt.is_finite(), "grid.dt", "must be > 0")?;
        require(g.n_times >= 2, "grid.n_times", "must be >= 2")?;
        let p = &self.propagator;
        let pdt = p.dt.unwrap_or(g.dt);
        require(pdt > 0.0 && pdt <= g.dt * (1.0 + 1e-12), "propagator.dt", "must lie in (0, grid.dt]")?;
        let ratio = g.dt / pdt;
        require(
            (ratio - ratio.round()).abs() < 1e-9,
            "propagator.dt",
            "must divide grid.dt",
        )?;
        require(p.m >= 2, "propagator.m", "must be >= 2")?;
        let dim = self.dim();
        require(
            p.k >= 1 && p.k < dim * dim,
            "propagator.k",
            "must lie in [1, dim^2 - 1]",
        )?;
        require(p.inner_tol > 0.0, "propagator.inner_tol", "must be > 0")?;
        require(p.max_inner_iters >= 1, "propagator.max_inner_iters", "must be >= 1")?;
        let o = &self.oct;
        require(o.lambda > 0.0 && o.lambda.is_finite(), "oct.lambda", "must be > 0")?;
        require(
            o.target_infidelity > 0.0 && o.target_infidelity < 1.0,
            "oct.target_infidelity",
            "must lie in (0, 1)",
        )?;
        require(
            o.shape_floor >= 0.0 && o.shape_floor < 1.0,
            "oct.shape_floor",
            "must lie in [0, 1)",
        )?;
        require(
            o.shape_sigma.is_some_and(|s| s > 0.0 && s.is_finite()),
            "oct.shape_sigma",
            "must be > 0",
        )?;
        require(o.gamma_a >= 0.0, "oct.gamma_a", "must be >= 0")?;
        require(o.guess.amplitude.is_finite(), "oct.guess.amplitude", "must be finite")?;
        let gate_ok = match o.target {
            Gate::Hadamard => m.kind != ModelType::TwoQubit,
            Gate::Cix => m.kind == ModelType::TwoQubit,
            Gate::Identity => true,
        };
        require(gate_ok, "oct.target", "gate does not fit the model")?;
        let s = &self.scan;
        require(!s.gammas.is_empty(), "scan.gammas", "must not be empty")?;
        require(
            s.gammas.iter().all(|g| *g >= 0.0 && g.is_finite()),
            "scan.gammas",
            "entries must be >= 0",
        )?;
        require(!s.temperatures.is_empty(), "scan.temperatures", "must not be empty")?;
        require(
            s.temperatures.iter().all(|t| *t > 0.0 && t.is_finite()),
            "scan.temperatures",
            "entries must be > 0",
        )?;
        require(s.workers.is_none_or(|w| w >= 1), "scan.workers", "must be >= 1")?;
        require(!self.output.prefix.is_empty(), "output.prefix", "must not be empty")?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.model.kind {
            ModelType::Qutrit => 3,
            ModelType::QubitAncilla => 2 + self.model.n_ancillas,
            ModelType::TwoQubit => 4,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the serialized resolved config, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn build_model(&self) -> Result<ModelSystem> {
        let m = &self.model;
        let eps = m.eps_uc_scale.unwrap_or(1e-3 * self.oct.guess.amplitude);
        let model = match m.kind {
            ModelType::TwoQubit => build_two_qubit_model(m.omega1, m.a, m.coefficients.a_x, m.coefficients.a_y)?,
            _ => {
                let n = if m.kind == ModelType::Qutrit { 1 } else { m.n_ancillas };
                let ones = vec![1.0; n];
                let pick = |v: &Option<Vec<f64>>| v.clone().unwrap_or_else(|| ones.clone());
                let table = CoefficientTable {
                    a: pick(&m.coefficients.a),
                    b: pick(&m.coefficients.b),
                    c: pick(&m.coefficients.c),
                    d: pick(&m.coefficients.d),
                    a_x: m.coefficients.a_x,
                    a_y: m.coefficients.a_y,
                };
                build_qubit_ancilla_model(n, m.omega, &table, eps)?
            }
        };
        Ok(model.with_uncontrolled_mode(m.uncontrolled_mode))
    }

    pub fn bath(&self) -> BathSpec {
        let mut b = BathSpec::new(self.bath.gamma, self.bath.temperature).with_phase_noise(self.bath.gamma_p);
        b.spectral_density = self.bath.spectral_density;
        b
    }

    pub fn target(&self) -> Result<GateTarget> {
        target_superoperator(self.oct.target, self.dim())
    }

    pub fn shape(&self) -> Shape {
        let mut s = Shape::gaussian(self.tau(), self.oct.shape_floor);
        if let Some(sigma) = self.oct.shape_sigma {
            s.sigma = sigma;
        }
        s
    }

    pub fn propagator_config(&self) -> PropagatorConfig {
        let p = &self.propagator;
        PropagatorConfig {
            dt: p.dt.unwrap_or(self.grid.dt),
            m: p.m,
            k: p.k,
            inner_tol: p.inner_tol,
            max_inner_iters: p.max_inner_iters,
        }
    }

    pub fn oct_config(&self) -> OctConfig {
        let o = &self.oct;
        let mut c = OctConfig::new(self.shape());
        c.lambda = o.lambda;
        c.gamma_a = o.gamma_a;
        c.max_iters = o.max_iters;
        c.target_infidelity = o.target_infidelity;
        c.mode = o.mode;
        c
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            mode: self.scan.mode,
            propagator: self.propagator_config(),
            oct: self.oct_config(),
            spectral_density: self.bath.spectral_density,
            gamma_p: self.bath.gamma_p,
            energy_form: self.scan.energy_form,
            workers: self.scan.workers,
        }
    }

    /// The generated guess, or the fields file when `oct.guess.file` is set.
    pub fn initial_field(&self, model: &ModelSystem) -> Result<ControlField> {
        match &self.oct.guess.file {
            Some(path) => {
                let f = crate::io::read_fields_csv(Path::new(path), self.shape())?;
                if f.n_channels() != model.n_channels() {
                    return Err(Error::config(
                        "oct.guess.file",
                        format!("has {} channels, model needs {}", f.n_channels(), model.n_channels()),
                    ));
                }
                Ok(f)
            }
            None => ControlField::guess(
                model,
                self.tau(),
                self.grid.dt,
                self.oct.guess.amplitude,
                self.oct.guess.seed,
                self.shape(),
            ),
        }
    }
}
