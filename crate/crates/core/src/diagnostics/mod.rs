// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Post-run metrics and `(γ, T)` scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{ControlField, GateTarget, ModelSystem};
use crate::oct::{fidelity_mat, optimize, OctConfig};
use crate::ops::{trace_of_product, unvec_mat, vec_mat, Operator, SuperOperator};
use crate::propagator::{propagate_map, Direction, PropagatorConfig};
use crate::thermal::{jump_channels, propagate_invariants, BathSpec, SpectralDensity};
use crate::{CMat, Error, Result};

/// Operator-basis directions a map is restricted to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceSelection {
    pub indices: Vec<usize>,
    pub logical_dim: usize,
}

impl SubspaceSelection {
    pub fn new(indices: Vec<usize>, logical_dim: usize, dim2: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::validation("empty subspace selection"));
        }
        if indices.len() > dim2 || indices.iter().any(|&i| i >= dim2) {
            return Err(Error::validation(format!("selection index out of range for {dim2} directions")));
        }
        Ok(Self { indices, logical_dim })
    }

    pub fn full(dim: usize) -> Self {
        Self {
            indices: (0..dim * dim).collect(),
            logical_dim: dim,
        }
    }

    pub fn from_target(target: &GateTarget) -> Self {
        Self {
            indices: target.working_directions.clone(),
            logical_dim: target.logical_dim,
        }
    }
}

/// `Tr(Λ_sub†Λ_sub) / M_sub` with `M_sub` the number of selected
/// directions.
pub fn subspace_purity(lambda: &SuperOperator, sel: &SubspaceSelection) -> Result<f64> {
    let n = lambda.matrix().nrows();
    if sel.indices.is_empty() {
        return Err(Error::validation("empty subspace selection"));
    }
    if sel.indices.iter().any(|&i| i >= n) {
        return Err(Error::shape("selection index exceeds map size"));
    }
    let m = lambda.matrix();
    let mut acc = 0.0;
    for &r in &sel.indices {
        for &c in &sel.indices {
            acc += m[(r, c)].norm_sqr();
        }
    }
    Ok(acc / sel.indices.len() as f64)
}

/// How the energy exchanged during a gate is read off the map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyForm {
    /// `Tr{H₀ Λ(𝟙/d)} − Tr{H₀}/d`: energy gained by the maximally mixed
    /// state.
    #[default]
    Heisenberg,
    /// `tr(Λ vec(H₀)) − tr(H₀)`. Zero for every trace-preserving map.
    Literal,
}

/// Literal form: apply `Λ` to `vec(H₀)` and compare traces.
pub fn energy_change(lambda: &SuperOperator, h0: &Operator) -> Result<f64> {
    check_dims(lambda, h0)?;
    let out = unvec_mat(&(lambda.matrix() * vec_mat(h0.matrix())));
    Ok((out.trace() - h0.matrix().trace()).re)
}

/// Energy change of the maximally mixed input under `Λ`.
pub fn energy_change_heisenberg(lambda: &SuperOperator, h0: &Operator) -> Result<f64> {
    check_dims(lambda, h0)?;
    let d = h0.dim();
    let rho = CMat::identity(d, d).map(|z| z / d as f64);
    let out = unvec_mat(&(lambda.matrix() * vec_mat(&rho)));
    Ok((trace_of_product(h0.matrix(), &out) - trace_of_product(h0.matrix(), &rho)).re)
}

pub fn energy_exchange(lambda: &SuperOperator, h0: &Operator, form: EnergyForm) -> Result<f64> {
    match form {
        EnergyForm::Heisenberg => energy_change_heisenberg(lambda, h0),
        EnergyForm::Literal => energy_change(lambda, h0),
    }
}

fn check_dims(lambda: &SuperOperator, h0: &Operator) -> Result<()> {
    if lambda.dim() != h0.dim() {
        return Err(Error::shape(format!(
            "map acts on dimension {}, operator has dimension {}",
            lambda.dim(),
            h0.dim()
        )));
    }
    Ok(())
}

/// Map purity `Tr{Λ†Λ}`.
pub fn map_purity(lambda: &CMat) -> f64 {
    lambda.iter().map(|z| z.norm_sqr()).sum()
}

/// `d/dt Tr{Λ†Λ} = 2 Re Tr{Λ†𝓛Λ}`. The Hamiltonian part of `𝓛` is
/// anti-Hermitian and drops out, so the full generator and its
/// dissipative part give the same value.
pub fn purity_loss_rate(lambda_t: &CMat, generator: &CMat) -> Result<f64> {
    if generator.nrows() != lambda_t.nrows() || !generator.is_square() || !lambda_t.is_square() {
        return Err(Error::shape("map and generator sizes differ"));
    }
    let gl = generator * lambda_t;
    let tr: f64 = lambda_t.iter().zip(gl.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    Ok(2.0 * tr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfidelityMetrics {
    /// `R_IF = IF_noise / IF_U`.
    pub ratio: f64,
    pub log_ratio: f64,
    /// `log₁₀(IF_C / IF_noise)`.
    pub gain: f64,
}

/// Smallest infidelity used inside logarithms.
pub const IF_FLOOR: f64 = 1e-16;

pub fn infidelity_metrics(if_u: f64, if_noise: f64, if_controlled: f64) -> Result<InfidelityMetrics> {
    if !(if_u > 0.0) {
        return Err(Error::validation(format!("IF_U must be > 0, got {if_u}")));
    }
    let noise = if_noise.max(IF_FLOOR);
    let ratio = noise / if_u;
    Ok(InfidelityMetrics {
        ratio,
        log_ratio: ratio.log10(),
        gain: (if_controlled.max(IF_FLOOR) / noise).log10(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    #[default]
    DegradeOnly,
    Mitigate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub mode: ScanMode,
    pub propagator: PropagatorConfig,
    pub oct: OctConfig,
    pub spectral_density: SpectralDensity,
    pub gamma_p: f64,
    pub energy_form: EnergyForm,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub gamma: f64,
    pub temperature: f64,
    pub if_noise: f64,
    pub if_controlled: Option<f64>,
    pub log_ratio: f64,
    pub gain: Option<f64>,
    pub purity_sub: f64,
    pub delta_e: f64,
    pub iters: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub if_u: f64,
    /// Row-major in `(γ, T)`: `γ` outer, `T` inner.
    pub points: Vec<ScanPoint>,
}

/// Evaluates a closed-system reference field over a `(γ, T)` grid,
/// optionally re-optimizing at each point from the reference.
pub fn scan_grid(
    model: &ModelSystem,
    target: &GateTarget,
    reference: &ControlField,
    gammas: &[f64],
    temperatures: &[f64],
    cfg: &ScanConfig,
) -> Result<ScanResult> {
    if gammas.is_empty() || temperatures.is_empty() {
        return Err(Error::validation("scan grid is empty"));
    }
    let closed = propagate_map(model, reference, &BathSpec::closed(), &cfg.propagator, Direction::Forward)?;
    let if_u = 1.0 - fidelity_mat(closed.final_map(), target)?;
    let grid: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| temperatures.iter().map(move |&t| (g, t)))
        .collect();

    let run = || -> Vec<ScanPoint> {
        grid.par_iter()
            .map(|&(g, t)| scan_point(model, target, reference, g, t, if_u, cfg))
            .collect()
    };
    let points = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::validation(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(ScanResult {
        gammas: gammas.to_vec(),
        temperatures: temperatures.to_vec(),
        if_u,
        points,
    })
}

fn scan_point(
    model: &ModelSystem,
    target: &GateTarget,
    reference: &ControlField,
    gamma: f64,
    temperature: f64,
    if_u: f64,
    cfg: &ScanConfig,
) -> ScanPoint {
    let mut point = ScanPoint {
        gamma,
        temperature,
        if_noise: f64::NAN,
        if_controlled: None,
        log_ratio: f64::NAN,
        gain: None,
        purity_sub: f64::NAN,
        delta_e: f64::NAN,
        iters: 0,
        error: None,
    };
    if let Err(e) = fill_point(model, target, reference, if_u, cfg, &mut point) {
        point.error = Some(e.to_string());
    }
    point
}

fn fill_point(
    model: &ModelSystem,
    target: &GateTarget,
    reference: &ControlField,
    if_u: f64,
    cfg: &ScanConfig,
    p: &mut ScanPoint,
) -> Result<()> {
    let mut bath = BathSpec::new(p.gamma, p.temperature).with_phase_noise(cfg.gamma_p);
    bath.spectral_density = cfg.spectral_density;
    bath.validate()?;
    let traj = propagate_map(model, reference, &bath, &cfg.propagator, Direction::Forward)?;
    let map = SuperOperator::new(traj.final_map().clone())?;
    p.if_noise = 1.0 - fidelity_mat(map.matrix(), target)?;
    p.purity_sub = subspace_purity(&map, &SubspaceSelection::from_target(target))?;
    p.delta_e = energy_exchange(&map, &model.drift, cfg.energy_form)?;
    let controlled = match cfg.mode {
        ScanMode::DegradeOnly => p.if_noise,
        ScanMode::Mitigate => {
            let r = optimize(model, &bath, target, &cfg.oct, &cfg.propagator, reference)?;
            p.iters = r.records.len() - 1;
            p.if_controlled = Some(r.best_infidelity);
            r.best_infidelity
        }
    };
    let m = infidelity_metrics(if_u.max(IF_FLOOR), p.if_noise, controlled)?;
    p.log_ratio = m.log_ratio;
    if cfg.mode == ScanMode::Mitigate {
        p.gain = Some(m.gain);
    }
    Ok(())
}

/// Instantaneous Bohr frequencies `ω_ij(t_k)` for every ordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BohrTrace {
    pub times: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// `omegas[c][k]` for pair `c`.
    pub omegas: Vec<Vec<f64>>,
}

pub fn bohr_trace(model: &ModelSystem, field: &ControlField) -> Result<BohrTrace> {
    let set = propagate_invariants(model, field)?;
    let channels = jump_channels(&set, &BathSpec::closed())?;
    Ok(BohrTrace {
        times: set.times.clone(),
        pairs: channels.iter().map(|c| (c.i, c.j)).collect(),
        omegas: channels.into_iter().map(|c| c.omega).collect(),
    })
}
