// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Krotov-type optimization of the control fields for a target map.
//!
//! The objective is `J = Re Tr{𝓞†Λ(τ)}`, maximized. The adjoint is
//! `Y(t) = 𝓞†P(τ, t)` with `P(τ, t)` the map from `t` to `τ`, so
//! `Tr{Y(t)Λ(t)} = J` at every `t` and `∂J/∂ε(t) = Re Tr{Y(t) 𝓛'_c Λ(t)}`.

mod update;

pub use update::krotov_field_update;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::models::{ControlField, GateTarget, ModelSystem, Shape};
use crate::ops::{hamiltonian_liouvillian, hs_inner_mat, max_abs, trace_of_product, SuperOperator};
use crate::propagator::{propagate_map, Direction, GuessPolicy, MapTrajectory, PropagatorConfig, StepMemory, Stepper};
use crate::thermal::BathSpec;
use crate::{CMat, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Updates applied during the forward sweep against the previous
    /// iterate's adjoint.
    #[default]
    SequentialKrotov,
    /// All grid values updated from the exact gradient of one sweep.
    FullSweepGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctConfig {
    /// Penalty weight `λ`.
    pub lambda: f64,
    pub shape: Shape,
    /// Weight of the dissipator curvature in the update denominator.
    pub gamma_a: f64,
    pub max_iters: usize,
    pub target_infidelity: f64,
    pub mode: UpdateMode,
    /// A drop of `J` larger than this triggers damping.
    pub regression_tol: f64,
}

impl OctConfig {
    pub fn new(shape: Shape) -> Self {
        Self {
            lambda: 1.0,
            shape,
            gamma_a: 0.0,
            max_iters: 100,
            target_infidelity: 1e-4,
            mode: UpdateMode::SequentialKrotov,
            regression_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::validation(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.target_infidelity > 0.0 && self.target_infidelity < 1.0) {
            return Err(Error::validation("target_infidelity must lie in (0, 1)"));
        }
        if !(self.gamma_a >= 0.0) {
            return Err(Error::validation("gamma_a must be >= 0"));
        }
        self.shape.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub j_max: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    /// Grid L2 norm of the accepted field change.
    pub field_change: f64,
    pub seconds: f64,
    pub lambda: f64,
    /// Set when this iteration was rejected and `λ` doubled.
    pub damped: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    /// The iterate with the lowest infidelity.
    pub best_field: ControlField,
    pub best_infidelity: f64,
    pub records: Vec<IterationRecord>,
    pub damping_events: usize,
    pub converged: bool,
}

/// `F = Re Tr{𝓞†Λ} / Tr{𝓞†𝓞}`.
pub fn fidelity(lambda_tau: &SuperOperator, target: &GateTarget) -> Result<f64> {
    fidelity_mat(lambda_tau.matrix(), target)
}

pub fn fidelity_mat(lambda_tau: &CMat, target: &GateTarget) -> Result<f64> {
    let o = target.superop.matrix();
    if o.shape() != lambda_tau.shape() {
        return Err(Error::shape("map and target dimensions differ"));
    }
    let norm = hs_inner_mat(o, o).re;
    if !(norm > 0.0) {
        return Err(Error::validation("target has zero norm"));
    }
    Ok(hs_inner_mat(o, lambda_tau).re / norm)
}

pub fn forward_propagate(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    cfg: &PropagatorConfig,
) -> Result<MapTrajectory> {
    propagate_map(model, field, bath, cfg, Direction::Forward)
}

/// `Y(t_k)` from `Y(τ) = 𝓞†`.
pub fn backward_propagate(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    cfg: &PropagatorConfig,
    target: &GateTarget,
) -> Result<MapTrajectory> {
    propagate_map(
        model,
        field,
        bath,
        cfg,
        Direction::Adjoint {
            terminal: target.superop.matrix(),
        },
    )
}

/// Forward sweep data: step maps `G_k`, maps `Λ_k`, and for each step the
/// Chebyshev-point maps `P(t)` from `t_k`.
struct Sweep {
    steps: Vec<CMat>,
    maps: Vec<CMat>,
    points: Vec<Vec<(f64, CMat)>>,
}

fn forward_sweep(stepper: &Stepper<'_>, field: &ControlField, keep_points: bool) -> Result<Sweep> {
    let n = stepper.gen.dim().pow(2);
    let id = CMat::identity(n, n);
    let mut memory = StepMemory::default();
    let mut u = stepper.gen.initial_unitary();
    let mut sweep = Sweep {
        steps: Vec::with_capacity(field.n_steps()),
        maps: vec![id.clone()],
        points: Vec::new(),
    };
    for k in 0..field.n_steps() {
        let out = stepper.advance(field, k, &u, &id, false, GuessPolicy::Repeat, &mut memory)?;
        u = out.u_next;
        let next = &out.end * sweep.maps.last().expect("non-empty");
        sweep.maps.push(next);
        sweep.steps.push(out.end);
        if keep_points {
            sweep.points.push(out.points);
        }
    }
    Ok(sweep)
}

/// `Y_k = Y_{k+1} G_k`, `Y_N = 𝓞†`: the exact adjoint of the discrete
/// forward sweep.
fn backward_sweep(steps: &[CMat], target: &GateTarget) -> Vec<CMat> {
    let mut ys = vec![CMat::zeros(0, 0); steps.len() + 1];
    ys[steps.len()] = target.superop.matrix().adjoint();
    for k in (0..steps.len()).rev() {
        ys[k] = &ys[k + 1] * &steps[k];
    }
    ys
}

fn channel_derivatives(model: &ModelSystem) -> Vec<CMat> {
    model
        .control_generators
        .iter()
        .map(|g| hamiltonian_liouvillian(g.matrix()))
        .collect()
}

/// `J = Re Tr{𝓞†Λ(τ)}` for a field.
pub fn objective(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    target: &GateTarget,
    cfg: &PropagatorConfig,
) -> Result<f64> {
    let stepper = Stepper::new(model, field, bath, cfg)?;
    let sweep = forward_sweep(&stepper, field, false)?;
    Ok(hs_inner_mat(target.superop.matrix(), sweep.maps.last().expect("non-empty")).re)
}

/// `∂J/∂ε_c[k]` for every channel and grid point, through the
/// Hamiltonian part of the generator.
///
/// Fields are piecewise linear, so `ε_c[k]` enters steps `k − 1` and `k`
/// through hat functions. Each step integral is evaluated by
/// interpolatory quadrature at the Chebyshev points, with
/// `Λ(t) = P(t)Λ_k` and `Y(t) = Y_{k+1} G_k P(t)⁻¹`.
pub fn gradient(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    target: &GateTarget,
    cfg: &PropagatorConfig,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let stepper = Stepper::new(model, field, bath, cfg)?;
    let sweep = forward_sweep(&stepper, field, true)?;
    let ys = backward_sweep(&sweep.steps, target);
    let derivs = channel_derivatives(model);
    let j = hs_inner_mat(target.superop.matrix(), sweep.maps.last().expect("non-empty")).re;

    let grid = stepper.grid();
    let (wl, wr) = grid.hat_weights();
    let h = grid.dt();
    let m = grid.m();
    let mut grad = vec![vec![0.0; field.n_times()]; model.n_channels()];
    for k in 0..field.n_steps() {
        let a = &sweep.maps[k] * &ys[k + 1] * &sweep.steps[k];
        let t0 = field.time(k);
        for (idx, (t, p)) in sweep.points[k].iter().enumerate() {
            let sub = idx / m;
            let q = idx % m;
            let inv = p
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::numerical("singular intermediate map in gradient"))?;
            let pair = p * &a * inv;
            // hat functions of the control step, linear on each sub-step
            let phi_l = |x: f64| 1.0 - x / field.dt;
            let s0 = sub as f64 * h;
            let s1 = s0 + h;
            let w_left = phi_l(s0) * wl[q] + phi_l(s1) * wr[q];
            let w_right = (1.0 - phi_l(s0)) * wl[q] + (1.0 - phi_l(s1)) * wr[q];
            let _ = t - t0;
            for (c, lc) in derivs.iter().enumerate() {
                let g = trace_of_product(lc, &pair).re;
                grad[c][k] += w_left * g;
                grad[c][k + 1] += w_right * g;
            }
        }
    }
    Ok((j, grad))
}

/// Optimizes `initial` towards `target`; returns the best iterate.
pub fn optimize(
    model: &ModelSystem,
    bath: &BathSpec,
    target: &GateTarget,
    oct: &OctConfig,
    prop: &PropagatorConfig,
    initial: &ControlField,
) -> Result<OptimizeResult> {
    oct.validate()?;
    bath.validate()?;
    if target.dim() != model.dim() {
        return Err(Error::shape("target and model dimensions differ"));
    }
    let norm = hs_inner_mat(target.superop.matrix(), target.superop.matrix()).re;
    let derivs = channel_derivatives(model);

    let started = Instant::now();
    let mut field = initial.clone();
    let mut lambda = oct.lambda;
    let stepper = Stepper::new(model, &field, bath, prop)?;
    let mut sweep = forward_sweep(&stepper, &field, false)?;
    let mut j = hs_inner_mat(target.superop.matrix(), sweep.maps.last().expect("non-empty")).re;
    let mut records = vec![IterationRecord {
        iter: 0,
        j_max: j,
        fidelity: j / norm,
        infidelity: 1.0 - j / norm,
        field_change: 0.0,
        seconds: started.elapsed().as_secs_f64(),
        lambda,
        damped: false,
    }];
    let mut best = (1.0 - j / norm, field.clone());
    let mut damping_events = 0;

    let mut iter = 0;
    while iter < oct.max_iters && best.0 > oct.target_infidelity {
        iter += 1;
        let attempt = match oct.mode {
            UpdateMode::SequentialKrotov => {
                let ys = backward_sweep(&sweep.steps, target);
                sequential_pass(model, bath, prop, oct, lambda, &derivs, &field, &sweep, &ys)
            }
            UpdateMode::FullSweepGradient => gradient_pass(model, bath, target, prop, oct, lambda, &field),
        };
        // a step that fails to converge counts as a regression
        let accepted = match attempt {
            Ok((cand, sw)) => {
                let j_new = hs_inner_mat(target.superop.matrix(), sw.maps.last().expect("non-empty")).re;
                (j_new.is_finite() && j_new >= j - oct.regression_tol).then_some((cand, sw, j_new))
            }
            Err(Error::Step { .. } | Error::Numerical(_)) => None,
            Err(e) => return Err(e),
        };
        let Some((candidate, cand_sweep, j_new)) = accepted else {
            damping_events += 1;
            lambda *= 2.0;
            records.push(IterationRecord {
                iter,
                j_max: j,
                fidelity: j / norm,
                infidelity: 1.0 - j / norm,
                field_change: 0.0,
                seconds: started.elapsed().as_secs_f64(),
                lambda,
                damped: true,
            });
            continue;
        };
        let change = candidate.distance(&field);
        field = candidate;
        sweep = cand_sweep;
        j = j_new;
        let infid = 1.0 - j / norm;
        if infid < best.0 {
            best = (infid, field.clone());
        }
        records.push(IterationRecord {
            iter,
            j_max: j,
            fidelity: j / norm,
            infidelity: infid,
            field_change: change,
            seconds: started.elapsed().as_secs_f64(),
            lambda,
            damped: false,
        });
    }
    Ok(OptimizeResult {
        converged: best.0 <= oct.target_infidelity,
        best_infidelity: best.0,
        best_field: best.1,
        records,
        damping_events,
    })
}

fn gradient_pass(
    model: &ModelSystem,
    bath: &BathSpec,
    target: &GateTarget,
    prop: &PropagatorConfig,
    oct: &OctConfig,
    lambda: f64,
    field: &ControlField,
) -> Result<(ControlField, Sweep)> {
    let (_, grad) = gradient(model, field, bath, target, prop)?;
    let mut cand = field.clone();
    let last = field.n_times() - 1;
    for (c, g) in grad.iter().enumerate() {
        for (k, gk) in g.iter().enumerate() {
            let w = if k == 0 || k == last { 0.5 * field.dt } else { field.dt };
            cand.amplitudes[c][k] += oct.shape.value(field.time(k)) / (2.0 * lambda) * gk / w;
        }
    }
    let st = Stepper::new(model, &cand, bath, prop)?;
    let sw = forward_sweep(&st, &cand, false)?;
    Ok((cand, sw))
}

/// One sequential sweep: at each `t_{k+1}` the field is updated from the
/// predicted map `G_k^{old} Λ_k^{new}` and the old adjoint, then step `k`
/// is recomputed with the new field.
#[allow(clippy::too_many_arguments)]
fn sequential_pass(
    model: &ModelSystem,
    bath: &BathSpec,
    prop: &PropagatorConfig,
    oct: &OctConfig,
    lambda: f64,
    derivs: &[CMat],
    field: &ControlField,
    old: &Sweep,
    ys: &[CMat],
) -> Result<(ControlField, Sweep)> {
    let mut new_field = field.clone();
    let stepper = Stepper::new(model, field, bath, prop)?;
    let n = model.dim().pow(2);
    let id = CMat::identity(n, n);
    let mut memory = StepMemory::default();
    let mut u = stepper.gen.initial_unitary();
    let mut sweep = Sweep {
        steps: Vec::with_capacity(field.n_steps()),
        maps: vec![id.clone()],
        points: Vec::new(),
    };
    for k in 0..field.n_steps() {
        let lam_k = sweep.maps.last().expect("non-empty").clone();
        let pred = &old.steps[k] * &lam_k;
        let pair = &pred * &ys[k + 1];
        let t = field.time(k + 1);
        let s = oct.shape.value(t);
        let dissipative = oct.gamma_a > 0.0 && bath.gamma > 0.0;
        let frame_t = if dissipative {
            // dressed basis at t_{k+1} along the new trajectory
            let (_, u_next) = stepper.gen.step(&new_field, k, &u, &[])?;
            Some((u_next * stepper.gen.frame(), model.hamiltonian_at(&new_field, t)))
        } else {
            None
        };
        for (c, lc) in derivs.iter().enumerate() {
            let den = match &frame_t {
                Some((w, h)) => {
                    let curv = update::dissipator_curvature(model, w, h, c, bath, 1e-4);
                    Some(oct.gamma_a * trace_of_product(&curv, &pair).re)
                }
                None => None,
            };
            new_field.amplitudes[c][k + 1] += update::update_from_pair(&pair, lc, s, lambda, den);
        }
        let out = stepper.advance(&new_field, k, &u, &id, false, GuessPolicy::Repeat, &mut memory)?;
        u = out.u_next;
        sweep.maps.push(&out.end * &lam_k);
        sweep.steps.push(out.end);
    }
    if new_field.amplitudes.iter().flatten().any(|v| !v.is_finite()) || sweep.maps.iter().any(|m| !max_abs(m).is_finite()) {
        return Err(Error::numerical("field update diverged"));
    }
    Ok((new_field, sweep))
}
