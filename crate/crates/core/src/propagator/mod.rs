// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Propagation of the dynamical map `dΛ/dt = 𝓛(t)Λ`, `Λ(0) = 𝓘`.

mod chebyshev;
mod krylov;
mod reference;
mod semi_global;

pub use chebyshev::{chebyshev_sample_source, ChebyshevGrid};
pub use krylov::{fm_apply, phi_krylov};
pub use reference::{propagate_reference, reference_step_expm, ReferenceIntegrator, ReferenceScheme};
pub use semi_global::{semi_global_step, StepOutput};

use serde::{Deserialize, Serialize};

use crate::models::{ControlField, ModelSystem};
use crate::ops::{operator_dim, real, SuperOperator};
use crate::thermal::{BathSpec, GeneratorTrack};
use crate::{CMat, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    /// Propagation step; must divide the control-grid spacing.
    pub dt: f64,
    /// Chebyshev sampling points per step.
    pub m: usize,
    /// Krylov dimension.
    pub k: usize,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            m: 7,
            k: 3,
            inner_tol: 1e-11,
            max_inner_iters: 40,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self, dim2: usize) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.m < 2 {
            return Err(Error::validation(format!("M must be >= 2, got {}", self.m)));
        }
        if self.k < 1 || self.k + 1 > dim2.max(2) {
            return Err(Error::validation(format!(
                "K must lie in 1..={}, got {}",
                dim2.saturating_sub(1),
                self.k
            )));
        }
        if !(self.inner_tol > 0.0) || self.max_inner_iters == 0 {
            return Err(Error::validation("inner_tol and max_inner_iters must be positive"));
        }
        Ok(())
    }

    /// Propagation sub-steps per control step.
    pub fn substeps(&self, field_dt: f64) -> Result<usize> {
        let n = (field_dt / self.dt).round();
        if n < 1.0 || (n * self.dt - field_dt).abs() > 1e-9 * field_dt {
            return Err(Error::validation(format!(
                "propagator dt={} does not divide the control spacing {field_dt}",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// `Λ(t_k)` (or `Y(t_k)` for the adjoint) on the control grid.
#[derive(Clone, Debug)]
pub struct MapTrajectory {
    pub times: Vec<f64>,
    pub maps: Vec<CMat>,
    /// Fixed-point sweeps used per control step (summed over sub-steps).
    pub inner_iters: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl MapTrajectory {
    pub fn final_map(&self) -> &CMat {
        self.maps.last().expect("trajectory is never empty")
    }

    pub fn superop(&self, k: usize) -> Result<SuperOperator> {
        SuperOperator::new(self.maps[k].clone())
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Direction<'a> {
    Forward,
    /// Backward from `Y(τ) = terminal†`, where `terminal` is the target `𝓞`.
    Adjoint { terminal: &'a CMat },
}

/// How the first fixed-point sweep of a sub-step is seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuessPolicy {
    /// Polynomial extrapolation of the previous sub-step's trajectory.
    Extrapolate,
    /// The previous sub-step's values at the same local times; suited to
    /// step maps that restart from the identity.
    Repeat,
}

/// Data retained between sub-steps to seed the next one.
#[derive(Clone, Debug, Default)]
pub struct StepMemory {
    prev: Option<(Vec<CMat>, CMat)>,
}

/// Output of one control step.
#[derive(Clone, Debug)]
pub struct ControlStep {
    pub end: CMat,
    /// Absolute times and values at the Chebyshev points of every sub-step.
    pub points: Vec<(f64, CMat)>,
    pub iterations: usize,
    pub residual: f64,
    /// Closed-system propagator at the end of the step.
    pub u_next: CMat,
}

/// Semi-global stepping over the control grid.
pub struct Stepper<'a> {
    pub gen: GeneratorTrack<'a>,
    pub cfg: PropagatorConfig,
    grid: ChebyshevGrid,
    extrap: Vec<Vec<f64>>,
    n_sub: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a ModelSystem, field: &ControlField, bath: &BathSpec, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate(model.dim() * model.dim())?;
        if field.n_channels() != model.n_channels() {
            return Err(Error::shape(format!(
                "field has {} channels, model has {}",
                field.n_channels(),
                model.n_channels()
            )));
        }
        let n_sub = cfg.substeps(field.dt)?;
        let grid = ChebyshevGrid::new(cfg.m, field.dt / n_sub as f64);
        let extrap = grid.extrapolation_weights();
        Ok(Self {
            gen: GeneratorTrack::new(model, field, bath)?,
            cfg: *cfg,
            grid,
            extrap,
            n_sub,
        })
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    /// Generators `(𝓛₀, [𝓛(s_m) − 𝓛₀])` for each sub-step of control step
    /// `k`, in integration order, plus `U(t_{k+1})`. For the adjoint the
    /// sub-steps run backward in time and the generators are `𝓛†`.
    pub fn step_generators(
        &self,
        field: &ControlField,
        k: usize,
        u_k: &CMat,
        adjoint: bool,
    ) -> Result<(Vec<(CMat, Vec<CMat>)>, CMat)> {
        let h = self.grid.dt();
        let big = field.dt;
        let m = self.grid.m();
        // local integration offsets: m Chebyshev points then the midpoint
        let mut wanted = Vec::with_capacity(self.n_sub * (m + 1));
        for j in 0..self.n_sub {
            let base = j as f64 * h;
            for s in self.grid.points().iter().copied().chain(std::iter::once(0.5 * h)) {
                let local = base + s;
                wanted.push(if adjoint { big - local } else { local });
            }
        }
        let mut order: Vec<usize> = (0..wanted.len()).collect();
        order.sort_by(|a, b| wanted[*a].total_cmp(&wanted[*b]));
        let sorted: Vec<f64> = order.iter().map(|&i| wanted[i].clamp(0.0, big)).collect();
        let (gens, u_next) = self.gen.step(field, k, u_k, &sorted)?;
        let mut by_index = vec![CMat::zeros(0, 0); wanted.len()];
        for (g, &i) in gens.into_iter().zip(&order) {
            by_index[i] = if adjoint { g.adjoint() } else { g };
        }
        let mut out = Vec::with_capacity(self.n_sub);
        let mut it = by_index.into_iter();
        for _ in 0..self.n_sub {
            let pts: Vec<CMat> = it.by_ref().take(m).collect();
            let l0 = it.next().expect("midpoint generator");
            let lt = pts.into_iter().map(|l| l - &l0).collect();
            out.push((l0, lt));
        }
        Ok((out, u_next))
    }

    fn seed(&self, memory: &StepMemory, policy: GuessPolicy) -> Option<Vec<CMat>> {
        let (pts, end) = memory.prev.as_ref()?;
        Some(match policy {
            GuessPolicy::Repeat => pts.clone(),
            GuessPolicy::Extrapolate => self
                .extrap
                .iter()
                .map(|w| {
                    let mut acc = end * real(w[w.len() - 1]);
                    for (wj, p) in w.iter().zip(pts) {
                        acc += p * real(*wj);
                    }
                    acc
                })
                .collect(),
        })
    }

    /// Advances `lambda` across control step `k` (forward) or from
    /// `t_{k+1}` back to `t_k` (adjoint).
    #[allow(clippy::too_many_arguments)]
    pub fn advance(
        &self,
        field: &ControlField,
        k: usize,
        u_k: &CMat,
        lambda: &CMat,
        adjoint: bool,
        policy: GuessPolicy,
        memory: &mut StepMemory,
    ) -> Result<ControlStep> {
        let (gens, u_next) = self.step_generators(field, k, u_k, adjoint)?;
        let h = self.grid.dt();
        let mut state = lambda.clone();
        let mut points = Vec::with_capacity(self.n_sub * self.grid.m());
        let mut iterations = 0;
        let mut residual = 0.0f64;
        for (j, (l0, lt)) in gens.iter().enumerate() {
            let guess = self.seed(memory, policy);
            let start = if adjoint {
                field.time(k + 1) - j as f64 * h
            } else {
                field.time(k) + j as f64 * h
            };
            let out = semi_global_step(l0, lt, &state, guess, &self.grid, &self.cfg).map_err(|e| match e {
                Error::Step { reason, .. } => Error::Step { time: start, reason },
                other => other,
            })?;
            for (s, p) in self.grid.points().iter().zip(&out.points) {
                let t = if adjoint { start - s } else { start + s };
                points.push((t, p.clone()));
            }
            iterations += out.iterations;
            residual = residual.max(out.residual);
            memory.prev = Some((out.points, out.end.clone()));
            state = out.end;
        }
        Ok(ControlStep {
            end: state,
            points,
            iterations,
            residual,
            u_next,
        })
    }

    /// `U(t_k)` on the whole grid; identity throughout for closed systems.
    pub fn unitary_grid(&self, field: &ControlField) -> Result<Vec<CMat>> {
        let mut us = Vec::with_capacity(field.n_times());
        let mut u = self.gen.initial_unitary();
        us.push(u.clone());
        for k in 0..field.n_steps() {
            if self.gen.bath.gamma > 0.0 {
                u = self.gen.step(field, k, &u, &[])?.1;
            }
            us.push(u.clone());
        }
        Ok(us)
    }
}

/// Forward map `Λ(t_k)` from `Λ(0) = 𝓘`, or the adjoint `Y(t_k)` from
/// `Y(τ) = 𝓞†` integrated backward with `𝓛†`, so that `Tr{Y(t)Λ(t)}` is
/// constant.
pub fn propagate_map(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    cfg: &PropagatorConfig,
    direction: Direction<'_>,
) -> Result<MapTrajectory> {
    let stepper = Stepper::new(model, field, bath, cfg)?;
    let n = model.dim() * model.dim();
    let nt = field.n_times();
    let mut memory = StepMemory::default();
    match direction {
        Direction::Forward => {
            let mut traj = MapTrajectory {
                times: (0..nt).map(|k| field.time(k)).collect(),
                maps: Vec::with_capacity(nt),
                inner_iters: Vec::with_capacity(nt - 1),
                residuals: Vec::with_capacity(nt - 1),
            };
            let mut lambda = CMat::identity(n, n);
            let mut u = stepper.gen.initial_unitary();
            traj.maps.push(lambda.clone());
            for k in 0..field.n_steps() {
                let out = stepper.advance(field, k, &u, &lambda, false, GuessPolicy::Extrapolate, &mut memory)?;
                lambda = out.end;
                u = out.u_next;
                traj.maps.push(lambda.clone());
                traj.inner_iters.push(out.iterations);
                traj.residuals.push(out.residual);
            }
            Ok(traj)
        }
        Direction::Adjoint { terminal } => {
            if terminal.nrows() != n || terminal.ncols() != n || operator_dim(n).is_none() {
                return Err(Error::shape("terminal map does not match the model dimension"));
            }
            let us = stepper.unitary_grid(field)?;
            let mut b = terminal.clone();
            let mut maps = vec![CMat::zeros(0, 0); nt];
            let mut iters = vec![0; nt - 1];
            let mut res = vec![0.0; nt - 1];
            maps[nt - 1] = b.adjoint();
            for k in (0..field.n_steps()).rev() {
                let out = stepper.advance(field, k, &us[k], &b, true, GuessPolicy::Extrapolate, &mut memory)?;
                b = out.end;
                maps[k] = b.adjoint();
                iters[k] = out.iterations;
                res[k] = out.residual;
            }
            Ok(MapTrajectory {
                times: (0..nt).map(|k| field.time(k)).collect(),
                maps,
                inner_iters: iters,
                residuals: res,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_qubit_ancilla_model, CoefficientTable, Shape};
    use crate::ops::{choi_cptp_check, expm, hamiltonian_liouvillian, max_abs_diff, trace_of_product};

    fn qutrit() -> ModelSystem {
        build_qubit_ancilla_model(1, 1.0, &CoefficientTable::ones(1), 0.0).unwrap()
    }

    #[test]
    fn pure_drift_matches_single_exponential() {
        let m = qutrit();
        let f = ControlField::zeros(2, 0.1, 31, Shape::gaussian(3.0, 1e-4));
        let traj = propagate_map(&m, &f, &BathSpec::closed(), &PropagatorConfig::default(), Direction::Forward).unwrap();
        let want = expm(&(hamiltonian_liouvillian(m.drift.matrix()) * real(3.0))).unwrap();
        assert!(max_abs_diff(traj.final_map(), &want) < 1e-12);
    }

    #[test]
    fn closed_driven_map_is_unitary_channel() {
        let m = qutrit();
        let f = ControlField::guess(&m, 5.0, 0.1, 0.8, 4, Shape::gaussian(5.0, 1e-4)).unwrap();
        let traj = propagate_map(&m, &f, &BathSpec::closed(), &PropagatorConfig::default(), Direction::Forward).unwrap();
        let r = choi_cptp_check(&traj.superop(50).unwrap(), 1e-10, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");
        let l = traj.final_map();
        let ll = l.adjoint() * l;
        assert!(max_abs_diff(&ll, &CMat::identity(9, 9)) < 1e-10);
    }

    #[test]
    fn adjoint_pairing_is_constant() {
        let m = qutrit();
        let f = ControlField::guess(&m, 3.0, 0.1, 0.8, 4, Shape::gaussian(3.0, 1e-4)).unwrap();
        let bath = BathSpec::new(0.02, 1.0);
        let cfg = PropagatorConfig::default();
        let fwd = propagate_map(&m, &f, &bath, &cfg, Direction::Forward).unwrap();
        let target = crate::models::target_superoperator(crate::models::Gate::Hadamard, 3).unwrap();
        let o = target.superop.matrix().clone();
        let adj = propagate_map(&m, &f, &bath, &cfg, Direction::Adjoint { terminal: &o }).unwrap();
        let p0 = trace_of_product(&adj.maps[0], &fwd.maps[0]);
        for k in 0..f.n_times() {
            let p = trace_of_product(&adj.maps[k], &fwd.maps[k]);
            assert!((p - p0).norm() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let m = qutrit();
        let f = ControlField::zeros(2, 0.1, 3, Shape::gaussian(0.2, 1e-4));
        let bad_k = PropagatorConfig { k: 9, ..PropagatorConfig::default() };
        assert!(propagate_map(&m, &f, &BathSpec::closed(), &bad_k, Direction::Forward).is_err());
        let bad_dt = PropagatorConfig { dt: 0.03, ..PropagatorConfig::default() };
        assert!(propagate_map(&m, &f, &BathSpec::closed(), &bad_dt, Direction::Forward).is_err());
    }
}
