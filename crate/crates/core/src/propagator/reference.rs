// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference: products of dense exponentials on fine
//! sub-steps.

use super::MapTrajectory;
use crate::models::{ControlField, ModelSystem};
use crate::ops::{commutator, expm, real, SuperOperator};
use crate::thermal::{BathSpec, GeneratorTrack};
use crate::{CMat, Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `exp(𝓛 Δt)`.
pub fn reference_step_expm(l_mid: &SuperOperator, dt: f64) -> Result<SuperOperator> {
    SuperOperator::new(expm(&(l_mid.matrix() * real(dt)))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceScheme {
    /// `exp(𝓛(t + h/2) h)`, second order.
    Midpoint,
    /// Fourth-order Magnus step from the two Gauss points.
    Magnus4,
}

/// Fine-step integrator over one control step.
pub struct ReferenceIntegrator<'a> {
    pub gen: GeneratorTrack<'a>,
    pub scheme: ReferenceScheme,
}

impl<'a> ReferenceIntegrator<'a> {
    pub fn new(model: &'a ModelSystem, field: &ControlField, bath: &BathSpec, scheme: ReferenceScheme) -> Result<Self> {
        Ok(Self {
            gen: GeneratorTrack::new(model, field, bath)?,
            scheme,
        })
    }

    /// Integrates `lambda` from `t_k` to `t_k + s_end` with `n` equal
    /// sub-steps; returns the map and `U(t_{k+1})`.
    pub fn advance(
        &self,
        field: &ControlField,
        k: usize,
        u_k: &CMat,
        lambda: &CMat,
        s_end: f64,
        n: usize,
    ) -> Result<(CMat, CMat)> {
        let h = s_end / n as f64;
        let nodes: Vec<f64> = match self.scheme {
            ReferenceScheme::Midpoint => vec![0.5],
            ReferenceScheme::Magnus4 => vec![0.5 - SQRT3 / 6.0, 0.5 + SQRT3 / 6.0],
        };
        let offsets: Vec<f64> = (0..n)
            .flat_map(|j| nodes.iter().map(move |c| (j as f64 + c) * h))
            .collect();
        let (gens, u_next) = self.gen.step(field, k, u_k, &offsets)?;
        let mut out = lambda.clone();
        for j in 0..n {
            let omega = match self.scheme {
                ReferenceScheme::Midpoint => &gens[j] * real(h),
                ReferenceScheme::Magnus4 => {
                    let (a1, a2) = (&gens[2 * j], &gens[2 * j + 1]);
                    (a1 + a2) * real(0.5 * h) + commutator(a2, a1) * real(SQRT3 / 12.0 * h * h)
                }
            };
            out = expm(&omega)? * out;
        }
        Ok((out, u_next))
    }
}

/// `Λ(t_k)` from products of fine-step exponentials with spacing `dt_ref`.
pub fn propagate_reference(
    model: &ModelSystem,
    field: &ControlField,
    bath: &BathSpec,
    dt_ref: f64,
    scheme: ReferenceScheme,
) -> Result<MapTrajectory> {
    let n = (field.dt / dt_ref).round();
    if n < 1.0 || (n * dt_ref - field.dt).abs() > 1e-9 * field.dt {
        return Err(Error::validation(format!(
            "reference step {dt_ref} does not divide the control spacing {}",
            field.dt
        )));
    }
    let n = n as usize;
    let integ = ReferenceIntegrator::new(model, field, bath, scheme)?;
    let d2 = model.dim() * model.dim();
    let mut lambda = CMat::identity(d2, d2);
    let mut u = integ.gen.initial_unitary();
    let mut maps = Vec::with_capacity(field.n_times());
    maps.push(lambda.clone());
    for k in 0..field.n_steps() {
        let (next, u_next) = integ.advance(field, k, &u, &lambda, field.dt, n)?;
        lambda = next;
        u = u_next;
        maps.push(lambda.clone());
    }
    Ok(MapTrajectory {
        times: (0..field.n_times()).map(|k| field.time(k)).collect(),
        maps,
        inner_iters: vec![n; field.n_steps()],
        residuals: vec![0.0; field.n_steps()],
    })
}
