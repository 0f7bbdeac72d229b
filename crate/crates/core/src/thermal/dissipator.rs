// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::invariants::{initial_frame, InvariantSet, UnitaryTrack};
use super::{channel_rate, BathSpec};
use crate::models::{ControlField, ModelSystem};
use crate::ops::{add_gkls_channel, hamiltonian_liouvillian, phase_noise_liouvillian, SuperOperator};
use crate::{CMat, Result};

/// `𝓛_D` for the dressed basis `W` (columns `w_k`) and Hamiltonian `H`.
///
/// Channel `(i, j)` has jump `w_j w_i†` and frequency
/// `ω_ij = ⟨w_i|H|w_i⟩ − ⟨w_j|H|w_j⟩`, the negated Hilbert–Schmidt
/// projection of `[H, F]` onto `F`.
pub fn dissipator_from_frame(w: &CMat, h: &CMat, bath: &BathSpec) -> CMat {
    let d = w.nrows();
    let mut out = CMat::zeros(d * d, d * d);
    if bath.gamma > 0.0 {
        let energies: Vec<f64> = (0..d)
            .map(|k| {
                let c = w.column(k);
                (c.adjoint() * h * c)[(0, 0)].re
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let rate = channel_rate(energies[i] - energies[j], bath);
                let f = w.column(j) * w.column(i).adjoint();
                add_gkls_channel(&mut out, &f, rate);
            }
        }
    }
    if bath.gamma_p > 0.0 {
        out += phase_noise_liouvillian(h, bath.gamma_p);
    }
    out
}

/// Dissipator on the control grid from a conjugation-built invariant set.
pub fn thermal_dissipator_at(t_index: usize, set: &InvariantSet, bath: &BathSpec) -> Result<SuperOperator> {
    bath.validate()?;
    let w = set.dressed_frame(t_index)?;
    SuperOperator::new(dissipator_from_frame(&w, &set.hamiltonians[t_index], bath))
}

/// Evaluates the full generator `𝓛(t) = 𝓛_H(t) + 𝓛_D(t)` along a
/// propagation, carrying the closed-system propagator that defines the
/// dressed basis.
#[derive(Clone, Debug)]
pub struct GeneratorTrack<'a> {
    pub model: &'a ModelSystem,
    pub bath: BathSpec,
    frame: CMat,
}

impl<'a> GeneratorTrack<'a> {
    pub fn new(model: &'a ModelSystem, field: &ControlField, bath: &BathSpec) -> Result<Self> {
        bath.validate()?;
        Ok(Self {
            model,
            bath: *bath,
            frame: initial_frame(model, field)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `U(0)`.
    pub fn initial_unitary(&self) -> CMat {
        CMat::identity(self.dim(), self.dim())
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    /// `𝓛(t)` for a given `U(t)`.
    pub fn generator(&self, field: &ControlField, t: f64, u_t: &CMat) -> CMat {
        let h = self.model.hamiltonian_at(field, t);
        self.generator_for(&h, u_t)
    }

    pub(crate) fn generator_for(&self, h: &CMat, u_t: &CMat) -> CMat {
        let mut l = hamiltonian_liouvillian(h);
        if !self.bath.is_closed() {
            l += dissipator_from_frame(&(u_t * &self.frame), h, &self.bath);
        }
        l
    }

    /// `𝓛_D(t)` only.
    pub fn dissipator(&self, field: &ControlField, t: f64, u_t: &CMat) -> CMat {
        let h = self.model.hamiltonian_at(field, t);
        dissipator_from_frame(&(u_t * &self.frame), &h, &self.bath)
    }

    /// Generators at ascending step-local offsets of step `k`, and
    /// `U(t_{k+1})`.
    pub fn step(
        &self,
        field: &ControlField,
        k: usize,
        u_k: &CMat,
        offsets: &[f64],
    ) -> Result<(Vec<CMat>, CMat)> {
        let t0 = field.time(k);
        if self.bath.gamma == 0.0 {
            // the dressed basis is not needed
            let gens = offsets
                .iter()
                .map(|s| self.generator(field, t0 + s, u_k))
                .collect();
            return Ok((gens, u_k.clone()));
        }
        let (us, u_next) = UnitaryTrack::new(self.model, field).step(k, u_k, offsets)?;
        let gens = offsets
            .iter()
            .zip(&us)
            .map(|(s, u)| self.generator(field, t0 + s, u))
            .collect();
        Ok((gens, u_next))
    }
}
