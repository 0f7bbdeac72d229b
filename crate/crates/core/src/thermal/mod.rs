// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Non-adiabatic thermal dissipator: invariants of the driven system,
//! time-dependent jump operators, instantaneous Bohr frequencies and
//! detailed-balance rates.

mod dissipator;
mod invariants;
mod oracle;

pub use dissipator::{dissipator_from_frame, thermal_dissipator_at, GeneratorTrack};
pub use invariants::{
    bohr_frequency, initial_frame, initial_invariants, jump_channels, jump_operator,
    propagate_invariants, InvariantSet, JumpChannel, UnitaryTrack,
};
pub use oracle::{invariant_ode_oracle, structure_constants};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gaps below this are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-9;
/// Cutoff frequency for the flat spectral density.
pub const FLAT_OMEGA_MIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `J(ω) = |ω|`.
    #[default]
    Ohmic,
    /// `J(ω) = 1`.
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub gamma: f64,
    pub temperature: f64,
    pub spectral_density: SpectralDensity,
    pub gamma_p: f64,
}

impl BathSpec {
    pub fn new(gamma: f64, temperature: f64) -> Self {
        Self {
            gamma,
            temperature,
            spectral_density: SpectralDensity::Ohmic,
            gamma_p: 0.0,
        }
    }

    /// No coupling at all; the generator is purely Hamiltonian.
    pub fn closed() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn with_phase_noise(mut self, gamma_p: f64) -> Self {
        self.gamma_p = gamma_p;
        self
    }

    pub fn is_closed(&self) -> bool {
        self.gamma == 0.0 && self.gamma_p == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::validation(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::validation(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if !(self.gamma_p >= 0.0) || !self.gamma_p.is_finite() {
            return Err(Error::validation(format!(
                "gamma_p must be >= 0, got {}",
                self.gamma_p
            )));
        }
        Ok(())
    }
}

/// Excitation and decay rates `(Γ↑, Γ↓)` for a transition of frequency
/// `|ω|`: `Γ↑ = γ J n_T`, `Γ↓ = γ J (n_T + 1)`.
pub fn thermal_rates(omega: f64, bath: &BathSpec) -> Result<(f64, f64)> {
    if !(bath.temperature > 0.0) {
        return Err(Error::validation(format!(
            "temperature must be > 0, got {}",
            bath.temperature
        )));
    }
    Ok(rates_unchecked(omega.abs(), bath))
}

fn rates_unchecked(w: f64, bath: &BathSpec) -> (f64, f64) {
    let t = bath.temperature;
    let down = match bath.spectral_density {
        SpectralDensity::Ohmic => {
            if w < DEGENERATE_GAP {
                // γ|ω|(n+1) = γT·x/(1−e^{−x}) ≈ γT(1 + x/2)
                bath.gamma * t * (1.0 + 0.5 * w / t)
            } else {
                let x = w / t;
                bath.gamma * w / -(-x).exp_m1()
            }
        }
        SpectralDensity::Flat => {
            let x = w.max(FLAT_OMEGA_MIN) / t;
            bath.gamma / -(-x).exp_m1()
        }
    };
    let x = match bath.spectral_density {
        SpectralDensity::Ohmic => w / t,
        SpectralDensity::Flat => w.max(FLAT_OMEGA_MIN) / t,
    };
    (down * (-x).exp(), down)
}

/// Rate of a channel whose frequency is `ω_ij`: decay when `ω_ij > 0`,
/// excitation otherwise.
pub fn channel_rate(omega_ij: f64, bath: &BathSpec) -> f64 {
    let (up, down) = rates_unchecked(omega_ij.abs(), bath);
    if omega_ij > 0.0 {
        down
    } else {
        up
    }
}
