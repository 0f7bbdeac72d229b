// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelSystem;
use crate::{Error, Result};

/// Gaussian update envelope pinned to `floor` at both ends of `[0, τ]`.
///
/// `s(t) = floor + (1 − floor)(g(t) − g(0))/(1 − g(0))` with
/// `g(t) = exp(−(t − τ/2)²/(2σ²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub tau: f64,
    pub sigma: f64,
    pub floor: f64,
}

impl Shape {
    /// Width `σ = τ/6`.
    pub fn gaussian(tau: f64, floor: f64) -> Self {
        Self {
            tau,
            sigma: tau / 6.0,
            floor,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let g = |x: f64| (-(x - 0.5 * self.tau).powi(2) / (2.0 * self.sigma * self.sigma)).exp();
        let g0 = g(0.0);
        let v = (g(t) - g0) / (1.0 - g0);
        self.floor + (1.0 - self.floor) * v.max(0.0)
    }

    /// The bump without the floor, `(s(t) − floor)/(1 − floor)`; exactly zero
    /// at both ends.
    pub fn bump(&self, t: f64) -> f64 {
        (self.value(t) - self.floor) / (1.0 - self.floor)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.sigma > 0.0) || !(0.0..1.0).contains(&self.floor) {
            return Err(Error::validation(format!("invalid shape {self:?}")));
        }
        Ok(())
    }
}

/// Real control amplitudes on a uniform grid `t_k = k Δt`, interpolated
/// linearly between grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlField {
    pub dt: f64,
    n_times: usize,
    /// `amplitudes[channel][k]`.
    pub amplitudes: Vec<Vec<f64>>,
    pub shape: Shape,
}

impl ControlField {
    pub fn zeros(n_channels: usize, dt: f64, n_times: usize, shape: Shape) -> Self {
        Self {
            dt,
            n_times,
            amplitudes: vec![vec![0.0; n_times]; n_channels],
            shape,
        }
    }

    pub fn from_samples(dt: f64, amplitudes: Vec<Vec<f64>>, shape: Shape) -> Result<Self> {
        let n_times = amplitudes.first().map(Vec::len).unwrap_or(0);
        if n_times < 2 {
            return Err(Error::validation("a field needs at least two time points"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation(format!("dt must be positive, got {dt}")));
        }
        if amplitudes.iter().any(|c| c.len() != n_times) {
            return Err(Error::shape("channels have different sample counts"));
        }
        if amplitudes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("field amplitudes must be finite"));
        }
        Ok(Self {
            dt,
            n_times,
            amplitudes,
            shape,
        })
    }

    /// Sinusoids at the drift transition frequencies each channel couples,
    /// `A b(t) Σ cos(|ε_i − ε_j| t + φ)` under the floor-free bump `b`, with
    /// seeded random phases.
    pub fn guess(
        model: &ModelSystem,
        tau: f64,
        dt: f64,
        amplitude: f64,
        seed: u64,
        shape: Shape,
    ) -> Result<Self> {
        let n_times = grid_points(tau, dt)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = &model.level_energies;
        let mut amplitudes = Vec::with_capacity(model.n_channels());
        for g in &model.control_generators {
            let mut freqs = Vec::new();
            let gm = g.matrix();
            for i in 0..gm.nrows() {
                for j in i + 1..gm.ncols() {
                    if gm[(i, j)].norm() > 1e-12 {
                        freqs.push(((e[i] - e[j]).abs(), rng.random_range(0.0..std::f64::consts::TAU)));
                    }
                }
            }
            let norm = (freqs.len().max(1)) as f64;
            let samples = (0..n_times)
                .map(|k| {
                    let t = k as f64 * dt;
                    let osc: f64 = freqs.iter().map(|(w, p)| (w * t + p).cos()).sum();
                    amplitude * shape.bump(t) * osc / norm
                })
                .collect();
            amplitudes.push(samples);
        }
        Self::from_samples(dt, amplitudes, shape)
    }

    pub fn n_channels(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_steps(&self) -> usize {
        self.n_times - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn tau(&self) -> f64 {
        self.time(self.n_times - 1)
    }

    pub fn amplitudes_at(&self, t: f64) -> Vec<f64> {
        let x = t / self.dt;
        let k = (x.floor().max(0.0) as usize).min(self.n_times.saturating_sub(2));
        let frac = x - k as f64;
        self.amplitudes
            .iter()
            .map(|c| c[k] + frac * (c[k + 1] - c[k]))
            .collect()
    }

    /// Discrete L2 norm `sqrt(Σ_c Σ_k Δt ε_c[k]²)`.
    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().flatten().map(|v| v * v).sum::<f64>() * self.dt).sqrt()
    }

    /// Same grid norm applied to the difference of two fields.
    pub fn distance(&self, other: &Self) -> f64 {
        let s: f64 = self
            .amplitudes
            .iter()
            .flatten()
            .zip(other.amplitudes.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (s * self.dt).sqrt()
    }
}

/// Number of grid points for horizon `tau` at spacing `dt`; `tau` must be
/// an integer multiple of `dt`.
pub fn grid_points(tau: f64, dt: f64) -> Result<usize> {
    if !(tau > 0.0) || !(dt > 0.0) || !tau.is_finite() || !dt.is_finite() {
        return Err(Error::validation(format!("invalid grid tau={tau}, dt={dt}")));
    }
    let steps = (tau / dt).round();
    if (steps * dt - tau).abs() > 1e-9 * tau.max(1.0) {
        return Err(Error::validation(format!(
            "tau={tau} is not a multiple of dt={dt}"
        )));
    }
    Ok(steps as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_qubit_ancilla_model, CoefficientTable};

    #[test]
    fn shape_pinned_at_ends() {
        let s = Shape::gaussian(400.0, 1e-4);
        assert!((s.value(0.0) - 1e-4).abs() < 1e-15);
        assert!((s.value(400.0) - 1e-4).abs() < 1e-15);
        assert!((s.value(200.0) - 1.0).abs() < 1e-15);
        let z = Shape::gaussian(10.0, 0.0);
        assert_eq!(z.value(0.0), 0.0);
        assert!(z.value(0.1) > 0.0);
    }

    #[test]
    fn interpolation_is_linear() {
        let f = ControlField::from_samples(0.5, vec![vec![0.0, 1.0, 3.0]], Shape::gaussian(1.0, 0.0))
            .unwrap();
        assert_eq!(f.amplitudes_at(0.25), vec![0.5]);
        assert_eq!(f.amplitudes_at(0.75), vec![2.0]);
        assert_eq!(f.amplitudes_at(1.0), vec![3.0]);
    }

    #[test]
    fn guess_is_seeded_and_vanishes_at_ends() {
        let m = build_qubit_ancilla_model(1, 1.0, &CoefficientTable::ones(1), 0.0).unwrap();
        let shape = Shape::gaussian(20.0, 1e-4);
        let a = ControlField::guess(&m, 20.0, 0.1, 0.5, 7, shape).unwrap();
        let b = ControlField::guess(&m, 20.0, 0.1, 0.5, 7, shape).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_times(), 201);
        assert_eq!(a.amplitudes[0][0], 0.0);
        assert_eq!(a.amplitudes[1][200], 0.0);
        assert!(a.norm() > 0.0);
    }

    #[test]
    fn grid_rejects_non_multiple() {
        assert!(grid_points(1.05, 0.1).is_err());
        assert_eq!(grid_points(1.0, 0.1).unwrap(), 11);
    }
}
