// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::models::ModelSystem;
use crate::ops::{real, trace_of_product};
use crate::thermal::{dissipator_from_frame, BathSpec};
use crate::CMat;

/// Krotov step for one channel at one time:
/// `Δε = s/(2λ) · Re Tr{Y 𝓛'_c Λ}`, or with the dissipative correction
/// `Δε = (s/2) · Re Tr{Y 𝓛'_c Λ} / (λ + γ_A Re Tr{Y 𝓛'_D Λ})`.
///
/// `y_prev` is the adjoint of the previous iterate, `lambda_curr` the
/// current forward map, `lc` the derivative `∂𝓛/∂ε_c`. A denominator
/// smaller than `1e−12 λ` falls back to the plain step.
pub fn krotov_field_update(
    y_prev: &CMat,
    lambda_curr: &CMat,
    lc: &CMat,
    shape: f64,
    penalty: f64,
    denominator_term: Option<f64>,
) -> f64 {
    let pair = lambda_curr * y_prev;
    update_from_pair(&pair, lc, shape, penalty, denominator_term)
}

/// As [`krotov_field_update`] with `Λ Y` already formed.
pub(crate) fn update_from_pair(pair: &CMat, lc: &CMat, shape: f64, penalty: f64, denominator_term: Option<f64>) -> f64 {
    let grad = trace_of_product(lc, pair).re;
    let den = match denominator_term {
        Some(d) => {
            let den = penalty + d;
            if den.abs() < 1e-12 * penalty {
                penalty
            } else {
                den
            }
        }
        None => penalty,
    };
    0.5 * shape * grad / den
}

/// `½ ∂²𝓛_D/∂ε_c²` by central differences in the Hamiltonian with the
/// dressed basis held fixed.
pub(crate) fn dissipator_curvature(
    model: &ModelSystem,
    frame_t: &CMat,
    h_t: &CMat,
    channel: usize,
    bath: &BathSpec,
    delta: f64,
) -> CMat {
    let g = model.control_generators[channel].matrix();
    let hp = h_t + g * real(delta);
    let hm = h_t - g * real(delta);
    let dp = dissipator_from_frame(frame_t, &hp, bath);
    let d0 = dissipator_from_frame(frame_t, h_t, bath);
    let dm = dissipator_from_frame(frame_t, &hm, bath);
    (dp - d0 * real(2.0) + dm) * real(0.5 / (delta * delta))
}
