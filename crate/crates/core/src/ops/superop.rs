// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::{Operator, SuperOperator};
use crate::{CMat, Error, Result, C64};

/// `𝓛_H = −i(H ⊗ I − I ⊗ Hᵀ)`, the generator of `X ↦ −i[H, X]`.
pub fn commutator_superop(h: &Operator) -> Result<SuperOperator> {
    if !h.is_hermitian() {
        return Err(Error::validation(
            "commutator superoperator requires a Hermitian operator",
        ));
    }
    SuperOperator::new(hamiltonian_liouvillian(h.matrix()))
}

/// Unchecked matrix form of [`commutator_superop`]; also accepts
/// non-Hermitian effective generators.
pub fn hamiltonian_liouvillian(h: &CMat) -> CMat {
    let d = h.nrows();
    let n = d * d;
    let mi = C64::new(0.0, -1.0);
    let mut out = CMat::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            let row = a * d + b;
            // H X term: couples (k, b) -> (a, b)
            for k in 0..d {
                out[(row, k * d + b)] += mi * h[(a, k)];
            }
            // X H term: couples (a, l) -> (a, b)
            for l in 0..d {
                out[(row, a * d + l)] -= mi * h[(l, b)];
            }
        }
    }
    out
}

/// Dissipator `Σ Γ [F • F† − ½{F†F, •}]`.
///
/// `dim` is the Hilbert-space dimension; an empty channel list yields the
/// zero superoperator.
pub fn gkls_superop(dim: usize, channels: &[(Operator, f64)]) -> Result<SuperOperator> {
    let mut acc = CMat::zeros(dim * dim, dim * dim);
    for (idx, (f, rate)) in channels.iter().enumerate() {
        if f.dim() != dim {
            return Err(Error::shape(format!(
                "channel {idx} has dim {}, expected {dim}",
                f.dim()
            )));
        }
        if !(*rate >= 0.0) || !rate.is_finite() {
            return Err(Error::validation(format!(
                "channel {idx} has invalid rate {rate}"
            )));
        }
        add_gkls_channel(&mut acc, f.matrix(), *rate);
    }
    SuperOperator::new(acc)
}

/// Adds `Γ [F ⊗ F* − ½(F†F ⊗ I + I ⊗ (F†F)ᵀ)]` into `acc`.
pub fn add_gkls_channel(acc: &mut CMat, f: &CMat, rate: f64) {
    if rate == 0.0 {
        return;
    }
    let d = f.nrows();
    let q = f.adjoint() * f;
    let g = C64::new(rate, 0.0);
    let half = C64::new(0.5 * rate, 0.0);
    for a in 0..d {
        for b in 0..d {
            let row = a * d + b;
            for k in 0..d {
                let fak = f[(a, k)];
                if fak != C64::new(0.0, 0.0) {
                    for l in 0..d {
                        out_add(acc, row, k * d + l, g * fak * f[(b, l)].conj());
                    }
                }
                out_add(acc, row, k * d + b, -half * q[(a, k)]);
            }
            for l in 0..d {
                out_add(acc, row, a * d + l, -half * q[(l, b)]);
            }
        }
    }
}

#[inline]
fn out_add(acc: &mut CMat, r: usize, c: usize, v: C64) {
    acc[(r, c)] += v;
}

/// Controller phase noise `−γ_P [H, [H, •]]`.
pub fn phase_noise_superop(h: &Operator, gamma_p: f64) -> Result<SuperOperator> {
    if !(gamma_p >= 0.0) || !gamma_p.is_finite() {
        return Err(Error::validation(format!(
            "phase-noise rate must be non-negative, got {gamma_p}"
        )));
    }
    if !h.is_hermitian() {
        return Err(Error::validation("phase noise requires a Hermitian operator"));
    }
    SuperOperator::new(phase_noise_liouvillian(h.matrix(), gamma_p))
}

/// Matrix form of `−γ_P (H² ⊗ I − 2 H ⊗ Hᵀ + I ⊗ (H²)ᵀ)`.
pub fn phase_noise_liouvillian(h: &CMat, gamma_p: f64) -> CMat {
    let d = h.nrows();
    let n = d * d;
    let mut out = CMat::zeros(n, n);
    if gamma_p == 0.0 {
        return out;
    }
    let h2 = h * h;
    let g = C64::new(-gamma_p, 0.0);
    for a in 0..d {
        for b in 0..d {
            let row = a * d + b;
            for k in 0..d {
                out[(row, k * d + b)] += g * h2[(a, k)];
                for l in 0..d {
                    out[(row, k * d + l)] -= g * C64::new(2.0, 0.0) * h[(a, k)] * h[(l, b)];
                }
            }
            for l in 0..d {
                out[(row, a * d + l)] += g * h2[(l, b)];
            }
        }
    }
    out
}
