// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Invariants from the Lie-algebra coefficient equation
//! `dc_k/dt = −i Σ_{l,n} C^k_{ln} h_l(t) c_n`, integrated with classical
//! RK4. Used to cross-check the conjugation construction.

use super::invariants::{initial_frame, projectors, InvariantSet};
use crate::models::{ControlField, ModelSystem};
use crate::ops::{commutator, gellmann_basis, trace_of_product};
use crate::{CMat, Error, Result, C64};

/// Target RK4 step.
const RK4_STEP: f64 = 0.005;

/// `{I} ∪ Gell-Mann` as raw matrices, with `Tr(B_k²)`.
fn algebra_basis(d: usize) -> Result<(Vec<CMat>, Vec<f64>)> {
    let mut basis = vec![CMat::identity(d, d)];
    basis.extend(gellmann_basis(d)?.into_iter().map(|g| g.into_matrix()));
    let norms = basis.iter().map(|b| trace_of_product(b, b).re).collect();
    Ok((basis, norms))
}

/// `C[k][i][j]` with `[B_i, B_j] = Σ_k C^k_{ij} B_k`.
pub fn structure_constants(d: usize) -> Result<Vec<Vec<Vec<C64>>>> {
    let (basis, norms) = algebra_basis(d)?;
    let n = basis.len();
    let mut c = vec![vec![vec![C64::new(0.0, 0.0); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let comm = commutator(&basis[i], &basis[j]);
            for k in 0..n {
                c[k][i][j] = trace_of_product(&basis[k], &comm) / norms[k];
            }
        }
    }
    Ok(c)
}

fn expand(x: &CMat, basis: &[CMat], norms: &[f64]) -> Result<Vec<C64>> {
    let coeffs: Vec<C64> = basis
        .iter()
        .zip(norms)
        .map(|(b, n)| trace_of_product(b, x) / n)
        .collect();
    let mut back = CMat::zeros(x.nrows(), x.ncols());
    for (b, c) in basis.iter().zip(&coeffs) {
        back += b * *c;
    }
    let resid = (&back - x).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if resid > 1e-12 * x.norm().max(1.0) {
        return Err(Error::numerical(format!(
            "operator lies outside the basis span (residual {resid:.3e})"
        )));
    }
    Ok(coeffs)
}

pub fn invariant_ode_oracle(model: &ModelSystem, field: &ControlField) -> Result<InvariantSet> {
    let d = model.dim();
    let (basis, norms) = algebra_basis(d)?;
    let consts = structure_constants(d)?;
    let n = basis.len();

    // generator matrix M_kn(t) = −i Σ_l C^k_ln h_l(t)
    let generator = |t: f64| -> Result<Vec<C64>> {
        let h = expand(&model.hamiltonian_at(field, t), &basis, &norms)?;
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        let mi = C64::new(0.0, -1.0);
        for k in 0..n {
            for (l, hl) in h.iter().enumerate() {
                if hl.norm() == 0.0 {
                    continue;
                }
                for nn in 0..n {
                    m[k * n + nn] += mi * consts[k][l][nn] * hl;
                }
            }
        }
        Ok(m)
    };
    let apply = |m: &[C64], c: &[Vec<C64>]| -> Vec<Vec<C64>> {
        c.iter()
            .map(|v| {
                (0..n)
                    .map(|k| (0..n).map(|j| m[k * n + j] * v[j]).sum())
                    .collect()
            })
            .collect()
    };
    let axpy = |c: &[Vec<C64>], k: &[Vec<C64>], a: f64| -> Vec<Vec<C64>> {
        c.iter()
            .zip(k)
            .map(|(v, w)| v.iter().zip(w).map(|(x, y)| x + y * a).collect())
            .collect()
    };

    let frame = initial_frame(model, field)?;
    let mut coeffs: Vec<Vec<C64>> = projectors(&frame)
        .iter()
        .map(|a| expand(a, &basis, &norms))
        .collect::<Result<_>>()?;

    let rebuild = |c: &[Vec<C64>]| -> Vec<CMat> {
        c.iter()
            .map(|v| {
                let mut a = CMat::zeros(d, d);
                for (b, x) in basis.iter().zip(v) {
                    a += b * *x;
                }
                a
            })
            .collect()
    };

    let mut set = InvariantSet {
        times: vec![0.0],
        invariants: vec![rebuild(&coeffs)],
        hamiltonians: vec![model.hamiltonian_at(field, 0.0)],
        frame,
        unitaries: Vec::new(),
    };
    let sub = (field.dt / RK4_STEP).ceil().max(1.0) as usize;
    let h = field.dt / sub as f64;
    for k in 0..field.n_steps() {
        let t0 = field.time(k);
        for s in 0..sub {
            let t = t0 + s as f64 * h;
            let m0 = generator(t)?;
            let mh = generator(t + 0.5 * h)?;
            let m1 = generator(t + h)?;
            let k1 = apply(&m0, &coeffs);
            let k2 = apply(&mh, &axpy(&coeffs, &k1, 0.5 * h));
            let k3 = apply(&mh, &axpy(&coeffs, &k2, 0.5 * h));
            let k4 = apply(&m1, &axpy(&coeffs, &k3, h));
            for (c, ((a, b), (e, f))) in coeffs
                .iter_mut()
                .zip(k1.iter().zip(&k2).zip(k3.iter().zip(&k4)))
            {
                for q in 0..n {
                    c[q] += (a[q] + b[q] * 2.0 + e[q] * 2.0 + f[q]) * (h / 6.0);
                }
            }
        }
        let t1 = field.time(k + 1);
        set.times.push(t1);
        set.invariants.push(rebuild(&coeffs));
        set.hamiltonians.push(model.hamiltonian_at(field, t1));
    }
    Ok(set)
}
