// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Arnoldi evaluation of `f_m(𝓛, t) b` with
//! `f_m(z, t) = Σ_k z^k t^{k+m}/(k+m)! = ∫₀^t e^{z(t−τ)} τ^{m−1}/(m−1)! dτ`.

use nalgebra::DVector;

use crate::ops::{expm, real};
use crate::{CMat, Error, Result, C64};

/// Above this `‖H‖₁ t` the Taylor form is replaced by an augmented
/// exponential.
const TAYLOR_LIMIT: f64 = 4.0;

/// `f_m(H, t) e₁` for a small matrix `H`.
fn phi_small(h: &CMat, m: usize, t: f64) -> Result<DVector<C64>> {
    let k = h.nrows();
    let norm = (0..k)
        .map(|j| h.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if norm * t <= TAYLOR_LIMIT {
        let mut p = DVector::<C64>::zeros(k);
        p[0] = real(1.0);
        let mut coef = (1..=m).fold(1.0, |acc, i| acc * t / i as f64);
        let mut acc = &p * real(coef);
        for j in 1..200 {
            p = h * p;
            coef *= t / (j + m) as f64;
            let term = &p * real(coef);
            acc += &term;
            if term.norm() <= 1e-17 * acc.norm() && j > 2 {
                return Ok(acc);
            }
        }
        return Ok(acc);
    }
    if m == 0 {
        let e = expm(&(h * real(t)))?;
        return Ok(e.column(0).into_owned());
    }
    // z' = A z, z = [y; p], p_j = τ^{m−1−j}/(m−1−j)!
    let n = k + m;
    let mut a = CMat::zeros(n, n);
    a.view_mut((0, 0), (k, k)).copy_from(&(h * real(t)));
    a[(0, k)] = real(t);
    for j in 0..m - 1 {
        a[(k + j, k + j + 1)] = real(t);
    }
    let e = expm(&a)?;
    Ok(e.view((0, n - 1), (k, 1)).column(0).into_owned())
}

/// `f_m(𝓛, t) b` at every requested `t` through one `K`-dimensional
/// Arnoldi space. A lucky breakdown shrinks the space.
pub fn phi_krylov(l: &CMat, b: &DVector<C64>, m: usize, times: &[f64], k: usize) -> Result<Vec<DVector<C64>>> {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return Ok(vec![DVector::zeros(n); times.len()]);
    }
    let kmax = k.min(n).max(1);
    let scale = l.norm().max(1.0);
    let mut basis: Vec<DVector<C64>> = vec![b / real(beta)];
    let mut hess = CMat::zeros(kmax + 1, kmax);
    let mut dim = kmax;
    for j in 0..kmax {
        let mut w = l * &basis[j];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let hij = v.dotc(&w);
                hess[(i, j)] += hij;
                w -= v * hij;
            }
        }
        let h = w.norm();
        hess[(j + 1, j)] = real(h);
        if h <= 1e-14 * scale {
            dim = j + 1;
            break;
        }
        if j + 1 < kmax {
            basis.push(w / real(h));
        }
    }
    let hk = hess.view((0, 0), (dim, dim)).into_owned();
    times
        .iter()
        .map(|&t| {
            let y = phi_small(&hk, m, t)?;
            let mut out = DVector::<C64>::zeros(n);
            for (v, c) in basis.iter().take(dim).zip(y.iter()) {
                out += v * (c * beta);
            }
            if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::numerical("non-finite Krylov f-function value"));
            }
            Ok(out)
        })
        .collect()
}

/// Column-wise [`phi_krylov`].
pub(crate) fn phi_krylov_columns(l: &CMat, b: &CMat, m: usize, times: &[f64], k: usize) -> Result<Vec<CMat>> {
    let mut out = vec![CMat::zeros(b.nrows(), b.ncols()); times.len()];
    for c in 0..b.ncols() {
        let col = b.column(c).into_owned();
        let vals = phi_krylov(l, &col, m, times, k)?;
        for (o, v) in out.iter_mut().zip(vals) {
            o.set_column(c, &v);
        }
    }
    Ok(out)
}

/// `Σ_n f_{n+1}(𝓛, t) s_n`, the solution at `t` of
/// `x' = 𝓛x + Σ_n tⁿ/n! s_n`, `x(0) = 0`.
///
/// Lower orders are folded into a polynomial via `u_{n+1} = 𝓛u_n + s_n`,
/// leaving a single `f_N` application in a `K`-dimensional Krylov space.
pub fn fm_apply(l: &CMat, t: f64, coeffs: &[DVector<C64>], k: usize) -> Result<DVector<C64>> {
    let n = l.nrows();
    if coeffs.is_empty() {
        return Ok(DVector::zeros(n));
    }
    let mut u = DVector::<C64>::zeros(n);
    let mut poly = DVector::<C64>::zeros(n);
    let mut w = 1.0;
    for (q, s) in coeffs.iter().enumerate() {
        if q > 0 {
            w *= t / q as f64;
        }
        poly += &u * real(w);
        u = l * &u + s;
    }
    let tail = phi_krylov(l, &u, coeffs.len(), &[t], k)?;
    Ok(poly + &tail[0])
}
