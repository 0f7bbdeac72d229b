// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::Operator;
use crate::{CMat, Error, Result, C64};

/// Generalized Gell-Mann matrices for `su(d)`.
///
/// Ordered level by level: for each `k = 1..d` the symmetric and
/// antisymmetric pairs `(j, k)` with `j < k`, then the diagonal element
/// that introduces level `k`. For `d = 3` this is the usual `G1..G8`, and
/// for `d = 2` the Pauli matrices.
pub fn gellmann_basis(d: usize) -> Result<Vec<Operator>> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "Gell-Mann basis needs d >= 2, got {d}"
        )));
    }
    let mut out = Vec::with_capacity(d * d - 1);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    for k in 1..d {
        for j in 0..k {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = one;
            sym[(k, j)] = one;
            out.push(Operator::hermitian(sym)?);

            let mut asym = CMat::zeros(d, d);
            asym[(j, k)] = -i;
            asym[(k, j)] = i;
            out.push(Operator::hermitian(asym)?);
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(k) {
            *v = norm;
        }
        diag[k] = -(k as f64) * norm;
        out.push(Operator::from_real_diagonal(&diag));
    }
    Ok(out)
}
