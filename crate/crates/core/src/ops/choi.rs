// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::{operator_dim, SuperOperator};
use crate::{CMat, Error, Result, C64};

/// Outcome of a complete-positivity and trace-preservation check.
#[derive(Clone, Debug, PartialEq)]
pub struct CptpReport {
    /// `max_X |tr Λ(X) − tr X|` over the matrix units `|k⟩⟨l|`.
    pub trace_residual: f64,
    /// Smallest eigenvalue of the Hermitized Choi matrix.
    pub min_choi_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
}

impl CptpReport {
    pub fn passed(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

/// Choi matrix `C[(k,a),(l,b)] = Λ(|k⟩⟨l|)_{ab}`.
pub fn choi_matrix(lambda: &CMat) -> Result<CMat> {
    if !lambda.is_square() {
        return Err(Error::shape(format!(
            "map must be square, got {}x{}",
            lambda.nrows(),
            lambda.ncols()
        )));
    }
    let d = operator_dim(lambda.nrows())
        .ok_or_else(|| Error::shape(format!("size {} is not d²", lambda.nrows())))?;
    let mut c = CMat::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            let col = k * d + l;
            for a in 0..d {
                for b in 0..d {
                    c[(k * d + a, l * d + b)] = lambda[(a * d + b, col)];
                }
            }
        }
    }
    Ok(c)
}

/// Checks a map against `tol_tp` (trace residual upper bound) and
/// `tol_cp` (allowed magnitude of negative Choi eigenvalues).
pub fn choi_cptp_check(lambda: &SuperOperator, tol_tp: f64, tol_cp: f64) -> Result<CptpReport> {
    let m = lambda.matrix();
    let d = lambda.dim();
    let mut trace_residual = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            let col = k * d + l;
            let tr: C64 = (0..d).map(|a| m[(a * d + a, col)]).sum();
            let want = if k == l { 1.0 } else { 0.0 };
            trace_residual = trace_residual.max((tr - want).norm());
        }
    }
    let c = choi_matrix(m)?;
    let herm = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    let min_choi_eigenvalue = herm
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(CptpReport {
        trace_residual,
        min_choi_eigenvalue,
        trace_preserving: trace_residual <= tol_tp,
        completely_positive: min_choi_eigenvalue >= -tol_cp.abs(),
    })
}
