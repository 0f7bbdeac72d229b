// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::chebyshev::ChebyshevGrid;
use super::krylov::phi_krylov_columns;
use super::PropagatorConfig;
use crate::ops::{max_abs, max_abs_diff};
use crate::{CMat, Error, Result};

/// Result of one semi-global step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    /// `Λ(Δt)`.
    pub end: CMat,
    /// `Λ(s_m)` at the Chebyshev points.
    pub points: Vec<CMat>,
    pub iterations: usize,
    /// Max-abs change in the final fixed-point sweep.
    pub residual: f64,
}

/// Solves `Λ' = (𝓛₀ + 𝓛_t(s)) Λ` over one step by fixed-point iteration on
/// the inhomogeneous form `Λ' = 𝓛₀Λ + 𝓛_t(s)Λ(s)`.
///
/// `lt[m]` is `𝓛(s_m) − 𝓛₀` at the grid points; `guess` supplies `Λ(s_m)`
/// for the first sweep (defaults to `Λ_in` everywhere). Acts column-wise,
/// so `lambda_in` may have any number of columns.
pub fn semi_global_step(
    l0: &CMat,
    lt: &[CMat],
    lambda_in: &CMat,
    guess: Option<Vec<CMat>>,
    grid: &ChebyshevGrid,
    cfg: &PropagatorConfig,
) -> Result<StepOutput> {
    let m = grid.m();
    let mut times: Vec<f64> = grid.points().to_vec();
    times.push(grid.dt());
    let homogeneous = lt.iter().all(|l| max_abs(l) == 0.0);

    let mut points = guess.unwrap_or_else(|| vec![lambda_in.clone(); m]);
    let mut end = lambda_in.clone();
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_inner_iters {
        let sources: Vec<CMat> = lt.iter().zip(&points).map(|(l, p)| l * p).collect();
        let coeffs = grid.to_monomial(&sources);

        let mut v = Vec::with_capacity(m + 1);
        v.push(lambda_in.clone());
        for c in &coeffs {
            let next = l0 * v.last().expect("non-empty") + c;
            v.push(next);
        }
        let tail = phi_krylov_columns(l0, &v[m], m, &times, cfg.k)?;

        let mut new_vals: Vec<CMat> = times
            .iter()
            .zip(tail)
            .map(|(&s, r)| ChebyshevGrid::eval_monomial(&v[..m], s) + r)
            .collect();
        let new_end = new_vals.pop().expect("endpoint");
        residual = points
            .iter()
            .zip(&new_vals)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(max_abs_diff(&end, &new_end), f64::max);
        if !residual.is_finite() {
            return Err(Error::numerical("semi-global iteration diverged"));
        }
        points = new_vals;
        end = new_end;
        if homogeneous || (iter > 1 && residual <= cfg.inner_tol) {
            return Ok(StepOutput {
                end,
                points,
                iterations: iter,
                residual: if homogeneous { 0.0 } else { residual },
            });
        }
    }
    Err(Error::Step {
        time: f64::NAN,
        reason: format!(
            "fixed-point iteration did not reach {:.1e} in {} sweeps (last change {residual:.3e}); reduce dt",
            cfg.inner_tol, cfg.max_inner_iters
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{expm, real};
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn homogeneous_step_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l0 = CMat::from_fn(9, 9, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let grid = ChebyshevGrid::new(7, 0.1);
        let cfg = PropagatorConfig::default();
        let lt = vec![CMat::zeros(9, 9); 7];
        let id = CMat::identity(9, 9);
        let out = semi_global_step(&l0, &lt, &id, None, &grid, &cfg).unwrap();
        let want = expm(&(&l0 * real(0.1))).unwrap();
        assert!(max_abs_diff(&out.end, &want) < 1e-12);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn scalar_time_dependent_problem() {
        // x' = (a + b s) x has x(s) = exp(a s + b s²/2)
        let (a, b) = (C64::new(-0.3, 1.1), C64::new(0.0, 2.0));
        let dt = 0.1;
        let grid = ChebyshevGrid::new(7, dt);
        let l0 = CMat::from_element(1, 1, a + b * (dt / 2.0));
        let lt: Vec<CMat> = grid
            .points()
            .iter()
            .map(|s| CMat::from_element(1, 1, b * (s - dt / 2.0)))
            .collect();
        let cfg = PropagatorConfig { k: 1, ..PropagatorConfig::default() };
        let x0 = CMat::from_element(1, 1, real(1.0));
        let out = semi_global_step(&l0, &lt, &x0, None, &grid, &cfg).unwrap();
        let want = (a * dt + b * dt * dt / 2.0).exp();
        assert!((out.end[(0, 0)] - want).norm() < 1e-12);
        for (p, s) in out.points.iter().zip(grid.points()) {
            let w = (a * *s + b * s * s / 2.0).exp();
            let e = (p[(0, 0)] - w).norm();
            assert!(e < 1e-12, "s={s} err {e:e}");
        }
    }

    #[test]
    fn non_convergence_is_a_step_error() {
        let grid = ChebyshevGrid::new(3, 5.0);
        let l0 = CMat::zeros(1, 1);
        let lt: Vec<CMat> = grid
            .points()
            .iter()
            .map(|s| CMat::from_element(1, 1, real(40.0 * (s - 2.5))))
            .collect();
        let cfg = PropagatorConfig { k: 1, max_inner_iters: 5, ..PropagatorConfig::default() };
        let err = semi_global_step(&l0, &lt, &CMat::identity(1, 1), None, &grid, &cfg).unwrap_err();
        assert!(matches!(err, Error::Step { .. }));
    }
}
