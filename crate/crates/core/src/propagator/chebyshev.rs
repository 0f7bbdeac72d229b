// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Chebyshev–Gauss sampling of one time step `[0, Δt]` and conversion of
//! the interpolant to scaled monomials `Σ sⁿ/n! c_n`.

use crate::ops::real;
use crate::CMat;

#[derive(Clone, Debug)]
pub struct ChebyshevGrid {
    m: usize,
    dt: f64,
    /// Local sample times `s_m = Δt/2 (1 − cos((2m+1)π/2M))`, ascending.
    points: Vec<f64>,
    /// `to_monomial[n][m]`: weight of sample `m` in coefficient `c_n`.
    to_monomial: Vec<Vec<f64>>,
    /// `∫ ℓ_m(s)(1 − s/Δt) ds` and `∫ ℓ_m(s)(s/Δt) ds`.
    hat_weights: (Vec<f64>, Vec<f64>),
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Power-basis coefficients of `T_0..T_{m−1}` in `x`.
fn chebyshev_power_coeffs(m: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; m.max(2)]; m.max(2)];
    t[0][0] = 1.0;
    t[1][1] = 1.0;
    for n in 2..m {
        for p in 0..m {
            let prev = if p > 0 { 2.0 * t[n - 1][p - 1] } else { 0.0 };
            t[n][p] = prev - t[n - 2][p];
        }
    }
    t.truncate(m);
    for row in &mut t {
        row.truncate(m);
    }
    t
}

/// `∫_{−1}^{1} T_n(x) dx`.
fn chebyshev_integral(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (n * n) as f64)
    }
}

/// `∫_{−1}^{1} x T_n(x) dx`.
fn chebyshev_x_integral(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        0.5 * (chebyshev_integral(n + 1) + chebyshev_integral(n - 1))
    }
}

impl ChebyshevGrid {
    pub fn new(m: usize, dt: f64) -> Self {
        assert!(m >= 2, "at least two Chebyshev points");
        let angle = |n: usize, k: usize| (n * (2 * k + 1)) as f64 * std::f64::consts::PI / (2 * m) as f64;
        let points: Vec<f64> = (0..m).map(|k| 0.5 * dt * (1.0 - angle(1, k).cos())).collect();

        // b_n = (2 − δ_n0)/M Σ_k f_k T_n(x_k), x = 1 − 2s/Δt
        let cheb: Vec<Vec<f64>> = (0..m)
            .map(|n| {
                let scale = if n == 0 { 1.0 } else { 2.0 } / m as f64;
                (0..m).map(|k| scale * angle(n, k).cos()).collect()
            })
            .collect();

        // T_n(1 − αs) in powers of s, α = 2/Δt
        let tp = chebyshev_power_coeffs(m);
        let alpha = 2.0 / dt;
        let mut tn_in_s = vec![vec![0.0; m]; m];
        for n in 0..m {
            for p in 0..m {
                if tp[n][p] == 0.0 {
                    continue;
                }
                for q in 0..=p {
                    tn_in_s[n][q] += tp[n][p] * binomial(p, q) * (-alpha).powi(q as i32);
                }
            }
        }
        let mut fact = 1.0;
        let mut to_monomial = vec![vec![0.0; m]; m];
        for q in 0..m {
            if q > 0 {
                fact *= q as f64;
            }
            for k in 0..m {
                to_monomial[q][k] = fact * (0..m).map(|n| tn_in_s[n][q] * cheb[n][k]).sum::<f64>();
            }
        }

        // ds = (Δt/2) dx; 1 − s/Δt = (1 + x)/2, s/Δt = (1 − x)/2
        let mut left = vec![0.0; m];
        let mut right = vec![0.0; m];
        for k in 0..m {
            for n in 0..m {
                let i0 = chebyshev_integral(n);
                let i1 = chebyshev_x_integral(n);
                left[k] += cheb[n][k] * 0.25 * dt * (i0 + i1);
                right[k] += cheb[n][k] * 0.25 * dt * (i0 - i1);
            }
        }

        Self {
            m,
            dt,
            points,
            to_monomial,
            hat_weights: (left, right),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Quadrature weights for `∫₀^Δt g(s)(1 − s/Δt) ds` and
    /// `∫₀^Δt g(s)(s/Δt) ds` from samples at the grid points.
    pub fn hat_weights(&self) -> (&[f64], &[f64]) {
        (&self.hat_weights.0, &self.hat_weights.1)
    }

    /// Scaled monomial coefficients of the interpolant through `values`.
    pub fn to_monomial(&self, values: &[CMat]) -> Vec<CMat> {
        assert_eq!(values.len(), self.m);
        (0..self.m)
            .map(|q| {
                let mut acc = CMat::zeros(values[0].nrows(), values[0].ncols());
                for (w, v) in self.to_monomial[q].iter().zip(values) {
                    if *w != 0.0 {
                        acc += v * real(*w);
                    }
                }
                acc
            })
            .collect()
    }

    /// `Σ_q sᵠ/q! c_q`.
    pub fn eval_monomial(coeffs: &[CMat], s: f64) -> CMat {
        let mut acc = CMat::zeros(coeffs[0].nrows(), coeffs[0].ncols());
        let mut w = 1.0;
        for (q, c) in coeffs.iter().enumerate() {
            if q > 0 {
                w *= s / q as f64;
            }
            acc += c * real(w);
        }
        acc
    }

    /// Weights extrapolating data at `points ∪ {Δt}` of one step to the
    /// points of the next step: `out[i][j]` multiplies node `j`.
    pub fn extrapolation_weights(&self) -> Vec<Vec<f64>> {
        let mut nodes = self.points.clone();
        nodes.push(self.dt);
        self.points
            .iter()
            .map(|s| {
                let x = self.dt + s;
                (0..nodes.len())
                    .map(|j| {
                        nodes
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != j)
                            .map(|(_, xi)| (x - xi) / (nodes[j] - xi))
                            .product()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Scaled monomial coefficients `s_n` of a source sampled at the grid
/// points.
pub fn chebyshev_sample_source(grid: &ChebyshevGrid, values: &[CMat]) -> Vec<CMat> {
    grid.to_monomial(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> CMat {
        CMat::from_element(1, 1, real(v))
    }

    #[test]
    fn constant_source() {
        let g = ChebyshevGrid::new(7, 0.1);
        let c = chebyshev_sample_source(&g, &vec![scalar(2.5); 7]);
        assert!((c[0][(0, 0)].re - 2.5).abs() < 1e-13);
        for q in 1..7 {
            assert!(c[q][(0, 0)].norm() < 1e-9 * 10f64.powi(q as i32));
        }
    }

    #[test]
    fn linear_source_has_two_coefficients() {
        let g = ChebyshevGrid::new(5, 0.2);
        let vals: Vec<CMat> = g.points().iter().map(|s| scalar(1.0 + 3.0 * s)).collect();
        let c = g.to_monomial(&vals);
        assert!((c[0][(0, 0)].re - 1.0).abs() < 1e-13);
        assert!((c[1][(0, 0)].re - 3.0).abs() < 1e-11);
        for q in 2..5 {
            // scaled so that the term at s = Δt stays below roundoff
            let contrib = c[q][(0, 0)].norm() * 0.2f64.powi(q as i32);
            assert!(contrib < 1e-12, "q={q} {contrib:e}");
        }
    }

    #[test]
    fn reproduces_polynomials_of_degree_below_m() {
        let m = 7;
        let dt = 0.1;
        let g = ChebyshevGrid::new(m, dt);
        let poly = |s: f64| 0.3 - 2.0 * s + 5.0 * s * s - 40.0 * s.powi(3) + 100.0 * s.powi(6);
        let vals: Vec<CMat> = g.points().iter().map(|&s| scalar(poly(s))).collect();
        let c = g.to_monomial(&vals);
        for i in 0..=20 {
            let s = dt * i as f64 / 20.0;
            let got = ChebyshevGrid::eval_monomial(&c, s)[(0, 0)].re;
            assert!((got - poly(s)).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn hat_weights_integrate_exactly() {
        let dt = 0.3;
        let g = ChebyshevGrid::new(6, dt);
        let (l, r) = g.hat_weights();
        // g(s) = s²: ∫ s²(1 − s/Δt) = Δt³/12, ∫ s²·s/Δt = Δt³/4
        let il: f64 = g.points().iter().zip(l).map(|(s, w)| s * s * w).sum();
        let ir: f64 = g.points().iter().zip(r).map(|(s, w)| s * s * w).sum();
        assert!((il - dt.powi(3) / 12.0).abs() < 1e-15);
        assert!((ir - dt.powi(3) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_is_exact_for_low_degree() {
        let g = ChebyshevGrid::new(4, 0.1);
        let w = g.extrapolation_weights();
        let f = |s: f64| 1.0 + s - 7.0 * s.powi(3);
        let mut nodes: Vec<f64> = g.points().to_vec();
        nodes.push(0.1);
        for (i, s) in g.points().iter().enumerate() {
            let got: f64 = w[i].iter().zip(&nodes).map(|(wi, x)| wi * f(*x)).sum();
            assert!((got - f(0.1 + s)).abs() < 1e-12);
        }
    }
}
