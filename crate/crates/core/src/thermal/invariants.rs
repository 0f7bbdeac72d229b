// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use super::{thermal_rates, BathSpec};
use crate::models::{ControlField, ModelSystem};
use crate::ops::{commutator, expm, hermiticity_defect, max_abs, max_abs_diff, real, Operator};
use crate::{CMat, Error, Result, C64};

/// Largest phase `h‖H‖` accumulated by one Magnus sub-step.
pub const MAGNUS_MAX_PHASE: f64 = 0.02;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Eigenvectors of `H(0)` as columns, ordered by maximal overlap with the
/// computational basis and phased so that the dominant entry is real
/// positive. A diagonal `H(0)` gives the identity.
pub fn initial_frame(model: &ModelSystem, field: &ControlField) -> Result<CMat> {
    let h0 = model.hamiltonian_at(field, 0.0);
    let d = h0.nrows();
    let mut off = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                off = off.max(h0[(i, j)].norm());
            }
        }
    }
    if off < 1e-14 {
        return Ok(CMat::identity(d, d));
    }
    let vecs = h0.symmetric_eigen().eigenvectors;
    let mut used = vec![false; d];
    let mut frame = CMat::zeros(d, d);
    for j in 0..d {
        let (best, _) = (0..d)
            .filter(|c| !used[*c])
            .map(|c| (c, vecs[(j, c)].norm()))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        used[best] = true;
        let z = vecs[(j, best)];
        let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { real(1.0) };
        frame.set_column(j, &(vecs.column(best) * phase));
    }
    Ok(frame)
}

/// Projectors `|w_j⟩⟨w_j|` onto the eigenvectors of `H(0)`.
pub fn initial_invariants(model: &ModelSystem, field: &ControlField) -> Result<Vec<Operator>> {
    let v = initial_frame(model, field)?;
    (0..v.ncols())
        .map(|j| {
            let c = v.column(j);
            Operator::hermitian(&c * c.adjoint())
        })
        .collect()
}

/// Closed-system propagator `U(t)` of the driven Hamiltonian.
///
/// Within a control step the step is split into equal Magnus-4 sub-steps;
/// `U` at an interior time is obtained by one partial sub-step from the
/// preceding sub-step boundary, so it is a fixed function of time.
pub struct UnitaryTrack<'a> {
    model: &'a ModelSystem,
    field: &'a ControlField,
    max_phase: f64,
}

impl<'a> UnitaryTrack<'a> {
    pub fn new(model: &'a ModelSystem, field: &'a ControlField) -> Self {
        Self {
            model,
            field,
            max_phase: MAGNUS_MAX_PHASE,
        }
    }

    pub fn with_max_phase(mut self, max_phase: f64) -> Self {
        self.max_phase = max_phase;
        self
    }

    fn substeps(&self, k: usize) -> usize {
        let dt = self.field.dt;
        let h = self.model.hamiltonian_at(self.field, self.field.time(k) + 0.5 * dt);
        let d = h.nrows();
        let shift = h.trace() / C64::new(d as f64, 0.0);
        let traceless = h - CMat::identity(d, d) * shift;
        ((dt * traceless.norm() / self.max_phase).ceil() as usize).max(1)
    }

    fn magnus4(&self, t0: f64, h: f64) -> Result<CMat> {
        let mi = C64::new(0.0, -1.0);
        let c1 = 0.5 - SQRT3 / 6.0;
        let c2 = 0.5 + SQRT3 / 6.0;
        let a1 = self.model.hamiltonian_at(self.field, t0 + c1 * h) * mi;
        let a2 = self.model.hamiltonian_at(self.field, t0 + c2 * h) * mi;
        let omega = (&a1 + &a2) * real(0.5 * h) + commutator(&a2, &a1) * real(SQRT3 / 12.0 * h * h);
        expm(&omega)
    }

    /// `U(t_k + s)` for ascending offsets `s ∈ [0, Δt]`, and `U(t_{k+1})`.
    pub fn step(&self, k: usize, u_k: &CMat, offsets: &[f64]) -> Result<(Vec<CMat>, CMat)> {
        let dt = self.field.dt;
        let t0 = self.field.time(k);
        let n = self.substeps(k);
        let h = dt / n as f64;
        let mut out = Vec::with_capacity(offsets.len());
        let mut u = u_k.clone();
        let mut next = 0;
        for j in 0..n {
            let start = j as f64 * h;
            let end = if j + 1 == n { dt } else { start + h };
            while next < offsets.len() && (offsets[next] < end || (j + 1 == n && offsets[next] <= end)) {
                let s = offsets[next];
                if s < start - 1e-15 {
                    return Err(Error::validation("offsets must be ascending"));
                }
                let partial = s - start;
                out.push(if partial <= 0.0 {
                    u.clone()
                } else {
                    self.magnus4(t0 + start, partial)? * &u
                });
                next += 1;
            }
            u = self.magnus4(t0 + start, end - start)? * u;
        }
        if next != offsets.len() {
            return Err(Error::validation("offsets must lie within the step"));
        }
        Ok((out, u))
    }
}

/// Invariants `A_j(t) = U(t) A_j(0) U†(t)` on the control grid.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub times: Vec<f64>,
    /// `invariants[k][j]`.
    pub invariants: Vec<Vec<CMat>>,
    /// `H(t_k)`.
    pub hamiltonians: Vec<CMat>,
    /// Columns are the eigenvectors of `H(0)`.
    pub frame: CMat,
    /// `U(t_k)`; empty when built by the coefficient oracle.
    pub unitaries: Vec<CMat>,
}

impl InvariantSet {
    /// Instantaneous eigenbasis `W(t_k) = U(t_k) V`.
    pub fn dressed_frame(&self, k: usize) -> Result<CMat> {
        let u = self.unitaries.get(k).ok_or_else(|| {
            Error::validation(format!("no propagator stored for time index {k}"))
        })?;
        Ok(u * &self.frame)
    }

    /// Worst completeness and orthonormality defect over all times.
    pub fn completeness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for set in &self.invariants {
            let d = set.len();
            let mut sum = CMat::zeros(d, d);
            for (i, a) in set.iter().enumerate() {
                sum += a;
                for (j, b) in set.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let tr = crate::ops::trace_of_product(a, b);
                    worst = worst.max((tr - real(want)).norm());
                }
            }
            worst = worst.max(max_abs_diff(&sum, &CMat::identity(d, d)));
        }
        worst
    }
}

pub fn propagate_invariants(model: &ModelSystem, field: &ControlField) -> Result<InvariantSet> {
    let frame = initial_frame(model, field)?;
    let d = model.dim();
    let track = UnitaryTrack::new(model, field);
    let mut u = CMat::identity(d, d);
    let mut set = InvariantSet {
        times: Vec::with_capacity(field.n_times()),
        invariants: Vec::with_capacity(field.n_times()),
        hamiltonians: Vec::with_capacity(field.n_times()),
        frame,
        unitaries: Vec::with_capacity(field.n_times()),
    };
    for k in 0..field.n_times() {
        if k > 0 {
            u = track.step(k - 1, &u, &[])?.1;
        }
        let w = &u * &set.frame;
        set.invariants.push(projectors(&w));
        set.times.push(field.time(k));
        set.hamiltonians.push(model.hamiltonian_at(field, field.time(k)));
        set.unitaries.push(u.clone());
    }
    Ok(set)
}

pub(crate) fn projectors(w: &CMat) -> Vec<CMat> {
    (0..w.ncols())
        .map(|j| {
            let c = w.column(j);
            &c * c.adjoint()
        })
        .collect()
}

/// Unit vector spanning a rank-one projector, phased so that its largest
/// component is real positive.
fn projector_vector(a: &CMat) -> Result<nalgebra::DVector<C64>> {
    let sq = a * a;
    if hermiticity_defect(a) > 1e-10 || max_abs_diff(&sq, a) > 1e-10 || (a.trace() - real(1.0)).norm() > 1e-10 {
        return Err(Error::validation("invariant is not a rank-one Hermitian projector"));
    }
    let col = (0..a.ncols())
        .max_by(|&x, &y| a.column(x).norm().total_cmp(&a.column(y).norm()))
        .unwrap_or(0);
    let mut v = a.column(col).into_owned();
    v /= real(v.norm());
    let big = v.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or(real(1.0));
    v *= big.conj() / big.norm();
    Ok(v)
}

/// `F_ij(t) = U(t)|j⟩⟨i|U†(t)`, the transition taking population from
/// level `i` to level `j`, where `|i⟩`, `|j⟩` span the initial
/// invariants `A_i`, `A_j`. Unit Hilbert–Schmidt norm.
pub fn jump_operator(a_i: &Operator, a_j: &Operator, u_t: &Operator) -> Result<Operator> {
    let vi = projector_vector(a_i.matrix())?;
    let vj = projector_vector(a_j.matrix())?;
    if max_abs(&(a_i.matrix() * a_j.matrix())) > 1e-10 {
        return Err(Error::validation("invariants are not orthogonal"));
    }
    let u = u_t.matrix();
    let f = (u * vj) * (u * vi).adjoint();
    Operator::new(f)
}

/// `Re Tr{F†[H, F]} / Tr{F†F}`.
///
/// For `F = |b⟩⟨a|` between eigenstates of a static `H` this is
/// `ε_b − ε_a`; the channel frequency `ω_ij` is its negative.
pub fn bohr_frequency(h_t: &Operator, f_t: &Operator) -> Result<f64> {
    bohr_frequency_mat(h_t.matrix(), f_t.matrix())
}

pub(crate) fn bohr_frequency_mat(h: &CMat, f: &CMat) -> Result<f64> {
    let norm = f.norm_squared();
    if !(norm > 1e-300) {
        return Err(Error::numerical("bohr frequency of a zero-norm operator"));
    }
    let c = commutator(h, f);
    let num: C64 = f.iter().zip(c.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok(num.re / norm)
}

/// Jump channel data for one ordered level pair on the control grid.
#[derive(Clone, Debug)]
pub struct JumpChannel {
    pub i: usize,
    pub j: usize,
    pub operators: Vec<CMat>,
    /// `ω_ij(t_k)`, with `ω_ij(0) = ε_i − ε_j`.
    pub omega: Vec<f64>,
    /// `φ_ij(t_k) = ∫₀^t ω_ij`, trapezoidal.
    pub phase: Vec<f64>,
    pub rate_up: Vec<f64>,
    pub rate_down: Vec<f64>,
}

/// All `d(d − 1)` ordered channels, pairs in lexicographic order.
pub fn jump_channels(set: &InvariantSet, bath: &BathSpec) -> Result<Vec<JumpChannel>> {
    let d = set.frame.nrows();
    let frames = (0..set.times.len())
        .map(|k| set.dressed_frame(k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(d * (d - 1));
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let mut ch = JumpChannel {
                i,
                j,
                operators: Vec::with_capacity(frames.len()),
                omega: Vec::with_capacity(frames.len()),
                phase: Vec::with_capacity(frames.len()),
                rate_up: Vec::with_capacity(frames.len()),
                rate_down: Vec::with_capacity(frames.len()),
            };
            for (k, w) in frames.iter().enumerate() {
                let f = w.column(j) * w.column(i).adjoint();
                let omega = -bohr_frequency_mat(&set.hamiltonians[k], &f)?;
                let (up, down) = thermal_rates(omega, bath)?;
                let phase = match k {
                    0 => 0.0,
                    _ => {
                        let dt = set.times[k] - set.times[k - 1];
                        ch.phase[k - 1] + 0.5 * dt * (ch.omega[k - 1] + omega)
                    }
                };
                ch.operators.push(f);
                ch.omega.push(omega);
                ch.phase.push(phase);
                ch.rate_up.push(up);
                ch.rate_down.push(down);
            }
            out.push(ch);
        }
    }
    Ok(out)
}
