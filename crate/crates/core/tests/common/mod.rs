// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use proptest::prelude::*;
use thermogate::models::{build_qubit_ancilla_model, CoefficientTable, ControlField, ModelSystem, Shape};
use thermogate::{CMat, C64};

pub fn qutrit(eps_uc: f64) -> ModelSystem {
    build_qubit_ancilla_model(1, 1.0, &CoefficientTable::ones(1), eps_uc).unwrap()
}

pub fn guess(m: &ModelSystem, tau: f64, amp: f64, seed: u64) -> ControlField {
    ControlField::guess(m, tau, 0.1, amp, seed, Shape::gaussian(tau, 1e-4)).unwrap()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_from(d: usize, v: &[f64]) -> CMat {
    let mut h = CMat::zeros(d, d);
    let mut it = v.iter().copied();
    for i in 0..d {
        h[(i, i)] = C64::new(it.next().unwrap(), 0.0);
        for j in i + 1..d {
            let z = C64::new(it.next().unwrap(), it.next().unwrap());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn complex_from(d: usize, v: &[f64]) -> CMat {
    CMat::from_fn(d, d, |i, j| C64::new(v[2 * (i * d + j)], v[2 * (i * d + j) + 1]))
}

/// Random Hermitian `d×d` with entries in `[-s, s]`.
pub fn hermitian(d: usize, s: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-s..s, d * d).prop_map(move |v| hermitian_from(d, &v))
}

pub fn complex(d: usize, s: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-s..s, 2 * d * d).prop_map(move |v| complex_from(d, &v))
}

/// `exp(−iH)` via the Hermitian eigendecomposition.
pub fn unitary_of(h: &CMat) -> CMat {
    let e = h.clone().symmetric_eigen();
    let phases = CMat::from_diagonal(&e.eigenvalues.map(|x| C64::new(0.0, -x).exp()));
    &e.eigenvectors * phases * e.eigenvectors.adjoint()
}
