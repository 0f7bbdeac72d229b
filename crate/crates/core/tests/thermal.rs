// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{guess, max_abs_diff, qutrit};
use proptest::prelude::*;
use thermogate::models::{ControlField, Shape};
use thermogate::ops::{hamiltonian_liouvillian, Operator};
use thermogate::thermal::{
    dissipator_from_frame, invariant_ode_oracle, jump_channels, jump_operator, propagate_invariants,
    thermal_rates, BathSpec, SpectralDensity,
};
use thermogate::{CMat, C64};

proptest! {
    #[test]
    fn detailed_balance(omega in -20.0..20.0f64, t in 0.05..50.0f64, gamma in 1e-6..1.0f64, flat in any::<bool>()) {
        let mut bath = BathSpec::new(gamma, t);
        if flat {
            bath.spectral_density = SpectralDensity::Flat;
        }
        let (up, down) = thermal_rates(omega, &bath).unwrap();
        let boltz = (-omega.abs() / t).exp();
        prop_assert!(up >= 0.0 && down > 0.0);
        prop_assert!((up / down - boltz).abs() <= 4.0 * f64::EPSILON * boltz.max(f64::MIN_POSITIVE));
    }
}

#[test]
fn completeness_and_eigen_relation_along_driven_run() {
    let m = qutrit(5e-4);
    let f = guess(&m, 20.0, 0.8, 3);
    let set = propagate_invariants(&m, &f).unwrap();
    assert!(set.completeness_defect() <= 1e-10);
    let mut worst = 0.0f64;
    for k in (0..f.n_times()).step_by(7) {
        let u = Operator::new(set.unitaries[k].clone()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let a0 = Operator::new(set.invariants[0][i].clone()).unwrap();
                let b0 = Operator::new(set.invariants[0][j].clone()).unwrap();
                let fij = jump_operator(&a0, &b0, &u).unwrap();
                let d = &set.invariants[k][i] - &set.invariants[k][j];
                let c = &d * fij.matrix() - fij.matrix() * &d + fij.matrix() * C64::new(2.0, 0.0);
                worst = worst.max(c.norm());
            }
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn frequencies_anchor_to_level_gaps() {
    let m = qutrit(0.0);
    let f = guess(&m, 10.0, 0.6, 9);
    let set = propagate_invariants(&m, &f).unwrap();
    let e = &m.level_energies;
    for ch in jump_channels(&set, &BathSpec::new(1e-3, 1.0)).unwrap() {
        assert!((ch.omega[0] - (e[ch.i] - e[ch.j])).abs() <= 1e-12);
    }
}

#[test]
fn gibbs_state_is_in_kernel_without_drive() {
    for t in [0.1, 1.0, 5.0] {
        let m = qutrit(0.0);
        let h = m.drift.matrix().clone();
        let bath = BathSpec::new(0.05, t).with_phase_noise(0.01);
        let l = hamiltonian_liouvillian(&h) + dissipator_from_frame(&CMat::identity(3, 3), &h, &bath);
        let w: Vec<f64> = m.level_energies.iter().map(|e| (-e / t).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut v = thermogate::ops::vectorize(&Operator::from_real_diagonal(&w.iter().map(|x| x / z).collect::<Vec<_>>()))
            .as_vector()
            .clone();
        v = &l * v;
        assert!(v.iter().all(|x| x.norm() <= 1e-10), "T={t}");
    }
}

#[test]
fn conjugation_matches_lie_algebra_oracle() {
    let m = qutrit(1e-3);
    for seed in [1, 2] {
        let f = ControlField::guess(&m, 6.0, 0.1, 0.9, seed, Shape::gaussian(6.0, 1e-4)).unwrap();
        let a = propagate_invariants(&m, &f).unwrap();
        let b = invariant_ode_oracle(&m, &f).unwrap();
        let worst = a
            .invariants
            .iter()
            .zip(&b.invariants)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| max_abs_diff(p, q)))
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }
}
