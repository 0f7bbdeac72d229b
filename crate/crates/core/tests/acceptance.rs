// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line to stdout, bypassing the test
//! harness capture, then asserts.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use common::{max_abs_diff, qutrit, unitary_of};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermogate::diagnostics::{
    energy_change, energy_change_heisenberg, map_purity, purity_loss_rate, scan_grid, subspace_purity, EnergyForm,
    ScanConfig, ScanMode, SubspaceSelection,
};
use thermogate::models::{
    build_two_qubit_model, target_superoperator, ControlField, Gate, GateTarget, ModelSystem, Shape,
};
use thermogate::oct::{gradient, objective, optimize, OctConfig, OptimizeResult};
use thermogate::ops::{choi_cptp_check, hamiltonian_liouvillian, vectorize, Operator, SuperOperator};
use thermogate::propagator::{
    propagate_map, propagate_reference, Direction, PropagatorConfig, ReferenceScheme, Stepper,
};
use thermogate::thermal::{
    dissipator_from_frame, invariant_ode_oracle, jump_channels, jump_operator, propagate_invariants, thermal_rates,
    BathSpec, SpectralDensity,
};
use thermogate::{CMat, C64};

fn report(n: u32, pass: bool, detail: String) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

struct Optimized {
    model: ModelSystem,
    target: GateTarget,
    result: OptimizeResult,
    seconds: f64,
}

fn closed_hadamard(tau: f64) -> Optimized {
    let model = qutrit(5e-4);
    let target = target_superoperator(Gate::Hadamard, 3).unwrap();
    let shape = Shape::gaussian(tau, 1e-4);
    let guess = ControlField::guess(&model, tau, 0.1, 0.5, 1, shape).unwrap();
    let mut cfg = OctConfig::new(shape);
    cfg.max_iters = 5000;
    let start = Instant::now();
    let result = optimize(&model, &BathSpec::closed(), &target, &cfg, &PropagatorConfig::default(), &guess).unwrap();
    Optimized {
        model,
        target,
        result,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Closed-system Hadamard at the long gate time, shared by criteria 1 and 2.
fn hadamard_400() -> &'static Optimized {
    static CELL: OnceLock<Optimized> = OnceLock::new();
    CELL.get_or_init(|| closed_hadamard(400.0))
}

#[test]
fn criterion_1_propagator_accuracy() {
    let opt = hadamard_400();
    let field = &opt.result.best_field;
    let bath = BathSpec::new(1e-3, 5.0);
    let start = Instant::now();
    let sg = propagate_map(&opt.model, field, &bath, &PropagatorConfig::default(), Direction::Forward).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let reference = propagate_reference(&opt.model, field, &bath, field.dt / 100.0, ReferenceScheme::Magnus4).unwrap();
    let err = max_abs_diff(sg.final_map(), reference.final_map());
    report(
        1,
        err <= 1e-8 && seconds < 60.0,
        format!("max|Λ_sg − Λ_ref| = {err:.2e} (≤ 1e-8), semi-global {seconds:.2} s (< 60 s), τ = {}", field.tau()),
    );
}

#[test]
fn criterion_2_closed_hadamard() {
    let opt = hadamard_400();
    let iters = opt.result.records.len() - 1;
    let ifl = opt.result.best_infidelity;
    report(
        2,
        ifl <= 1e-4 && iters <= 5000,
        format!("IF = {ifl:.2e} (≤ 1e-4) after {iters} iterations, {:.1} s", opt.seconds),
    );
}

fn wide() -> PropagatorConfig {
    PropagatorConfig {
        m: 9,
        k: 9,
        ..PropagatorConfig::default()
    }
}

/// Closed-system C-iX, shared by criteria 3 and 8.
fn cix_20() -> &'static Optimized {
    static CELL: OnceLock<Optimized> = OnceLock::new();
    CELL.get_or_init(|| {
        // a_y = 0: with both coefficients of the conditional drive equal the
        // controllable algebra misses the C-iX generator.
        let model = build_two_qubit_model(1.0, 0.0, 1.0, 0.0).unwrap();
        let target = target_superoperator(Gate::Cix, 4).unwrap();
        let tau = 20.0;
        let shape = Shape::gaussian(tau, 1e-4);
        let guess = ControlField::guess(&model, tau, 0.1, 0.5, 1, shape).unwrap();
        let mut cfg = OctConfig::new(shape);
        cfg.max_iters = 5000;
        cfg.target_infidelity = 5e-5;
        let start = Instant::now();
        let result = optimize(&model, &BathSpec::closed(), &target, &cfg, &wide(), &guess).unwrap();
        Optimized {
            model,
            target,
            result,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn criterion_3_closed_cix() {
    let opt = cix_20();
    let r = &opt.result;
    let ifl = r.best_infidelity;
    report(
        3,
        ifl <= 1e-4,
        format!(
            "IF = {ifl:.2e} (≤ 1e-4; stretch ≤ 5e-5 {}) after {} iterations, {:.1} s",
            if ifl <= 5e-5 { "met" } else { "missed" },
            r.records.len() - 1,
            opt.seconds
        ),
    );
}

#[test]
fn criterion_4_cptp_suite() {
    let qutrit_model = qutrit(1e-3);
    let two_qubit = build_two_qubit_model(1.0, 0.0, 1.0, 0.0).unwrap();
    let cases = [(&qutrit_model, PropagatorConfig::default()), (&two_qubit, wide())];
    let (mut worst_tr, mut worst_eig, mut count) = (0.0f64, f64::INFINITY, 0usize);
    for (model, prop) in &cases {
        let field = ControlField::guess(model, 20.0, 0.1, 0.8, 7, Shape::gaussian(20.0, 1e-4)).unwrap();
        for g in [1e-3, 1e-2, 1e-1] {
            for t in [0.1, 1.0, 5.0] {
                let traj = propagate_map(model, &field, &BathSpec::new(g, t), prop, Direction::Forward).unwrap();
                for k in 0..traj.maps.len() {
                    let rep = choi_cptp_check(&traj.superop(k).unwrap(), 1e-10, 1e-8).unwrap();
                    worst_tr = worst_tr.max(rep.trace_residual);
                    worst_eig = worst_eig.min(rep.min_choi_eigenvalue);
                    count += 1;
                }
            }
        }
    }
    report(
        4,
        worst_tr <= 1e-10 && worst_eig >= -1e-8,
        format!("{count} maps over 3×3 (γ, T) × 2 models: max trace residual {worst_tr:.1e}, min Choi eigenvalue {worst_eig:.1e}"),
    );
}

fn gibbs(energies: &[f64], t: f64) -> Vec<f64> {
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-(e - e0) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

#[test]
fn criterion_5_thermodynamic_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_db = 0.0f64;
    for _ in 0..100 {
        let omega = rng.random_range(-20.0..20.0);
        let t = rng.random_range(0.05..50.0);
        let (up, down) = thermal_rates(omega, &BathSpec::new(0.1, t)).unwrap();
        let boltz = (-f64::abs(omega) / t).exp();
        worst_db = worst_db.max(((up / down) - boltz).abs() / boltz);
    }
    let db_ok = worst_db <= 4.0 * f64::EPSILON;

    let m = qutrit(0.0);
    let h = m.drift.matrix().clone();
    let mut worst_kernel = 0.0f64;
    for t in [0.1, 1.0, 5.0] {
        let bath = BathSpec::new(0.05, t);
        let l = hamiltonian_liouvillian(&h) + dissipator_from_frame(&CMat::identity(3, 3), &h, &bath);
        let rho = Operator::from_real_diagonal(&gibbs(&m.level_energies, t));
        let r = &l * vectorize(&rho).as_vector();
        worst_kernel = worst_kernel.max(r.iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    let kernel_ok = worst_kernel <= 1e-10;

    let t = 1.0;
    let field = ControlField::zeros(2, 0.1, 4001, Shape::gaussian(400.0, 1e-4));
    let traj = propagate_map(&m, &field, &BathSpec::new(0.05, t), &PropagatorConfig::default(), Direction::Forward)
        .unwrap();
    let mut rho0 = CMat::zeros(3, 3);
    rho0[(0, 0)] = C64::new(0.6, 0.0);
    rho0[(1, 1)] = C64::new(0.4, 0.0);
    rho0[(0, 1)] = C64::new(0.3, 0.2);
    rho0[(1, 0)] = C64::new(0.3, -0.2);
    let out = traj.superop(traj.maps.len() - 1).unwrap().apply(&Operator::new(rho0).unwrap()).unwrap();
    let want = Operator::from_real_diagonal(&gibbs(&m.level_energies, t));
    let relax = max_abs_diff(out.matrix(), want.matrix());
    let relax_ok = relax <= 1e-6;

    report(
        5,
        db_ok && kernel_ok && relax_ok,
        format!(
            "detailed balance max rel {worst_db:.1e} over 100 (ω, T); ‖𝓛ρ_G‖ {worst_kernel:.1e} (≤ 1e-10); long-time distance to Gibbs {relax:.1e} (≤ 1e-6)"
        ),
    );
}

#[test]
fn criterion_6_name_structure() {
    let m = qutrit(5e-4);
    let mut worst_eig = 0.0f64;
    let mut worst_anchor = 0.0f64;
    for seed in [3, 4] {
        let f = ControlField::guess(&m, 20.0, 0.1, 0.8, seed, Shape::gaussian(20.0, 1e-4)).unwrap();
        let set = propagate_invariants(&m, &f).unwrap();
        for k in 0..f.n_times() {
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
                    worst_eig = worst_eig.max(c.norm());
                }
            }
        }
        // dressed levels of H(0), matched to the bare ones they perturb
        let e0 = m.hamiltonian_at(&f, 0.0).symmetric_eigen().eigenvalues;
        let level = |i: usize| {
            e0.iter()
                .copied()
                .min_by(|a, b| (a - m.level_energies[i]).abs().total_cmp(&(b - m.level_energies[i]).abs()))
                .unwrap()
        };
        for ch in jump_channels(&set, &BathSpec::new(1e-3, 1.0)).unwrap() {
            let gap = level(ch.i) - level(ch.j);
            worst_anchor = worst_anchor.max((ch.omega[0] - gap).abs());
        }
    }
    let f = ControlField::guess(&m, 6.0, 0.1, 0.9, 1, Shape::gaussian(6.0, 1e-4)).unwrap();
    let a = propagate_invariants(&m, &f).unwrap();
    let b = invariant_ode_oracle(&m, &f).unwrap();
    let oracle = a
        .invariants
        .iter()
        .zip(&b.invariants)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| max_abs_diff(p, q)))
        .fold(0.0, f64::max);
    report(
        6,
        worst_eig <= 1e-10 && worst_anchor <= 1e-12 && oracle <= 1e-8,
        format!("eigen-relation residual {worst_eig:.1e} (≤ 1e-10); ω_ij(0) anchor {worst_anchor:.1e} (≤ 1e-12); invariants vs ODE oracle {oracle:.1e} (≤ 1e-8)"),
    );
}

#[test]
fn criterion_7_krotov_correctness() {
    let m = qutrit(5e-4);
    let target = target_superoperator(Gate::Hadamard, 3).unwrap();
    let f = ControlField::guess(&m, 10.0, 0.1, 0.5, 3, Shape::gaussian(10.0, 1e-4)).unwrap();
    let mut cfg = OctConfig::new(f.shape);
    cfg.lambda = 5.0;
    cfg.max_iters = 50;
    cfg.target_infidelity = 1e-14;
    let r = optimize(&m, &BathSpec::closed(), &target, &cfg, &PropagatorConfig::default(), &f).unwrap();
    let worst_regression = r
        .records
        .windows(2)
        .map(|w| w[0].j_max - w[1].j_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let iters = r.records.len() - 1;
    let mono_ok = iters == 50 && r.damping_events == 0 && worst_regression <= 1e-12;

    let g = ControlField::guess(&m, 4.0, 0.1, 0.6, 11, Shape::gaussian(4.0, 1e-4)).unwrap();
    let bath = BathSpec::closed();
    let prop = PropagatorConfig {
        inner_tol: 1e-14,
        max_inner_iters: 60,
        ..PropagatorConfig::default()
    };
    let (_, grad) = gradient(&m, &g, &bath, &target, &prop).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-4;
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let c = rng.random_range(0..g.n_channels());
        let k = rng.random_range(1..g.n_times() - 1);
        let mut fp = g.clone();
        fp.amplitudes[c][k] += h;
        let mut fm = g.clone();
        fm.amplitudes[c][k] -= h;
        let fd = (objective(&m, &fp, &bath, &target, &prop).unwrap() - objective(&m, &fm, &bath, &target, &prop).unwrap())
            / (2.0 * h);
        worst_rel = worst_rel.max((grad[c][k] - fd).abs() / fd.abs());
    }
    report(
        7,
        mono_ok && worst_rel <= 1e-6,
        format!(
            "{iters} iterations, {} damping events, largest J_max regression {worst_regression:.1e} (≤ 1e-12); gradient vs central FD max rel {worst_rel:.1e} at 20 probes (≤ 1e-6)",
            r.damping_events
        ),
    );
}

fn scan_config(mode: ScanMode, oct: OctConfig, propagator: PropagatorConfig) -> ScanConfig {
    ScanConfig {
        mode,
        propagator,
        oct,
        spectral_density: SpectralDensity::Ohmic,
        gamma_p: 0.0,
        energy_form: EnergyForm::Heisenberg,
        workers: None,
    }
}

#[test]
fn criterion_8_trends() {
    let reference = closed_hadamard(40.0);
    let field = &reference.result.best_field;
    let (m, target) = (&reference.model, &reference.target);
    let oct = OctConfig::new(field.shape);

    // (a) degradation grows with γ at T = 5
    let gammas = [1e-5, 1e-4, 1e-3, 1e-2];
    let a = scan_grid(m, target, field, &gammas, &[5.0], &scan_config(ScanMode::DegradeOnly, oct, PropagatorConfig::default())).unwrap();
    let ratios: Vec<f64> = a.points.iter().map(|p| p.log_ratio).collect();
    let a_ok = ratios.windows(2).all(|w| w[1] >= w[0]);

    // (b) purity falls with temperature at γ = 0.01
    let temps = [0.1, 0.5, 1.0, 5.0];
    let b = scan_grid(m, target, field, &[1e-2], &temps, &scan_config(ScanMode::DegradeOnly, oct, PropagatorConfig::default())).unwrap();
    let purities: Vec<f64> = b.points.iter().map(|p| p.purity_sub).collect();
    let b_ok = purities.windows(2).all(|w| w[1] <= w[0]);

    // (c) re-optimization under noise, on the qutrit and on C-iX
    let window = [1e-5, 3e-5, 1e-4];
    let window_t = [0.1, 1.0, 5.0];
    let mut best = (f64::INFINITY, "", 0.0, 0.0);
    let cix = cix_20();
    let cases = [
        ("qutrit", &reference, PropagatorConfig::default(), 15),
        ("C-iX", cix, wide(), 10),
    ];
    for (name, opt, prop, iters) in cases {
        let mut mit = OctConfig::new(opt.result.best_field.shape);
        mit.max_iters = iters;
        mit.lambda = 0.2;
        mit.target_infidelity = 1e-12;
        let c = scan_grid(
            &opt.model,
            &opt.target,
            &opt.result.best_field,
            &window,
            &window_t,
            &scan_config(ScanMode::Mitigate, mit, prop),
        )
        .unwrap();
        for p in &c.points {
            if let Some(g) = p.gain {
                if g < best.0 {
                    best = (g, name, p.gamma, p.temperature);
                }
            }
        }
    }
    let c_ok = best.0 <= -1.0;

    // (d) undriven relaxation: energy released, entropy proxy larger when colder
    let undriven = ControlField::zeros(2, 0.1, 401, Shape::gaussian(40.0, 1e-4));
    let bath_temps = [0.1, 1.0, 5.0];
    let mut de = Vec::new();
    for &t in &bath_temps {
        let traj =
            propagate_map(m, &undriven, &BathSpec::new(1e-2, t), &PropagatorConfig::default(), Direction::Forward)
                .unwrap();
        de.push(energy_change_heisenberg(&traj.superop(traj.maps.len() - 1).unwrap(), &m.drift).unwrap());
    }
    let proxy: Vec<f64> = de.iter().zip(&bath_temps).map(|(e, t)| -e / t).collect();
    let d_ok = de.iter().all(|&e| e <= 0.0) && proxy.windows(2).all(|w| w[0] > w[1]);

    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    report(
        8,
        a_ok && b_ok && c_ok && d_ok,
        format!(
            "(a) {} log10(IF_noise/IF_U) over γ at T=5: [{}]; (b) {} P_sub over T at γ=0.01: [{}]; (c) {} best gain {:.3} ({} at γ={:.0e}, T={}) (≤ -1); (d) {} ΔE [{}], -ΔE/T [{}]",
            if a_ok { "ok" } else { "FAIL" },
            fmt(&ratios),
            if b_ok { "ok" } else { "FAIL" },
            purities.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "),
            if c_ok { "ok" } else { "FAIL" },
            best.0,
            best.1,
            best.2,
            best.3,
            if d_ok { "ok" } else { "FAIL" },
            fmt(&de),
            fmt(&proxy),
        ),
    );
}

#[test]
fn criterion_9_diagnostics_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_neutral = 0.0f64;
    for d in 2..=5 {
        for _ in 0..25 {
            let v: Vec<f64> = (0..d * d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let u = unitary_of(&common::hermitian_from(d, &v));
            let map = SuperOperator::from_unitary(&u);
            let e: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let h0 = Operator::from_real_diagonal(&e);
            worst_neutral = worst_neutral
                .max(energy_change(&map, &h0).unwrap().abs())
                .max(energy_change_heisenberg(&map, &h0).unwrap().abs())
                .max((subspace_purity(&map, &SubspaceSelection::full(d)).unwrap() - 1.0).abs());
        }
    }
    for (g, d) in [(Gate::Hadamard, 3), (Gate::Hadamard, 4), (Gate::Cix, 4)] {
        let t = target_superoperator(g, d).unwrap();
        let p = subspace_purity(&t.superop, &SubspaceSelection::from_target(&t)).unwrap();
        worst_neutral = worst_neutral.max((p - 1.0).abs());
    }

    let m = qutrit(1e-3);
    let dt = 1e-3;
    let tau = 2.0;
    let f = ControlField::guess(&m, tau, dt, 0.8, 5, Shape::gaussian(tau, 1e-4)).unwrap();
    let bath = BathSpec::new(1e-2, 1.0);
    let prop = PropagatorConfig {
        dt,
        inner_tol: 1e-14,
        max_inner_iters: 60,
        ..PropagatorConfig::default()
    };
    let traj = propagate_map(&m, &f, &bath, &prop, Direction::Forward).unwrap();
    let stepper = Stepper::new(&m, &f, &bath, &prop).unwrap();
    let us = stepper.unitary_grid(&f).unwrap();
    let p = |k: usize| map_purity(&traj.maps[k]);
    let mut worst_rate = 0.0f64;
    for k in [250, 500, 1000, 1500, 1750] {
        let l = stepper.gen.generator(&f, f.time(k), &us[k]);
        let rate = purity_loss_rate(&traj.maps[k], &l).unwrap();
        let fd = (8.0 * (p(k + 1) - p(k - 1)) - (p(k + 2) - p(k - 2))) / (12.0 * dt);
        worst_rate = worst_rate.max(((rate - fd) / fd).abs());
    }
    report(
        9,
        worst_neutral <= 1e-10 && worst_rate <= 1e-6,
        format!("unitary neutrality max defect {worst_neutral:.1e} (≤ 1e-10); purity-loss rate vs FD max rel {worst_rate:.1e} (≤ 1e-6)"),
    );
}
