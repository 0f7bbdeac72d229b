// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Optimal control of noisy quantum gates with a thermodynamically
//! consistent, drive-dependent dissipator.
//!
//! Dynamical maps are represented in Liouville space with row-stacked
//! vectorization, `|X>> = (X_00, X_01, ..., X_10, ...)`, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`. Units use ħ = k_B = 1.
//!
//! Module map:
//! - [`ops`]: operator algebra, bases, superoperator constructors, CPTP checks
//! - [`models`]: drift/control Hamiltonians, control fields, gate targets
//! - [`thermal`]: invariants, jump operators, Bohr frequencies, thermal rates
//! - [`propagator`]: reference and semi-global map propagation
//! - [`oct`]: fidelity, adjoint propagation and Krotov-type updates
//! - [`diagnostics`]: purity, energy exchange, infidelity ratios, scans
//! - [`config`], [`io`], [`cli`]: configuration, persistence, command dispatch

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod models;
pub mod oct;
pub mod ops;
pub mod propagator;
pub mod thermal;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for operators and superoperators alike.
pub type CMat = nalgebra::DMatrix<C64>;
