// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Driven model Hamiltonians `H(t) = H₀ + Σ ε_k(t) G_k + ε_uc(t) G_uc`.

mod field;
mod target;

pub use field::{grid_points, ControlField, Shape};
pub use target::{target_superoperator, Gate, GateTarget};

use serde::{Deserialize, Serialize};

use crate::ops::{gellmann_basis, real, Operator};
use crate::{CMat, Error, Result, C64};

/// Coefficients multiplying the Gell-Mann couplings of each ancilla, or the
/// two-qubit control terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub a_x: f64,
    pub a_y: f64,
}

impl CoefficientTable {
    /// All coefficients set to one for `n` ancillas.
    pub fn ones(n: usize) -> Self {
        Self {
            a: vec![1.0; n],
            b: vec![1.0; n],
            c: vec![1.0; n],
            d: vec![1.0; n],
            a_x: 1.0,
            a_y: 1.0,
        }
    }
}

/// How the uncontrolled amplitude depends on time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncontrolledMode {
    /// `H_uc` is switched on for the whole horizon.
    #[default]
    Static,
    /// `H_uc(t) = s(t) G_uc`, following the control envelope.
    Shaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    QubitAncilla { n_ancillas: usize },
    TwoQubit,
}

#[derive(Clone, Debug)]
pub struct ModelSystem {
    pub kind: ModelKind,
    pub drift: Operator,
    pub control_generators: Vec<Operator>,
    /// Already multiplied by the uncontrolled amplitude.
    pub uncontrolled_generator: Operator,
    pub uncontrolled_mode: UncontrolledMode,
    pub coeff_table: CoefficientTable,
    pub level_energies: Vec<f64>,
}

impl ModelSystem {
    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn n_channels(&self) -> usize {
        self.control_generators.len()
    }

    /// Appends a further control channel; used for direct qubit driving.
    pub fn with_control(mut self, generator: Operator) -> Result<Self> {
        if generator.dim() != self.dim() || !generator.is_hermitian() {
            return Err(Error::validation(
                "extra control generator must be Hermitian with the model dimension",
            ));
        }
        self.control_generators.push(generator);
        Ok(self)
    }

    pub fn with_uncontrolled_mode(mut self, mode: UncontrolledMode) -> Self {
        self.uncontrolled_mode = mode;
        self
    }

    /// `H₀ + Σ amps[k] G_k + uc · G_uc` as a raw matrix.
    pub fn hamiltonian_matrix(&self, amps: &[f64], uc: f64) -> CMat {
        let mut h = self.drift.matrix().clone();
        for (g, &e) in self.control_generators.iter().zip(amps) {
            if e != 0.0 {
                h += g.matrix() * real(e);
            }
        }
        if uc != 0.0 {
            h += self.uncontrolled_generator.matrix() * real(uc);
        }
        h
    }

    /// `H(t)` at an arbitrary time, with fields linearly interpolated.
    pub fn hamiltonian_at(&self, field: &ControlField, t: f64) -> CMat {
        let amps = field.amplitudes_at(t);
        let uc = match self.uncontrolled_mode {
            UncontrolledMode::Static => 1.0,
            UncontrolledMode::Shaped => field.shape.value(t),
        };
        self.hamiltonian_matrix(&amps, uc)
    }
}

/// Qubit coupled to `n_ancillas` auxiliary levels.
///
/// The qubit occupies levels 0 and 1, ancilla `j` sits at index `1 + j`.
/// For a single ancilla the drift is `(ω/2)G₃ + (4ω/(2√3))G₈` with controls
/// `a₁G₄`, `b₁G₆` and uncontrolled term `G₁`. For two or three ancillas the
/// drift puts ancilla `j` at `4jω`, the first channel drives all
/// `|0⟩↔|a_j⟩` couplings together and channel `j` drives `|1⟩↔|a_j⟩`.
pub fn build_qubit_ancilla_model(
    n_ancillas: usize,
    omega: f64,
    coeffs: &CoefficientTable,
    eps_uc_scale: f64,
) -> Result<ModelSystem> {
    if !(1..=3).contains(&n_ancillas) {
        return Err(Error::validation(format!(
            "n_ancillas must be 1, 2 or 3, got {n_ancillas}"
        )));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::validation(format!("omega must be positive, got {omega}")));
    }
    if !eps_uc_scale.is_finite() {
        return Err(Error::validation("eps_uc_scale must be finite"));
    }
    for (name, v) in [("a", &coeffs.a), ("b", &coeffs.b), ("c", &coeffs.c), ("d", &coeffs.d)] {
        if v.len() < n_ancillas {
            return Err(Error::validation(format!(
                "coefficient list `{name}` has {} entries, need {n_ancillas}",
                v.len()
            )));
        }
    }
    let dim = 2 + n_ancillas;

    let (drift, controls, uncontrolled) = if n_ancillas == 1 {
        let g = gellmann_basis(3)?;
        let drift = g[2].matrix() * real(omega / 2.0)
            + g[7].matrix() * real(4.0 * omega / (2.0 * 3f64.sqrt()));
        let controls = vec![
            g[3].matrix() * real(coeffs.a[0]),
            g[5].matrix() * real(coeffs.b[0]),
        ];
        (drift, controls, g[0].matrix() * real(eps_uc_scale))
    } else {
        let mut diag = vec![0.0; dim];
        diag[0] = omega / 2.0;
        diag[1] = -omega / 2.0;
        for j in 1..=n_ancillas {
            diag[1 + j] = 4.0 * j as f64 * omega;
        }
        let drift = Operator::from_real_diagonal(&diag).into_matrix();
        let mut shared = CMat::zeros(dim, dim);
        let mut controls = Vec::with_capacity(n_ancillas + 1);
        let mut uncontrolled = CMat::zeros(dim, dim);
        for j in 1..=n_ancillas {
            let g4 = transition_x(dim, 0, 1 + j);
            let g6 = transition_x(dim, 1, 1 + j);
            shared += &g4 * real(coeffs.a[j - 1]);
            uncontrolled += &g4 * real(coeffs.c[j - 1]) + &g6 * real(coeffs.d[j - 1]);
            controls.push(g6 * real(coeffs.b[j - 1]));
        }
        controls.insert(0, shared);
        (drift, controls, uncontrolled * real(eps_uc_scale))
    };

    assemble(
        ModelKind::QubitAncilla { n_ancillas },
        drift,
        controls,
        uncontrolled,
        coeffs.clone(),
    )
}

/// Two qubits with drift `a I⊗I + ω₁ σ_Z⊗I`, a correlating control
/// `Σ_{i∈{X,Y}} a_i (I − σ_Z)⊗σ_i` and a second control `σ_X⊗σ_Z`.
pub fn build_two_qubit_model(omega1: f64, a: f64, a_x: f64, a_y: f64) -> Result<ModelSystem> {
    if !(omega1 > 0.0) || !omega1.is_finite() {
        return Err(Error::validation(format!("omega1 must be positive, got {omega1}")));
    }
    if ![a, a_x, a_y].iter().all(|v| v.is_finite()) {
        return Err(Error::validation("two-qubit coefficients must be finite"));
    }
    let [id, sx, sy, sz] = paulis();
    let drift = Operator::from_real_diagonal(&[a + omega1, a + omega1, a - omega1, a - omega1])
        .into_matrix();
    let proj = &id - &sz;
    let ch1 = proj.kronecker(&sx) * real(a_x) + proj.kronecker(&sy) * real(a_y);
    let ch2 = sx.kronecker(&sz);
    let mut coeffs = CoefficientTable::ones(0);
    coeffs.a_x = a_x;
    coeffs.a_y = a_y;
    assemble(
        ModelKind::TwoQubit,
        drift,
        vec![ch1, ch2],
        CMat::zeros(4, 4),
        coeffs,
    )
}

/// `H(t_k)` on the control grid.
pub fn eval_hamiltonian(model: &ModelSystem, field: &ControlField, t_index: usize) -> Result<Operator> {
    if t_index >= field.n_times() {
        return Err(Error::validation(format!(
            "time index {t_index} outside grid of {} points",
            field.n_times()
        )));
    }
    if field.n_channels() != model.n_channels() {
        return Err(Error::shape(format!(
            "field has {} channels, model has {}",
            field.n_channels(),
            model.n_channels()
        )));
    }
    let amps: Vec<f64> = (0..field.n_channels())
        .map(|c| field.amplitudes[c][t_index])
        .collect();
    let uc = match model.uncontrolled_mode {
        UncontrolledMode::Static => 1.0,
        UncontrolledMode::Shaped => field.shape.value(field.time(t_index)),
    };
    Operator::hermitian(model.hamiltonian_matrix(&amps, uc))
}

fn assemble(
    kind: ModelKind,
    drift: CMat,
    controls: Vec<CMat>,
    uncontrolled: CMat,
    coeff_table: CoefficientTable,
) -> Result<ModelSystem> {
    let drift = Operator::hermitian(drift)?;
    let level_energies = (0..drift.dim()).map(|i| drift.matrix()[(i, i)].re).collect();
    let control_generators = controls
        .into_iter()
        .map(Operator::hermitian)
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelSystem {
        kind,
        drift,
        control_generators,
        uncontrolled_generator: Operator::hermitian(uncontrolled)?,
        uncontrolled_mode: UncontrolledMode::Static,
        coeff_table,
        level_energies,
    })
}

/// `|i⟩⟨j| + |j⟩⟨i|`.
pub(crate) fn transition_x(dim: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(i, j)] = real(1.0);
    m[(j, i)] = real(1.0);
    m
}

fn paulis() -> [CMat; 4] {
    let o = real(1.0);
    let z = real(0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMat::identity(2, 2),
        CMat::from_row_slice(2, 2, &[z, o, o, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}
