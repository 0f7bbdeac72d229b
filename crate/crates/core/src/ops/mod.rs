// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Complex operator algebra and Liouville-space superoperators.

mod basis;
mod choi;
mod expm;
mod superop;

pub use basis::gellmann_basis;
pub use choi::{choi_cptp_check, choi_matrix, CptpReport};
pub use expm::expm;
pub use superop::{
    add_gkls_channel, commutator_superop, gkls_superop, hamiltonian_liouvillian,
    phase_noise_liouvillian, phase_noise_superop,
};

use nalgebra::DVector;

use crate::{CMat, Error, Result, C64};

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// A `d × d` complex operator on the system Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMat,
    hermitian: bool,
}

impl Operator {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::shape(format!(
                "operator must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("operator has non-finite entries"));
        }
        let hermitian = hermiticity_defect(&mat) <= HERMITIAN_TOL;
        Ok(Self { mat, hermitian })
    }

    /// Builds an operator that is required to be Hermitian.
    pub fn hermitian(mat: CMat) -> Result<Self> {
        let op = Self::new(mat)?;
        if !op.hermitian {
            return Err(Error::validation(format!(
                "operator is not Hermitian (defect {:.3e})",
                hermiticity_defect(&op.mat)
            )));
        }
        Ok(op)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMat::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut mat = CMat::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(v, 0.0);
        }
        Self {
            mat,
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mat: &self.mat * C64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }
}

/// Row-stacked vector `|X>>` of a `d × d` operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorVector {
    data: DVector<C64>,
}

impl OperatorVector {
    pub fn as_slice(&self) -> &[C64] {
        self.data.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn from_vector(data: DVector<C64>) -> Result<Self> {
        let n = data.len();
        if operator_dim(n).is_none() {
            return Err(Error::shape(format!("length {n} is not a perfect square")));
        }
        Ok(Self { data })
    }
}

/// A `d² × d²` matrix acting on row-stacked operator vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    mat: CMat,
    dim: usize,
}

impl SuperOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::shape(format!(
                "superoperator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = operator_dim(mat.nrows()).ok_or_else(|| {
            Error::shape(format!("size {} is not a perfect square", mat.nrows()))
        })?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("superoperator has non-finite entries"));
        }
        Ok(Self { mat, dim })
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            mat: CMat::identity(n, n),
            dim,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            mat: CMat::zeros(n, n),
            dim,
        }
    }

    /// `U ⊗ U*`, the superoperator of `X ↦ U X U†`.
    pub fn from_unitary(u: &CMat) -> Self {
        let dim = u.nrows();
        Self {
            mat: u.kronecker(&u.conjugate()),
            dim,
        }
    }

    /// Hilbert-space dimension `d` of the operators acted on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim {
            return Err(Error::shape(format!(
                "operator dim {} does not match superoperator dim {}",
                x.dim(),
                self.dim
            )));
        }
        Operator::new(apply_superop(&self.mat, x.matrix()))
    }
}

/// Hilbert-space dimension `d` for a Liouville dimension `n = d²`.
pub fn operator_dim(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n && d > 0).then_some(d)
}

pub fn vectorize(x: &Operator) -> OperatorVector {
    OperatorVector {
        data: vec_mat(x.matrix()),
    }
}

pub fn unvectorize(v: &OperatorVector) -> Operator {
    let m = unvec_mat(&v.data);
    let hermitian = hermiticity_defect(&m) <= HERMITIAN_TOL;
    Operator { mat: m, hermitian }
}

/// Hilbert–Schmidt inner product `Tr[A† B]`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!(
            "hs_inner dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(hs_inner_mat(a.matrix(), b.matrix()))
}

pub(crate) fn hs_inner_mat(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn vec_mat(x: &CMat) -> DVector<C64> {
    let d = x.nrows();
    DVector::from_fn(d * d, |idx, _| x[(idx / d, idx % d)])
}

pub(crate) fn unvec_mat(v: &DVector<C64>) -> CMat {
    let d = operator_dim(v.len()).expect("vector length must be a perfect square");
    CMat::from_fn(d, d, |i, j| v[i * d + j])
}

pub(crate) fn apply_superop(s: &CMat, x: &CMat) -> CMat {
    unvec_mat(&(s * vec_mat(x)))
}

pub(crate) fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub(crate) fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `Tr[A B]` without forming the product.
pub(crate) fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}
