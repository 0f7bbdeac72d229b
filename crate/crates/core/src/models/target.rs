// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::ops::{real, SuperOperator};
use crate::{CMat, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Hadamard,
    Cix,
    Identity,
}

/// Target map `𝓞 = U ⊗ U*` for a unitary embedded in the logical subspace.
#[derive(Clone, Debug)]
pub struct GateTarget {
    pub gate: Gate,
    pub logical_dim: usize,
    pub superop: SuperOperator,
    /// Operator-basis columns on which `𝓞` acts nontrivially.
    pub working_directions: Vec<usize>,
}

impl GateTarget {
    pub fn dim(&self) -> usize {
        self.superop.dim()
    }
}

pub fn target_superoperator(gate: Gate, dim: usize) -> Result<GateTarget> {
    let (u, logical_dim) = match gate {
        Gate::Hadamard => {
            if !(3..=5).contains(&dim) {
                return Err(Error::validation(format!(
                    "hadamard target needs dim 3..=5, got {dim}"
                )));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut u = CMat::zeros(dim, dim);
            u[(0, 0)] = real(h);
            u[(0, 1)] = real(h);
            u[(1, 0)] = real(h);
            u[(1, 1)] = real(-h);
            (u, 2)
        }
        Gate::Cix => {
            if dim != 4 {
                return Err(Error::validation(format!("cix target needs dim 4, got {dim}")));
            }
            let i = C64::new(0.0, 1.0);
            let mut u = CMat::zeros(4, 4);
            u[(0, 0)] = real(1.0);
            u[(1, 1)] = real(1.0);
            u[(2, 3)] = i;
            u[(3, 2)] = i;
            (u, 4)
        }
        Gate::Identity => {
            if dim < 2 {
                return Err(Error::validation("identity target needs dim >= 2"));
            }
            (CMat::identity(dim, dim), dim)
        }
    };
    let superop = SuperOperator::from_unitary(&u);
    let working_directions = working_directions(superop.matrix());
    Ok(GateTarget {
        gate,
        logical_dim,
        superop,
        working_directions,
    })
}

pub(crate) fn working_directions(o: &CMat) -> Vec<usize> {
    (0..o.ncols())
        .filter(|&j| o.column(j).norm() > 1e-12)
        .collect()
}
