// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-chain lossy ladder: parameters, real-space and Bloch Hamiltonians.
//!
//! Sites are 1-based in the public interface. Internally the state vector is
//! site-major and interleaved, `2(x-1)` for `(x, A)` and `2(x-1)+1` for
//! `(x, B)`, which keeps the open-chain matrix banded with half-bandwidth 3.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Couplings, loss rate and geometry of the ladder (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// On-site A-B coupling.
    pub t1: f64,
    /// Nearest-neighbour coupling (both the chiral intrachain and the diagonal
    /// interchain hoppings carry `t2/2`).
    pub t2: f64,
    /// Loss rate on chain B.
    pub gamma: f64,
    /// Number of sites per chain.
    pub length: usize,
    /// Excitation site on chain A, 1-based.
    pub x0: usize,
}

impl ModelParams {
    pub fn new(t1: f64, t2: f64, gamma: f64, length: usize, x0: usize) -> Result<Self> {
        let p = Self {
            t1,
            t2,
            gamma,
            length,
            x0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1.is_finite() && self.t2.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("couplings must be finite".into()));
        }
        if self.t2 == 0.0 {
            return Err(Error::InvalidParams(
                "t2 = 0 decouples the ladder into dimers".into(),
            ));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.length < 2 {
            return Err(Error::InvalidParams(format!(
                "length must be >= 2, got {}",
                self.length
            )));
        }
        if self.x0 < 1 || self.x0 > self.length {
            return Err(Error::InvalidParams(format!(
                "x0 must lie in 1..={}, got {}",
                self.length, self.x0
            )));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_t1(self, t1: f64) -> Self {
        Self { t1, ..self }
    }

    /// Dimension of the single-particle Hilbert space, `2L`.
    pub fn dim(&self) -> usize {
        2 * self.length
    }

    /// Product of the two roots of the characteristic equation in `beta`,
    /// `(t1 - gamma/2) / (t1 + gamma/2)`.
    pub fn root_product(&self) -> f64 {
        (self.t1 - 0.5 * self.gamma) / (self.t1 + 0.5 * self.gamma)
    }

    /// True when the periodic spectrum touches the real axis, `|t1| <= |t2|`.
    pub fn gap_closing(&self) -> bool {
        self.t1.abs() <= self.t2.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Obc,
    Pbc,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Obc => f.write_str("obc"),
            Self::Pbc => f.write_str("pbc"),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obc" | "open" => Ok(Self::Obc),
            "pbc" | "periodic" => Ok(Self::Pbc),
            other => Err(Error::InvalidParams(format!(
                "unknown boundary condition {other:?} (expected obc or pbc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chain {
    A,
    B,
}

/// Index of `(x, chain)` in the interleaved state vector; `x` is 1-based.
#[inline]
pub fn site_index(x: usize, chain: Chain) -> usize {
    debug_assert!(x >= 1);
    match chain {
        Chain::A => 2 * (x - 1),
        Chain::B => 2 * (x - 1) + 1,
    }
}

/// Dense real-space Hamiltonian of the ladder.
#[derive(Debug, Clone)]
pub struct RealSpaceHamiltonian {
    pub matrix: DMatrix<Complex64>,
    pub boundary: BoundaryCondition,
}

impl RealSpaceHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Anti-Hermitian part divided by `-2i`; for this model it is the loss
    /// operator `diag(0, gamma, 0, gamma, ...)`.
    pub fn loss_operator(&self) -> DMatrix<Complex64> {
        let h = &self.matrix;
        (h - h.adjoint()) / Complex64::new(0.0, -2.0)
    }

    pub fn to_sparse(&self) -> CsrMatrix {
        CsrMatrix::from_dense(&self.matrix)
    }
}

/// Visits every nonzero matrix element of the real-space Hamiltonian.
/// Entries may repeat (short periodic rings); callers accumulate.
fn for_each_element(
    p: &ModelParams,
    boundary: BoundaryCondition,
    mut put: impl FnMut(usize, usize, Complex64),
) {
    let l = p.length;
    let half = 0.5 * p.t2;
    for x in 0..l {
        let a = 2 * x;
        let b = a + 1;
        put(a, b, Complex64::new(p.t1, 0.0));
        put(b, a, Complex64::new(p.t1, 0.0));
        put(b, b, Complex64::new(0.0, -p.gamma));

        let left = match (x, boundary) {
            (0, BoundaryCondition::Obc) => None,
            (0, BoundaryCondition::Pbc) => Some(l - 1),
            _ => Some(x - 1),
        };
        let right = match (x + 1 == l, boundary) {
            (true, BoundaryCondition::Obc) => None,
            (true, BoundaryCondition::Pbc) => Some(0),
            _ => Some(x + 1),
        };
        // psi_{x-1} enters chain A with +i t2/2 and chain B with -i t2/2;
        // psi_{x+1} with the opposite signs.
        for (neighbour, sign) in [(left, 1.0), (right, -1.0)] {
            if let Some(y) = neighbour {
                let ya = 2 * y;
                let yb = ya + 1;
                put(a, ya, Complex64::new(0.0, sign * half));
                put(b, yb, Complex64::new(0.0, -sign * half));
                put(a, yb, Complex64::new(half, 0.0));
                put(b, ya, Complex64::new(half, 0.0));
            }
        }
    }
}

pub fn build_real_space_hamiltonian(
    params: &ModelParams,
    boundary: BoundaryCondition,
) -> Result<RealSpaceHamiltonian> {
    params.validate()?;
    let n = params.dim();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for_each_element(params, boundary, |i, j, v| matrix[(i, j)] += v);
    Ok(RealSpaceHamiltonian { matrix, boundary })
}

/// Sparse form of the same operator, for long chains where the dense matrix
/// would only be used for matrix-vector products.
pub fn build_sparse_hamiltonian(
    params: &ModelParams,
    boundary: BoundaryCondition,
) -> Result<CsrMatrix> {
    params.validate()?;
    let mut triplets = Vec::with_capacity(10 * params.length);
    for_each_element(params, boundary, |i, j, v| triplets.push((i, j, v)));
    Ok(CsrMatrix::from_triplets(params.dim(), triplets))
}

/// Bloch Hamiltonian `H(beta)` in the (A, B) basis.
pub fn bloch_hamiltonian(params: &ModelParams, beta: Complex64) -> Result<Matrix2<Complex64>> {
    if beta == Complex64::new(0.0, 0.0) || !beta.is_finite() {
        return Err(Error::Domain(
            "bloch_hamiltonian needs a finite nonzero beta".into(),
        ));
    }
    let i = Complex64::i();
    let inv = beta.inv();
    let half = 0.5 * params.t2;
    let chiral = i * half * (inv - beta);
    let hop = half * (inv + beta) + params.t1;
    Ok(Matrix2::new(
        chiral,
        hop,
        hop,
        -chiral - i * params.gamma,
    ))
}

/// Eigenvalues of a 2x2 complex matrix from its trace and determinant.
pub fn eigenvalues_2x2(m: &Matrix2<Complex64>) -> [Complex64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr * 0.25 - det).sqrt();
    [tr * 0.5 + disc, tr * 0.5 - disc]
}

/// Left-hand side of the characteristic equation
/// `E^2 + i gamma E - gamma t2/2 (beta - 1/beta) - t2^2 - t1^2 - t1 t2 (beta + 1/beta)`.
pub fn characteristic(params: &ModelParams, energy: Complex64, beta: Complex64) -> Complex64 {
    let (t1, t2, g) = (params.t1, params.t2, params.gamma);
    let inv = beta.inv();
    energy * energy + Complex64::i() * g * energy - 0.5 * g * t2 * (beta - inv)
        - t2 * t2
        - t1 * t1
        - t1 * t2 * (beta + inv)
}
