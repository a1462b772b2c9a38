// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation and analytics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge (achieved {achieved:.3e}, required {required:.3e})")]
    Convergence {
        what: &'static str,
        achieved: f64,
        required: f64,
    },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error bound {error_bound:.3e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("eigensolver failed (departure from normality {condition:.3e})")]
    Eigensolver { condition: f64 },

    #[error("degenerate Bloch roots at omega = {omega}: |beta_L| = |beta_R|")]
    DegenerateRoots { omega: f64 },

    #[error("no saddle point found at v = {v} from {starts} Newton starts")]
    NoSaddles { v: f64, starts: usize },

    #[error("no effective saddle at v = {v}; contour bound is {bound}")]
    NoEffectiveSaddle { v: f64, bound: f64 },

    #[error("ambiguous maximum: {0}")]
    Ambiguous(String),
}

pub type Result<T> = std::result::Result<T, Error>;
