// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Dissipative quantum walks on a two-chain non-Hermitian ladder.
//!
//! A particle starts on chain A at site `x0` and is lost from chain B at rate
//! `gamma`. The crate computes where it is lost (`P_x`), the spectra and
//! Bloch roots that control the bulk decay, closed-form estimates of the edge
//! loss, and velocity-resolved Lyapunov exponents.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{BoundaryCondition, ModelParams};
