// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution of a delta excitation, site-resolved loss probabilities,
//! and a frequency-domain Green's-function oracle for the same quantity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_banded, ComplexSchur, CsrMatrix};
use crate::model::{
    build_real_space_hamiltonian, build_sparse_hamiltonian, site_index, BoundaryCondition, Chain,
    ModelParams,
};
use crate::ode::{Dopri5, Dopri5Options};
use crate::quadrature::{integrate_real_line, QuadratureOptions};

type C = Complex64;

/// Snapshot of the amplitudes on both chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketState {
    pub time: f64,
    pub amps_a: Vec<C>,
    pub amps_b: Vec<C>,
}

impl WavepacketState {
    fn from_interleaved(time: f64, psi: &[C]) -> Self {
        Self {
            time,
            amps_a: psi.iter().step_by(2).copied().collect(),
            amps_b: psi.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps_a
            .iter()
            .chain(&self.amps_b)
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// `|psi_x^A|^2 + |psi_x^B|^2` for 1-based `x`.
    pub fn site_probability(&self, x: usize) -> f64 {
        self.amps_a[x - 1].norm_sqr() + self.amps_b[x - 1].norm_sqr()
    }

    pub fn site_probabilities(&self) -> Vec<f64> {
        (1..=self.amps_a.len()).map(|x| self.site_probability(x)).collect()
    }
}

/// `psi_x^A = delta_{x, x0}`, interleaved.
pub fn initial_state(params: &ModelParams) -> Vec<C> {
    let mut psi = vec![C::new(0.0, 0.0); params.dim()];
    psi[site_index(params.x0, Chain::A)] = C::new(1.0, 0.0);
    psi
}

fn schrodinger_rhs(h: &CsrMatrix) -> impl FnMut(f64, &[C], &mut [C]) + '_ {
    move |_t, y, dy| {
        h.mul_vec_into(y, dy);
        for v in dy.iter_mut() {
            *v = C::new(v.im, -v.re);
        }
    }
}

fn initial_step(h: &CsrMatrix) -> f64 {
    0.1 / (1.0 + h.norm_inf())
}

/// Integrates `i dpsi/dt = H psi` from the delta excitation and returns a
/// snapshot at each sample time.
pub fn evolve(
    params: &ModelParams,
    boundary: BoundaryCondition,
    t_final: f64,
    sample_times: &[f64],
) -> Result<Vec<WavepacketState>> {
    evolve_with(params, boundary, t_final, sample_times, &Dopri5Options::default())
}

pub fn evolve_with(
    params: &ModelParams,
    boundary: BoundaryCondition,
    t_final: f64,
    sample_times: &[f64],
    ode: &Dopri5Options,
) -> Result<Vec<WavepacketState>> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!("t_final must be > 0, got {t_final}")));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("sample times must be sorted".into()));
    }
    if sample_times.iter().any(|&t| !(0.0..=t_final).contains(&t)) {
        return Err(Error::InvalidParams(format!(
            "sample times must lie in [0, {t_final}]"
        )));
    }
    let h = build_sparse_hamiltonian(params, boundary)?;
    let mut rhs = schrodinger_rhs(&h);
    let mut stepper = Dopri5::new(0.0, initial_state(params), initial_step(&h), *ode);
    let mut out = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        stepper.advance_to(&mut rhs, t)?;
        out.push(WavepacketState::from_interleaved(t, &stepper.y));
    }
    Ok(out)
}

/// How a loss profile was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LossMethod {
    /// Closed-form time integral in the eigenbasis.
    EigenClosedForm,
    /// Lyapunov equation solved on the Schur factor (same integral, no
    /// eigenvector inversion).
    SchurLyapunov,
    /// Explicit integration with on-the-fly loss accumulation.
    TimeStepping,
    /// Zero profile returned for `gamma = 0` on request.
    Lossless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossStrategy {
    /// Eigenbasis when well conditioned, else Schur, else time stepping.
    Auto,
    EigenClosedForm,
    SchurLyapunov,
    TimeStepping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossOptions {
    /// Time stepping stops once `||psi(T)||^2 <= residual_tol`.
    pub residual_tol: f64,
    pub strategy: LossStrategy,
    /// Modes with `|Im E| <` this bar disqualify the closed forms.
    pub eigen_guard: f64,
    /// Eigenbasis condition number above which the eigen route is skipped.
    pub max_condition: f64,
    /// Conservation defect above which a closed-form result is discarded.
    pub max_defect: f64,
    pub max_time: f64,
    /// With `gamma = 0`, return an all-zero profile instead of an error.
    pub allow_lossless: bool,
    pub ode: Dopri5Options,
}

impl Default for LossOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            strategy: LossStrategy::Auto,
            eigen_guard: 1e-10,
            max_condition: 1e6,
            max_defect: 1e-8,
            max_time: 1e7,
            allow_lossless: false,
            ode: Dopri5Options::default(),
        }
    }
}

/// Total probability lost at each site, `P_x = 2 gamma ∫ |psi_x^B|^2 dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    /// `p[x - 1] = P_x`.
    pub p: Vec<f64>,
    /// Norm left in the chain when the integral was truncated; zero for the
    /// closed forms, which integrate to infinity.
    pub residual_norm: f64,
    /// Truncation time; `None` for the closed forms.
    pub t_final: Option<f64>,
    pub method: LossMethod,
    pub x0: usize,
    /// `min(P_1, ..., P_x0)`.
    pub p_min_bulk: f64,
    pub p_edge: f64,
}

impl LossProfile {
    pub fn new(p: Vec<f64>, residual_norm: f64, t_final: Option<f64>, method: LossMethod, x0: usize) -> Self {
        let p_min_bulk = min_bulk(&p, x0);
        let p_edge = p[0];
        Self {
            p,
            residual_norm,
            t_final,
            method,
            x0,
            p_min_bulk,
            p_edge,
        }
    }

    /// `P_x` for 1-based `x`.
    pub fn at(&self, x: usize) -> f64 {
        self.p[x - 1]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `|sum P_x + residual - 1|`.
    pub fn conservation_defect(&self) -> f64 {
        (self.total() + self.residual_norm - 1.0).abs()
    }

    /// Edge-to-bulk-minimum ratio `P_1 / P_min`.
    pub fn edge_burst_ratio(&self) -> f64 {
        self.p_edge / self.p_min_bulk
    }

    /// Site of `P_min` (1-based, first occurrence).
    pub fn p_min_site(&self) -> usize {
        let mut best = 0;
        for x in 0..self.x0.min(self.p.len()) {
            if self.p[x] < self.p[best] {
                best = x;
            }
        }
        best + 1
    }

    /// Probability lost on sites `2..=far` relative to the edge loss: the
    /// share carried back into the bulk by boundary scattering.
    pub fn reflection_ratio(&self, far: usize) -> f64 {
        let far = far.min(self.p.len());
        self.p[1..far].iter().sum::<f64>() / self.p_edge
    }

    /// True when the cached `p_min_bulk` and `p_edge` agree with `p`.
    pub fn caches_consistent(&self) -> bool {
        self.p_min_bulk == min_bulk(&self.p, self.x0) && self.p_edge == self.p[0]
    }
}

fn min_bulk(p: &[f64], x0: usize) -> f64 {
    p[..x0.min(p.len())].iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn loss_profile(params: &ModelParams, boundary: BoundaryCondition, residual_tol: f64) -> Result<LossProfile> {
    loss_profile_with(
        params,
        boundary,
        &LossOptions {
            residual_tol,
            ..Default::default()
        },
    )
}

pub fn loss_profile_with(
    params: &ModelParams,
    boundary: BoundaryCondition,
    opts: &LossOptions,
) -> Result<LossProfile> {
    params.validate()?;
    if !(opts.residual_tol > 0.0 && opts.residual_tol < 1.0) {
        return Err(Error::InvalidParams(format!(
            "residual_tol must lie in (0, 1), got {}",
            opts.residual_tol
        )));
    }
    if params.gamma == 0.0 {
        if opts.allow_lossless {
            return Ok(LossProfile::new(
                vec![0.0; params.length],
                1.0,
                None,
                LossMethod::Lossless,
                params.x0,
            ));
        }
        return Err(Error::Domain(
            "gamma = 0: nothing is ever lost and the loss integral never converges".into(),
        ));
    }
    match opts.strategy {
        LossStrategy::TimeStepping => time_stepping_profile(params, boundary, opts),
        LossStrategy::EigenClosedForm => {
            let h = build_real_space_hamiltonian(params, boundary)?;
            let schur = ComplexSchur::new(&h.matrix)?;
            eigen_profile(params, &schur, opts)
        }
        LossStrategy::SchurLyapunov => {
            let h = build_real_space_hamiltonian(params, boundary)?;
            let schur = ComplexSchur::new(&h.matrix)?;
            schur_profile(params, &schur, opts)
        }
        LossStrategy::Auto => {
            let h = build_real_space_hamiltonian(params, boundary)?;
            let schur = match ComplexSchur::new(&h.matrix) {
                Ok(s) => s,
                Err(_) => return time_stepping_profile(params, boundary, opts),
            };
            if let Ok(p) = eigen_profile(params, &schur, opts) {
                return Ok(p);
            }
            if let Ok(p) = schur_profile(params, &schur, opts) {
                return Ok(p);
            }
            time_stepping_profile(params, boundary, opts)
        }
    }
}

fn guard_spectrum(schur: &ComplexSchur, opts: &LossOptions) -> Result<()> {
    let top = schur
        .eigenvalues()
        .iter()
        .map(|e| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    if top > -opts.eigen_guard {
        return Err(Error::Domain(format!(
            "mode with |Im E| = {:.3e} below the eigen guard",
            top.abs()
        )));
    }
    Ok(())
}

fn check_defect(profile: LossProfile, opts: &LossOptions) -> Result<LossProfile> {
    let defect = profile.conservation_defect();
    if !(defect <= opts.max_defect) || profile.p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Convergence {
            what: "closed-form loss integral",
            achieved: defect,
            required: opts.max_defect,
        });
    }
    Ok(profile)
}

/// `P_x = 2 gamma sum_{nm} c_n conj(c_m) v_n(xB) conj(v_m(xB)) / (i (E_n - conj E_m))`.
fn eigen_profile(params: &ModelParams, schur: &ComplexSchur, opts: &LossOptions) -> Result<LossProfile> {
    guard_spectrum(schur, opts)?;
    let eigs = schur.eigenvalues();
    let v = schur.eigenvectors();
    let inv = v.clone().try_inverse().ok_or(Error::Eigensolver {
        condition: f64::INFINITY,
    })?;
    let condition = v.norm() * inv.norm();
    if !(condition <= opts.max_condition) {
        return Err(Error::Eigensolver { condition });
    }
    let psi0 = DVector::from_vec(initial_state(params));
    let c = &inv * &psi0;
    let n = eigs.len();
    let kernel = DMatrix::from_fn(n, n, |a, b| (C::i() * (eigs[a] - eigs[b].conj())).inv());
    let mut p = Vec::with_capacity(params.length);
    for x in 1..=params.length {
        let row = site_index(x, Chain::B);
        let w: DVector<C> = DVector::from_fn(n, |a, _| c[a] * v[(row, a)]);
        let kw = &kernel * w.map(|z| z.conj());
        let val: C = w.iter().zip(kw.iter()).map(|(a, b)| a * b).sum();
        p.push(2.0 * params.gamma * val.re);
    }
    check_defect(
        LossProfile::new(p, 0.0, None, LossMethod::EigenClosedForm, params.x0),
        opts,
    )
}

fn schur_profile(params: &ModelParams, schur: &ComplexSchur, opts: &LossOptions) -> Result<LossProfile> {
    guard_spectrum(schur, opts)?;
    let diag = schur.gramian_diagonal(&initial_state(params))?;
    let p = (1..=params.length)
        .map(|x| 2.0 * params.gamma * diag[site_index(x, Chain::B)])
        .collect();
    check_defect(
        LossProfile::new(p, 0.0, None, LossMethod::SchurLyapunov, params.x0),
        opts,
    )
}

/// Integrates the wavefunction together with the accumulators
/// `dP_x/dt = 2 gamma |psi_x^B|^2` until the remaining norm drops below
/// `residual_tol`.
fn time_stepping_profile(
    params: &ModelParams,
    boundary: BoundaryCondition,
    opts: &LossOptions,
) -> Result<LossProfile> {
    let h = build_sparse_hamiltonian(params, boundary)?;
    let n = params.dim();
    let l = params.length;
    let two_gamma = 2.0 * params.gamma;
    let mut rhs = |_t: f64, y: &[C], dy: &mut [C]| {
        h.mul_vec_into(&y[..n], &mut dy[..n]);
        for v in dy[..n].iter_mut() {
            *v = C::new(v.im, -v.re);
        }
        for x in 0..l {
            dy[n + x] = C::new(two_gamma * y[2 * x + 1].norm_sqr(), 0.0);
        }
    };
    let mut y0 = initial_state(params);
    y0.resize(n + l, C::new(0.0, 0.0));
    let mut stepper = Dopri5::new(0.0, y0, initial_step(&h), opts.ode);
    let norm = |y: &[C]| y[..n].iter().map(|a| a.norm_sqr()).sum::<f64>();
    while norm(&stepper.y) > opts.residual_tol {
        if stepper.t >= opts.max_time {
            return Err(Error::Convergence {
                what: "loss accumulation (residual norm)",
                achieved: norm(&stepper.y),
                required: opts.residual_tol,
            });
        }
        stepper.step(&mut rhs, opts.max_time)?;
    }
    let p = stepper.y[n..].iter().map(|a| a.re).collect();
    Ok(LossProfile::new(
        p,
        norm(&stepper.y),
        Some(stepper.t),
        LossMethod::TimeStepping,
        params.x0,
    ))
}

/// Frequency integration settings for the Green's-function oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaQuadrature {
    /// Half-width of the finite core window; the default covers the
    /// spectral support, `|t1| + 2|t2| + 1`.
    pub core_half_width: Option<f64>,
    pub core_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Also evaluate at `eta/2` and extrapolate linearly to `eta -> 0`.
    pub richardson: bool,
}

impl Default for OmegaQuadrature {
    fn default() -> Self {
        Self {
            core_half_width: None,
            core_panels: 128,
            abs_tol: 1e-13,
            rel_tol: 1e-7,
            max_evals: 4_000_000,
            richardson: true,
        }
    }
}

pub const DEFAULT_ORACLE_ETA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleProfile {
    pub sites: Vec<usize>,
    pub value: Vec<f64>,
    /// Quadrature error estimate per site.
    pub error: Vec<f64>,
    /// Contribution from outside the core window per site.
    pub tail: Vec<f64>,
    /// `|P(eta) - P(eta/2)|`; zero when the Richardson check is off.
    pub eta_sensitivity: Vec<f64>,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub error: f64,
    pub tail: f64,
    pub eta_sensitivity: f64,
}

/// `(gamma/pi) ∫ |<x,B|(omega + i eta - H)^{-1}|x0,A>|^2 domega` for each
/// requested site of the open chain.
pub fn green_function_loss_profile(
    params: &ModelParams,
    sites: &[usize],
    quad: &OmegaQuadrature,
    eta: f64,
) -> Result<OracleProfile> {
    params.validate()?;
    if params.gamma <= 0.0 {
        return Err(Error::Domain("the Green's-function oracle needs gamma > 0".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be > 0, got {eta}")));
    }
    if let Some(&bad) = sites.iter().find(|&&x| x < 1 || x > params.length) {
        return Err(Error::InvalidParams(format!("site {bad} outside 1..={}", params.length)));
    }
    let first = oracle_pass(params, sites, quad, eta)?;
    if !quad.richardson {
        return Ok(OracleProfile {
            sites: sites.to_vec(),
            eta_sensitivity: vec![0.0; sites.len()],
            value: first.value,
            error: first.error,
            tail: first.tail,
            eta,
        });
    }
    let half = oracle_pass(params, sites, quad, 0.5 * eta)?;
    let value = first
        .value
        .iter()
        .zip(&half.value)
        .map(|(a, b)| 2.0 * b - a)
        .collect();
    let eta_sensitivity = first
        .value
        .iter()
        .zip(&half.value)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let error = first
        .error
        .iter()
        .zip(&half.error)
        .map(|(a, b)| a + 2.0 * b)
        .collect();
    Ok(OracleProfile {
        sites: sites.to_vec(),
        value,
        error,
        tail: half.tail,
        eta_sensitivity,
        eta,
    })
}

pub fn green_function_loss_oracle(
    params: &ModelParams,
    x: usize,
    quad: &OmegaQuadrature,
    eta: f64,
) -> Result<OracleValue> {
    let r = green_function_loss_profile(params, &[x], quad, eta)?;
    Ok(OracleValue {
        value: r.value[0],
        error: r.error[0],
        tail: r.tail[0],
        eta_sensitivity: r.eta_sensitivity[0],
    })
}

struct Pass {
    value: Vec<f64>,
    error: Vec<f64>,
    tail: Vec<f64>,
}

fn oracle_pass(params: &ModelParams, sites: &[usize], quad: &OmegaQuadrature, eta: f64) -> Result<Pass> {
    let h = build_real_space_hamiltonian(params, BoundaryCondition::Obc)?.matrix;
    let n = params.dim();
    let source = site_index(params.x0, Chain::A);
    let rows: Vec<usize> = sites.iter().map(|&x| site_index(x, Chain::B)).collect();
    let prefactor = params.gamma / std::f64::consts::PI;
    let mut rhs = vec![C::new(0.0, 0.0); n];
    rhs[source] = C::new(1.0, 0.0);
    let mut failure: Option<Error> = None;
    let integrand = |omega: f64| -> Vec<f64> {
        let z = C::new(omega, eta);
        let entry = |i: usize, j: usize| if i == j { z - h[(i, j)] } else { -h[(i, j)] };
        match solve_banded(n, 3, 3, entry, &rhs) {
            Ok(g) => rows.iter().map(|&r| prefactor * g[r].norm_sqr()).collect(),
            Err(e) => {
                failure.get_or_insert(e);
                vec![0.0; rows.len()]
            }
        }
    };
    let w = quad
        .core_half_width
        .unwrap_or(params.t1.abs() + 2.0 * params.t2.abs() + 1.0);
    let r = integrate_real_line(
        integrand,
        -w,
        w,
        quad.core_panels,
        &QuadratureOptions {
            abs_tol: quad.abs_tol,
            rel_tol: quad.rel_tol,
            max_evals: quad.max_evals,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    Ok(Pass {
        value: r.value,
        error: r.error,
        tail: r.tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(gamma: f64) -> ModelParams {
        ModelParams::new(0.3, 0.5, gamma, 12, 8).unwrap()
    }

    #[test]
    fn hermitian_evolution_preserves_norm() {
        let p = small(0.0);
        let snaps = evolve(&p, BoundaryCondition::Obc, 30.0, &[0.0, 5.0, 30.0]).unwrap();
        for s in &snaps {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
        }
        assert_eq!(snaps[0].site_probability(8), 1.0);
    }

    #[test]
    fn norm_decreases_with_loss() {
        let p = small(0.8);
        let times: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let snaps = evolve(&p, BoundaryCondition::Obc, 20.0, &times).unwrap();
        for w in snaps.windows(2) {
            assert!(w[1].norm_sqr() <= w[0].norm_sqr() + 1e-9);
        }
    }

    #[test]
    fn evolve_matches_matrix_exponential_on_dimer_ring() {
        // Two-site ring: compare with a dense eigen-expansion of exp(-iHt).
        let p = ModelParams::new(0.4, 0.3, 0.5, 2, 1).unwrap();
        let h = build_real_space_hamiltonian(&p, BoundaryCondition::Pbc).unwrap().matrix;
        let s = ComplexSchur::new(&h).unwrap();
        let v = s.eigenvectors();
        let vinv = v.clone().try_inverse().unwrap();
        let t = 3.7;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            4,
            s.eigenvalues().iter().map(|e| (C::new(0.0, -t) * e).exp()),
        ));
        let u = &v * d * vinv;
        let snap = &evolve(&p, BoundaryCondition::Pbc, t, &[t]).unwrap()[0];
        let psi0 = DVector::from_vec(initial_state(&p));
        let exact = u * psi0;
        assert!((snap.amps_a[0] - exact[0]).norm() < 1e-8);
        assert!((snap.amps_b[1] - exact[3]).norm() < 1e-8);
    }

    #[test]
    fn evolve_validates_times() {
        let p = small(0.5);
        assert!(evolve(&p, BoundaryCondition::Obc, 0.0, &[]).is_err());
        assert!(evolve(&p, BoundaryCondition::Obc, 1.0, &[0.5, 0.2]).is_err());
        assert!(evolve(&p, BoundaryCondition::Obc, 1.0, &[2.0]).is_err());
    }

    #[test]
    fn light_cone() {
        let p = ModelParams::new(0.3, 0.5, 1.0, 60, 30).unwrap();
        let t = 2.0;
        let snap = &evolve(&p, BoundaryCondition::Obc, t, &[t]).unwrap()[0];
        let reach = (2.0 * 0.5 * t).ceil() as usize + 8;
        let outside: f64 = (1..=60usize)
            .filter(|x| x.abs_diff(30) > reach)
            .map(|x| snap.site_probability(x))
            .sum();
        assert!(outside < 1e-10, "{outside}");
    }

    #[test]
    fn lossless_requires_flag() {
        let p = small(0.0);
        assert!(loss_profile(&p, BoundaryCondition::Obc, 1e-8).is_err());
        let prof = loss_profile_with(
            &p,
            BoundaryCondition::Obc,
            &LossOptions {
                allow_lossless: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(prof.method, LossMethod::Lossless);
        assert_eq!(prof.total(), 0.0);
        assert_eq!(prof.residual_norm, 1.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(loss_profile(&small(1.0), BoundaryCondition::Obc, 0.0).is_err());
        assert!(loss_profile(&small(1.0), BoundaryCondition::Obc, 1.0).is_err());
    }

    fn profile(p: &ModelParams, strategy: LossStrategy) -> LossProfile {
        loss_profile_with(
            p,
            BoundaryCondition::Obc,
            &LossOptions {
                strategy,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn three_methods_agree() {
        for (t1, gamma, l, x0) in [(0.3, 1.0, 14, 10), (0.7, 0.4, 10, 3), (0.2, 5.0, 16, 16)] {
            let p = ModelParams::new(t1, 0.5, gamma, l, x0).unwrap();
            let eig = profile(&p, LossStrategy::EigenClosedForm);
            let sch = profile(&p, LossStrategy::SchurLyapunov);
            let ts = profile(&p, LossStrategy::TimeStepping);
            assert_eq!(eig.method, LossMethod::EigenClosedForm);
            assert_eq!(sch.method, LossMethod::SchurLyapunov);
            assert_eq!(ts.method, LossMethod::TimeStepping);
            assert!(ts.residual_norm <= 1e-8);
            for x in 1..=l {
                let (a, b, c) = (eig.at(x), sch.at(x), ts.at(x));
                if a > 1e-6 {
                    assert!((a - b).abs() < 1e-9 * a.max(1e-3), "site {x}: {a} vs {b}");
                    assert!((a - c).abs() < 5e-3 * a, "site {x}: {a} vs {c}");
                }
            }
            for prof in [&eig, &sch, &ts] {
                assert!(prof.conservation_defect() < 1e-6);
                assert!(prof.caches_consistent());
                assert!(prof.p.iter().all(|&v| v >= -1e-15));
            }
        }
    }

    #[test]
    fn auto_falls_back_on_ill_conditioned_basis() {
        let p = ModelParams::new(0.3, 0.5, 1.0, 60, 50).unwrap();
        let prof = loss_profile(&p, BoundaryCondition::Obc, 1e-8).unwrap();
        assert_eq!(prof.method, LossMethod::SchurLyapunov);
        assert!(prof.conservation_defect() < 1e-8);
    }

    #[test]
    fn periodic_dark_modes_force_time_stepping() {
        // |t1| <= |t2| on a ring with k0 on the grid: a mode with Im E = 0.
        let p = ModelParams::new(0.5, 0.5, 1.0, 8, 4).unwrap();
        let opts = LossOptions {
            max_time: 200.0,
            ..Default::default()
        };
        match loss_profile_with(&p, BoundaryCondition::Pbc, &opts) {
            Err(Error::Convergence { achieved, .. }) => assert!(achieved > 1e-8),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn oracle_matches_profile_on_short_chain() {
        let p = ModelParams::new(0.3, 0.5, 1.0, 12, 8).unwrap();
        let prof = profile(&p, LossStrategy::SchurLyapunov);
        let sites: Vec<usize> = (1..=12).collect();
        let o = green_function_loss_profile(&p, &sites, &OmegaQuadrature::default(), DEFAULT_ORACLE_ETA).unwrap();
        for (i, &x) in sites.iter().enumerate() {
            let a = prof.at(x);
            if a > 1e-6 {
                assert!((o.value[i] - a).abs() < 1e-3 * a, "site {x}: {} vs {a}", o.value[i]);
            }
            assert!(o.tail[i] >= 0.0 && o.tail[i] < 0.05 * o.value[i].max(1e-12));
        }
    }

    #[test]
    fn oracle_vanishes_with_gamma() {
        let p = ModelParams::new(0.3, 0.5, 1.0, 10, 6).unwrap();
        let quad = OmegaQuadrature {
            richardson: false,
            ..Default::default()
        };
        let big = green_function_loss_oracle(&p, 6, &quad, 1e-3).unwrap().value;
        let tiny = green_function_loss_oracle(&p.with_gamma(1e-6), 6, &quad, 1e-3).unwrap().value;
        assert!(tiny < 0.05 * big, "{tiny} vs {big}");
        assert!(green_function_loss_oracle(&p.with_gamma(0.0), 6, &quad, 1e-3).is_err());
        assert!(green_function_loss_oracle(&p, 11, &quad, 1e-3).is_err());
    }
}
