// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Velocity-resolved Lyapunov exponents from complex saddle points of the
//! Bloch dispersion, with a direct-evolution oracle.
//!
//! Along the ray `x = x0 + v t` the amplitude behaves as `exp(lambda(v) t)`.
//! Deforming the momentum contour to `Im k = kappa` bounds the growth rate by
//! `max_q Im E(q + i kappa) - kappa v`; the effective saddle is the one that
//! attains the minimum of this bound over `kappa`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::model::{BoundaryCondition, ModelParams};
use crate::quadrature::golden_section_min;

type C = Complex64;

/// Coefficients of `s(k) = c + a e^{ik} + b e^{-ik}`. The exponential form
/// avoids cancellation between `sin k` and `cos k` deep in the complex plane.
fn s_coefficients(p: &ModelParams) -> (f64, f64, f64) {
    let (t1, t2, g) = (p.t1, p.t2, p.gamma);
    (t1 * t1 + t2 * t2 - 0.25 * g * g, t2 * (t1 + 0.5 * g), t2 * (t1 - 0.5 * g))
}

/// `s(k) = (E + i gamma/2)^2`, so that `E = -i gamma/2 ± sqrt(s)`; equal to
/// `t1^2 + t2^2 - gamma^2/4 + i gamma t2 sin k + 2 t1 t2 cos k`.
pub fn s_of_k(p: &ModelParams, k: C) -> C {
    let (c, a, b) = s_coefficients(p);
    let e = (C::i() * k).exp();
    C::new(c, 0.0) + e * a + b / e
}

fn ds_of_k(p: &ModelParams, k: C) -> C {
    let (_, a, b) = s_coefficients(p);
    let e = (C::i() * k).exp();
    C::i() * (e * a - b / e)
}

fn d2s_of_k(p: &ModelParams, k: C) -> C {
    let (_, a, b) = s_coefficients(p);
    let e = (C::i() * k).exp();
    -(e * a + b / e)
}

/// Both band energies at complex momentum `k` (unordered).
pub fn dispersion(params: &ModelParams, k: C) -> [C; 2] {
    let shift = C::new(0.0, -0.5 * params.gamma);
    let root = s_of_k(params, k).sqrt();
    [shift + root, shift - root]
}

/// A saddle of one band, `dE/dk = v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    pub v: f64,
    pub k_s: C,
    pub e_s: C,
    pub lambda: f64,
    /// `+1` when `E + i gamma/2` is the principal square root of `s(k_s)`,
    /// `-1` otherwise.
    pub branch: i8,
    pub effective: bool,
    /// `|dE/dk - v|` at `k_s`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSearch {
    /// Half-height of the strip `|Im k| <= k_max`.
    pub k_max: f64,
    pub re_starts: usize,
    pub im_starts: usize,
    pub dedup_tol: f64,
    pub max_iter: usize,
}

impl Default for SaddleSearch {
    fn default() -> Self {
        Self {
            k_max: 3.0,
            re_starts: 24,
            im_starts: 13,
            dedup_tol: 1e-8,
            max_iter: 80,
        }
    }
}

fn wrap_re(k: C) -> C {
    let re = (k.re + PI).rem_euclid(2.0 * PI) - PI;
    C::new(re, k.im)
}

fn make_saddle(p: &ModelParams, v: f64, k: C, e: C) -> SaddleResult {
    let root = e + C::new(0.0, 0.5 * p.gamma);
    let principal = s_of_k(p, k).sqrt();
    let branch = if (root - principal).norm() <= (root + principal).norm() { 1 } else { -1 };
    let slope = ds_of_k(p, k) / (root * 2.0);
    SaddleResult {
        v,
        k_s: k,
        e_s: e,
        lambda: (e - k * v).im,
        branch,
        effective: false,
        residual: (slope - v).norm(),
    }
}

/// All saddles of both bands in the strip, by multi-start Newton on
/// `s'(k)^2 - 4 v^2 s(k)` (or `s'(k)` at `v = 0`).
pub fn find_saddles_in(params: &ModelParams, v: f64, search: &SaddleSearch) -> Result<Vec<SaddleResult>> {
    params.validate()?;
    if !v.is_finite() {
        return Err(Error::InvalidParams("velocity must be finite".into()));
    }
    // Below this speed the quartic's double roots make Newton stall; the
    // stationary condition is solved instead, with residual `|v|`.
    let zero_v = v.abs() < 1e-12;
    let v2 = 4.0 * v * v;
    let target = |k: C| -> (C, C) {
        let s1 = ds_of_k(params, k);
        if zero_v {
            (s1, d2s_of_k(params, k))
        } else {
            let s0 = s_of_k(params, k);
            let s2 = d2s_of_k(params, k);
            (s1 * s1 - s0 * v2, s1 * s2 * 2.0 - s1 * v2)
        }
    };
    let scale = params.t1.abs().max(params.t2.abs()).max(params.gamma).powi(2).max(1e-300);
    let mut found: Vec<SaddleResult> = Vec::new();
    let starts = search.re_starts * search.im_starts;
    for a in 0..search.re_starts {
        for b in 0..search.im_starts {
            let re = -PI + 2.0 * PI * (a as f64 + 0.5) / search.re_starts as f64;
            let im = if search.im_starts == 1 {
                0.0
            } else {
                -search.k_max + 2.0 * search.k_max * b as f64 / (search.im_starts - 1) as f64
            };
            let mut k = C::new(re, im);
            let mut converged = false;
            for _ in 0..search.max_iter {
                let (g, dg) = target(k);
                if dg.norm() == 0.0 || !dg.is_finite() {
                    break;
                }
                let step = g / dg;
                k -= step;
                if !k.is_finite() || k.im.abs() > search.k_max + 2.0 {
                    break;
                }
                if step.norm() < 1e-14 * (1.0 + k.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                continue;
            }
            let k = wrap_re(k);
            if k.im.abs() > search.k_max + 1e-9 {
                continue;
            }
            let candidates: Vec<C> = if zero_v {
                dispersion(params, k).to_vec()
            } else {
                let s0 = s_of_k(params, k);
                // At a branch point both conditions hold trivially; skip it.
                if s0.norm() < 1e-12 * scale {
                    continue;
                }
                vec![C::new(0.0, -0.5 * params.gamma) + ds_of_k(params, k) / (2.0 * v)]
            };
            for e in candidates {
                let saddle = make_saddle(params, v, k, e);
                if !(saddle.residual < 1e-9) {
                    continue;
                }
                let duplicate = found.iter().any(|f| {
                    let dk = wrap_re(f.k_s - k);
                    dk.norm() < search.dedup_tol && (f.e_s - e).norm() < search.dedup_tol.sqrt()
                });
                if !duplicate {
                    found.push(saddle);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoSaddles { v, starts });
    }
    found.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(found)
}

pub fn find_saddles(params: &ModelParams, v: f64) -> Result<Vec<SaddleResult>> {
    find_saddles_in(params, v, &SaddleSearch::default())
}

/// `max_q max_band Im E(q + i kappa)`.
pub fn contour_top(params: &ModelParams, kappa: f64) -> f64 {
    let f = |q: f64| s_of_k(params, C::new(q, kappa)).sqrt().im.abs();
    let n = 256;
    let dq = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|j| f(-PI + dq * j as f64)).collect();
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for j in 0..n {
        let (prev, next) = (vals[(j + n - 1) % n], vals[(j + 1) % n]);
        if vals[j] >= prev && vals[j] >= next && vals[j] >= best - 1e-2 * (1.0 + best.abs()) {
            let q = -PI + dq * j as f64;
            let (_, neg) = golden_section_min(|x| -f(x), q - dq, q + dq, 1e-11);
            best = best.max(-neg);
        }
    }
    best - 0.5 * params.gamma
}

/// Contour bound `lambda*(v) = min_kappa [contour_top(kappa) - kappa v]` over
/// `|kappa| <= k_max`. Returns `(lambda*, kappa*)`.
pub fn contour_bound(params: &ModelParams, v: f64, k_max: f64) -> (f64, f64) {
    let f = |kappa: f64| contour_top(params, kappa) - kappa * v;
    let n = ((2.0 * k_max / 0.05).ceil() as usize).max(8);
    let dk = 2.0 * k_max / n as f64;
    let mut best = (0.0, f64::INFINITY);
    for j in 0..=n {
        let kappa = -k_max + dk * j as f64;
        let val = f(kappa);
        if val < best.1 {
            best = (kappa, val);
        }
    }
    let lo = (best.0 - dk).max(-k_max);
    let hi = (best.0 + dk).min(k_max);
    let (kappa, val) = golden_section_min(f, lo, hi, 1e-10);
    if val < best.1 {
        (val, kappa)
    } else {
        (best.1, best.0)
    }
}

/// Lyapunov exponent together with the selected saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovPoint {
    pub v: f64,
    pub lambda: f64,
    /// Contour bound at the same velocity.
    pub bound: f64,
    pub kappa: f64,
    pub saddle: SaddleResult,
}

/// Effective saddle: the one whose exponent equals the contour bound, ties
/// broken by closeness of `Im k_s` to the optimal contour height.
pub fn lyapunov_point(params: &ModelParams, v: f64, search: &SaddleSearch) -> Result<LyapunovPoint> {
    let saddles = find_saddles_in(params, v, search)?;
    let (bound, kappa) = contour_bound(params, v, search.k_max);
    let tol = 1e-6 * (1.0 + bound.abs());
    let best = saddles
        .iter()
        .filter(|s| (s.lambda - bound).abs() <= tol)
        .min_by(|a, b| (a.k_s.im - kappa).abs().total_cmp(&(b.k_s.im - kappa).abs()))
        .copied();
    match best {
        Some(mut s) => {
            s.effective = true;
            Ok(LyapunovPoint {
                v,
                lambda: s.lambda,
                bound,
                kappa,
                saddle: s,
            })
        }
        None => Err(Error::NoEffectiveSaddle { v, bound }),
    }
}

pub fn lyapunov_exponent(params: &ModelParams, v: f64) -> Result<f64> {
    Ok(lyapunov_point(params, v, &SaddleSearch::default())?.lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub v: f64,
    pub lambda: Option<f64>,
    pub bound: f64,
    pub k_s: Option<C>,
    /// The effective saddle jumps between this point and the previous one.
    pub kink: bool,
}

/// `lambda(v)` over a velocity grid; failures leave `lambda = None` with the
/// contour bound still reported.
pub fn lyapunov_curve(params: &ModelParams, vs: &[f64]) -> Result<Vec<CurvePoint>> {
    params.validate()?;
    let search = SaddleSearch::default();
    let mut out: Vec<CurvePoint> = Vec::with_capacity(vs.len());
    for &v in vs {
        let point = match lyapunov_point(params, v, &search) {
            Ok(pt) => CurvePoint {
                v,
                lambda: Some(pt.lambda),
                bound: pt.bound,
                k_s: Some(pt.saddle.k_s),
                kink: false,
            },
            Err(_) => CurvePoint {
                v,
                lambda: None,
                bound: contour_bound(params, v, search.k_max).0,
                k_s: None,
                kink: false,
            },
        };
        let kink = match (out.last().and_then(|p| p.k_s), point.k_s) {
            (Some(a), Some(b)) => wrap_re(a - b).norm() > 0.25,
            _ => false,
        };
        out.push(CurvePoint { kink, ..point });
    }
    Ok(out)
}

/// Chain geometry for the direct-evolution oracle: the excitation sits far
/// enough from both ends that nothing reaches a boundary by `t_obs`.
pub fn oracle_params(base: &ModelParams, t_obs: f64) -> Result<ModelParams> {
    let reach = ((base.t1.abs() + 2.0 * base.t2.abs()) * t_obs).ceil() as usize + 10;
    ModelParams::new(base.t1, base.t2, base.gamma, 2 * reach + 1, reach + 1)
}

/// Growth rates along several rays from one evolution: slope of
/// `ln sqrt(|psi_x^A|^2 + |psi_x^B|^2)` at `x = x0 + round(v t)` against `t`
/// over `[t_obs/2, t_obs]`.
pub fn lyapunov_numeric_oracle_many(params: &ModelParams, vs: &[f64], t_obs: f64) -> Result<Vec<f64>> {
    params.validate()?;
    if !(t_obs > 0.0 && t_obs.is_finite()) {
        return Err(Error::InvalidParams(format!("t_obs must be > 0, got {t_obs}")));
    }
    let samples = 201;
    let times: Vec<f64> = (0..samples)
        .map(|j| 0.5 * t_obs + 0.5 * t_obs * j as f64 / (samples - 1) as f64)
        .collect();
    let site = |v: f64, t: f64| params.x0 as f64 + (v * t).round();
    for &v in vs {
        for &t in [times[0], t_obs].iter() {
            let x = site(v, t);
            if x < 1.0 || x > params.length as f64 {
                return Err(Error::Domain(format!(
                    "ray v = {v} leaves the chain (site {x} at t = {t})"
                )));
            }
        }
    }
    let snaps = evolve(params, BoundaryCondition::Obc, t_obs, &times)?;
    vs.iter()
        .map(|&v| {
            let ys: Vec<f64> = snaps
                .iter()
                .map(|s| 0.5 * s.site_probability(site(v, s.time) as usize).ln())
                .collect();
            Ok(fit_line(&times, &ys)?.slope)
        })
        .collect()
}

pub fn lyapunov_numeric_oracle(params: &ModelParams, v: f64, t_obs: f64) -> Result<f64> {
    Ok(lyapunov_numeric_oracle_many(params, &[v], t_obs)?[0])
}

/// Largest `Im k` of a zero-velocity saddle the proxy resolves
/// (`r_G > e^{-30}`).
pub const MAX_SADDLE_DEPTH: f64 = 30.0;

/// `|d lambda / dv|` at `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringProxy {
    pub value: f64,
    /// The effective saddle changes across `v = 0`; `value` is a one-sided
    /// difference.
    pub one_sided: bool,
    /// Difference between the step-`h` and step-`h/2` estimates.
    pub richardson_delta: f64,
}

/// Central difference with `h = 1e-3` and one Richardson step. The strip is
/// widened when the zero-velocity saddle sits deep in the complex plane
/// (`Im k_s = -ln r_G`, unbounded as `r_G -> 0`). Beyond
/// [`MAX_SADDLE_DEPTH`] the chain is treated as unidirectional: no
/// rightward ray survives and the value is `+inf`.
pub fn dlambda_dv_at_zero(params: &ModelParams) -> Result<ScatteringProxy> {
    params.validate()?;
    let h: f64 = 1e-3;
    let rg = params.root_product().abs().sqrt();
    let depth = if rg > 0.0 { -rg.ln() } else { f64::INFINITY };
    if depth > MAX_SADDLE_DEPTH {
        return Ok(ScatteringProxy {
            value: f64::INFINITY,
            one_sided: false,
            richardson_delta: 0.0,
        });
    }
    let k_max = 3.0f64.max(depth + 3.0);
    let search = SaddleSearch {
        k_max,
        im_starts: ((k_max / 0.5).ceil() as usize * 2 + 1).max(13),
        ..Default::default()
    };
    let at = |v: f64| lyapunov_point(params, v, &search);
    let (plus, minus) = (at(h)?, at(-h)?);
    let (plus2, minus2) = (at(0.5 * h)?, at(-0.5 * h)?);
    let continuous = |a: &LyapunovPoint, b: &LyapunovPoint| wrap_re(a.saddle.k_s - b.saddle.k_s).norm() < 0.1;
    if continuous(&plus, &minus) {
        let d1 = (plus.lambda - minus.lambda) / (2.0 * h);
        let d2 = (plus2.lambda - minus2.lambda) / h;
        let value = (4.0 * d2 - d1) / 3.0;
        return Ok(ScatteringProxy {
            value: value.abs(),
            one_sided: false,
            richardson_delta: (d2 - d1).abs(),
        });
    }
    // Saddle exchange at v = 0: use the side continuous with v = 0.
    let zero = at(0.0)?;
    let (outer, inner, sign) = if continuous(&plus, &zero) {
        (plus, plus2, 1.0)
    } else {
        (minus, minus2, -1.0)
    };
    let d1 = sign * (outer.lambda - zero.lambda) / h;
    let d2 = sign * (inner.lambda - zero.lambda) / (0.5 * h);
    Ok(ScatteringProxy {
        value: (2.0 * d2 - d1).abs(),
        one_sided: true,
        richardson_delta: (d2 - d1).abs(),
    })
}

/// Velocity maximizing `lambda(v)` on a 0.01 grid.
pub fn dominant_velocity(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.t1.abs() > params.t2.abs() {
        return Err(Error::Domain(
            "dominant velocity is defined for the gap-closing regime |t1| <= |t2|".into(),
        ));
    }
    let step = 0.01;
    let reach = ((params.t1.abs() + params.t2.abs()) / step).ceil() as i64 + 5;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for j in -reach..=reach {
        let v = j as f64 * step;
        if let Ok(l) = lyapunov_exponent(params, v) {
            pts.push((v, l));
        }
    }
    if pts.len() < 3 {
        return Err(Error::Ambiguous("lambda(v) unavailable on the velocity grid".into()));
    }
    let (vmax, lmax) = pts.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let lmin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if lmax - lmin < 1e-9 {
        return Err(Error::Ambiguous("lambda(v) is flat on the velocity grid".into()));
    }
    let rivals = pts
        .iter()
        .filter(|p| (p.0 - vmax).abs() > 1.5 * step && lmax - p.1 < 1e-12)
        .count();
    if rivals > 0 {
        return Err(Error::Ambiguous(format!(
            "lambda(v) attains its maximum {lmax} at separated velocities"
        )));
    }
    Ok(vmax)
}
