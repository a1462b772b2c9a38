// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form and semi-analytic loss estimates: the bulk power law and edge
//! loss with a closed imaginary gap, and the edge loss with an open gap
//! together with its expansion around `omega = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::dlambda_dv_at_zero;
use crate::model::ModelParams;
use crate::quadrature::{integrate_real_line, QuadratureOptions};
use crate::spectral::{beta_roots, f_factor, left_root_and_factor};

type C = Complex64;

/// `Gamma(3/2) = sqrt(pi) / 2`.
pub const GAMMA_3_2: f64 = 0.886_226_925_452_758;

/// `|d lambda / dv|` at `v = 0` above which boundary scattering is weak.
pub const WEAK_SCATTERING_THRESHOLD: f64 = 0.3;

/// Expansion of `|f_L|^2 ≈ Q dw^2` and `|beta_L| ≈ exp(K dw^2)` around the
/// real frequency `omega0` where the imaginary gap closes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingExpansion {
    pub k0: f64,
    pub omega0: f64,
    pub q: f64,
    pub k: f64,
}

/// Couplings are taken by magnitude, so `k0 ∈ [pi/2, pi]` and `omega0 >= 0`.
pub fn closing_expansion(params: &ModelParams) -> Result<ClosingExpansion> {
    params.validate()?;
    let (t1, t2, g) = (params.t1.abs(), params.t2.abs(), params.gamma);
    if t1 == 0.0 {
        return Err(Error::Domain("t1 = 0 decouples the chains".into()));
    }
    if t1 > t2 {
        return Err(Error::Domain(format!(
            "imaginary gap is open (|t1| = {t1} > |t2| = {t2})"
        )));
    }
    if g <= 0.0 {
        return Err(Error::Domain("the closing expansion needs gamma > 0".into()));
    }
    let k0 = (-t1 / t2).acos();
    let (sin, cos) = k0.sin_cos();
    let omega0 = t2 * sin;
    let q = sin * sin / (t1 * t1 * (g * g * cos * cos + 4.0 * t1 * t1 * sin * sin));
    let k = omega0 * omega0 / t1.powi(3) * g / (4.0 * omega0 * omega0 + g * g);
    Ok(ClosingExpansion { k0, omega0, q, k })
}

fn closing_prefactor(params: &ModelParams) -> Result<(f64, ClosingExpansion)> {
    let ce = closing_expansion(params)?;
    if !(ce.omega0 > 1e-12 * params.t2.abs()) || !(ce.k > 0.0) {
        return Err(Error::Domain(format!(
            "K = {} vanishes (k0 = pi); the power-law estimate is singular",
            ce.k
        )));
    }
    Ok((params.gamma / PI * GAMMA_3_2 * ce.q * (2.0 * ce.k).powf(-1.5), ce))
}

/// Bulk loss `(2 gamma / pi) Gamma(3/2) Q (2K)^{-3/2} |x - x0|^{-3/2}` for
/// `x < x0`.
pub fn bulk_loss_asymptotic(params: &ModelParams, x: i64) -> Result<f64> {
    let (pre, _) = closing_prefactor(params)?;
    let d = params.x0 as i64 - x;
    if d <= 0 {
        return Err(Error::Domain(format!(
            "bulk estimate covers x < x0 = {}, got {x}",
            params.x0
        )));
    }
    Ok(2.0 * pre * (d as f64).powf(-1.5))
}

/// Edge loss `(4 gamma / pi) Gamma(3/2) Q (2K)^{-3/2} x0^{-1/2}`; values above
/// one signal that the estimate is outside its validity.
pub fn edge_loss_closing(params: &ModelParams) -> Result<f64> {
    if params.x0 < 2 {
        return Err(Error::Domain("edge estimate needs x0 >= 2".into()));
    }
    let (pre, _) = closing_prefactor(params)?;
    Ok(4.0 * pre / (params.x0 as f64).sqrt())
}

/// `t1`-dependence of the closing edge loss at fixed `gamma`, `t2`, `x0`:
/// `(t2^2 - t1^2)^{-1/2} t1^{1/2} (gamma^2 + 4 (t2^2 - t1^2))^{1/2}`.
pub fn edge_loss_closing_t1_scaling(t1: f64, t2: f64, gamma: f64) -> Result<f64> {
    let (t1, t2) = (t1.abs(), t2.abs());
    if t1 >= t2 {
        return Err(Error::Domain(format!("needs |t1| < |t2|, got {t1} >= {t2}")));
    }
    let w2 = t2 * t2 - t1 * t1;
    Ok(t1.sqrt() * (gamma * gamma + 4.0 * w2).sqrt() / w2.sqrt())
}

/// `gamma`-dependence of the closing edge loss:
/// `gamma^{-1/2} (4 omega0^2 + gamma^2)^{1/2}`, minimal at `gamma = 2 omega0`.
pub fn edge_loss_closing_gamma_shape(params: &ModelParams) -> Result<f64> {
    let ce = closing_expansion(params)?;
    let g = params.gamma;
    Ok((4.0 * ce.omega0 * ce.omega0 + g * g).sqrt() / g.sqrt())
}

fn open_gap_check(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.t1.abs() <= params.t2.abs() {
        return Err(Error::Domain(format!(
            "imaginary gap is closed (|t1| = {} <= |t2| = {})",
            params.t1.abs(),
            params.t2.abs()
        )));
    }
    if params.gamma <= 0.0 {
        return Err(Error::Domain("open-gap estimate needs gamma > 0".into()));
    }
    Ok(())
}

/// `sum_{m >= 0} b^{-2(x0 + m)} = b^{-2 x0} / (1 - b^{-2})` for `b = |beta_L| > 1`.
pub fn left_geometric_factor(abs_beta: f64, x0: usize) -> Result<f64> {
    if !(abs_beta > 1.0) {
        return Err(Error::Domain(format!(
            "|beta_L| = {abs_beta} <= 1: the sum over x <= 0 diverges"
        )));
    }
    let inv2 = abs_beta.powi(-2);
    Ok(inv2.powi(x0 as i32) / (1.0 - inv2))
}

fn frequency_window(params: &ModelParams) -> f64 {
    params.t1.abs() + 2.0 * params.t2.abs() + params.gamma
}

/// Edge loss with an open gap,
/// `(gamma/pi) ∫ |f_L|^2 |beta_L|^{-2 x0} / (1 - |beta_L|^{-2}) domega`.
pub fn edge_loss_opening(params: &ModelParams, quad_tol: f64) -> Result<f64> {
    open_gap_check(params)?;
    let mut failure = None;
    let integrand = |omega: f64| -> Vec<f64> {
        let (bl, br) = beta_roots(params, C::new(omega, 0.0));
        let f = f_factor(params, bl, br);
        match left_geometric_factor(bl.norm(), params.x0) {
            Ok(geo) => vec![params.gamma / PI * f.norm_sqr() * geo],
            Err(e) => {
                failure.get_or_insert(e);
                vec![0.0]
            }
        }
    };
    let w = frequency_window(params);
    let r = integrate_real_line(
        integrand,
        -w,
        w,
        64,
        &QuadratureOptions {
            abs_tol: 1e-300,
            rel_tol: quad_tol,
            max_evals: 2_000_000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value[0])
}

/// Low-order Taylor coefficients of an analytic function at 0 from the
/// trapezoidal rule on a circle of radius `r`.
fn taylor(f: impl Fn(C) -> C, r: f64, order: usize) -> Vec<C> {
    let n = 64;
    let mut coeffs = vec![C::new(0.0, 0.0); order + 1];
    for j in 0..n {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let z = C::from_polar(r, theta);
        let fz = f(z);
        for (m, c) in coeffs.iter_mut().enumerate() {
            *c += fz * C::from_polar(1.0, -(m as f64) * theta);
        }
    }
    coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| c / (n as f64 * r.powi(m as i32)))
        .collect()
}

/// Value and first two derivatives of `beta_L` and `f_L` at `omega = 0`, and
/// the resulting second-order expansions of their squared moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpeningExpansion {
    pub beta: C,
    pub dbeta: C,
    pub d2beta: C,
    pub f: C,
    pub df: C,
    pub d2f: C,
    /// `|beta_L|^2 ≈ beta_sq.0 + beta_sq.1 omega^2`.
    pub beta_sq: (f64, f64),
    /// `|f_L|^2 ≈ f_sq.0 + f_sq.1 omega^2`.
    pub f_sq: (f64, f64),
}

pub fn opening_expansion(params: &ModelParams) -> Result<OpeningExpansion> {
    open_gap_check(params)?;
    let r = 1e-2 * (params.t1.abs() + params.t2.abs());
    let b = taylor(|z| left_root_and_factor(params, z).0, r, 2);
    let f = taylor(|z| left_root_and_factor(params, z).1, r, 2);
    let (beta, dbeta, d2beta) = (b[0], b[1], b[2] * 2.0);
    let (fv, df, d2f) = (f[0], f[1], f[2] * 2.0);
    // |a + a' w + a'' w^2/2|^2 to second order in real w.
    let sq = |a: C, a1: C, a2: C| (a.norm_sqr(), a1.norm_sqr() + (a.conj() * a2).re);
    let e = OpeningExpansion {
        beta,
        dbeta,
        d2beta,
        f: fv,
        df,
        d2f,
        beta_sq: sq(beta, dbeta, d2beta),
        f_sq: sq(fv, df, d2f),
    };
    let all = [e.beta_sq.0, e.beta_sq.1, e.f_sq.0, e.f_sq.1];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite expansion coefficients at omega = 0".into()));
    }
    Ok(e)
}

/// Open-gap edge loss with `|beta_L|^2` and `|f_L|^2` replaced by their
/// quadratic expansions at `omega = 0` (the `|f_L|^2` parabola is cut at
/// zero). Requires `omega = 0` to be a minimum of `|beta_L|`.
pub fn edge_loss_opening_expansion(params: &ModelParams) -> Result<f64> {
    let e = opening_expansion(params)?;
    let (b0, b2) = e.beta_sq;
    let (f0, f2) = e.f_sq;
    if !(b2 > 0.0) {
        return Err(Error::Domain(format!(
            "omega = 0 is not a minimum of |beta_L| (curvature {b2:.3e})"
        )));
    }
    let x0 = params.x0;
    let integrand = |omega: f64| -> Vec<f64> {
        let bsq = b0 + b2 * omega * omega;
        let fsq = (f0 + f2 * omega * omega).max(0.0);
        let inv = 1.0 / bsq;
        vec![params.gamma / PI * fsq * inv.powi(x0 as i32) / (1.0 - inv)]
    };
    // Width of the Gaussian-like peak of bsq^{-x0}.
    let width = (b0 / (b2 * x0 as f64)).sqrt();
    let r = integrate_real_line(
        integrand,
        -10.0 * width,
        10.0 * width,
        32,
        &QuadratureOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-10,
            max_evals: 1_000_000,
        },
    )?;
    Ok(r.value[0])
}

/// Peak width of the `omega = 0` expansion, `sqrt(b0 / (b2 x0))`.
pub fn opening_expansion_width(params: &ModelParams) -> Result<f64> {
    let e = opening_expansion(params)?;
    let (b0, b2) = e.beta_sq;
    if !(b2 > 0.0) {
        return Err(Error::Domain("omega = 0 is not a minimum of |beta_L|".into()));
    }
    Ok((b0 / (b2 * params.x0 as f64)).sqrt())
}

/// An analytic estimate with the scattering indicator that marks whether the
/// estimate is expected to hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEstimate {
    pub value: f64,
    /// `|d lambda / dv|` at `v = 0`, when computable.
    pub scattering_proxy: Option<f64>,
    /// Proxy at or above [`WEAK_SCATTERING_THRESHOLD`].
    pub weak_scattering: bool,
    /// A probability estimate above one is outside its validity.
    pub physical: bool,
}

pub fn with_validity(params: &ModelParams, value: f64) -> AnalyticEstimate {
    let proxy = dlambda_dv_at_zero(params).ok().map(|p| p.value);
    AnalyticEstimate {
        value,
        scattering_proxy: proxy,
        weak_scattering: proxy.is_some_and(|p| p >= WEAK_SCATTERING_THRESHOLD),
        physical: (0.0..=1.0).contains(&value),
    }
}

pub fn edge_loss_closing_estimate(params: &ModelParams) -> Result<AnalyticEstimate> {
    Ok(with_validity(params, edge_loss_closing(params)?))
}

pub fn edge_loss_opening_estimate(params: &ModelParams, quad_tol: f64) -> Result<AnalyticEstimate> {
    Ok(with_validity(params, edge_loss_opening(params, quad_tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::spectral::{bloch_roots, dbeta_domega};

    fn p(t1: f64, gamma: f64) -> ModelParams {
        ModelParams::new(t1, 0.5, gamma, 100, 90).unwrap()
    }

    #[test]
    fn gamma_three_halves() {
        assert!((GAMMA_3_2 - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn closing_expansion_values() {
        let ce = closing_expansion(&p(0.3, 1.0)).unwrap();
        assert!((ce.k0 - (-0.6f64).acos()).abs() < 1e-15);
        assert!((ce.omega0 - 0.4).abs() < 1e-12);
        assert!((0.3 + 0.5 * ce.k0.cos()).abs() < 1e-12);
        let edge = closing_expansion(&p(0.5, 1.0)).unwrap();
        assert!((edge.k0 - PI).abs() < 1e-12 && edge.omega0.abs() < 1e-12 && edge.k.abs() < 1e-20);
        assert!(edge_loss_closing(&p(0.5, 1.0)).is_err());
        assert!(closing_expansion(&p(0.7, 1.0)).is_err());
        assert!(closing_expansion(&p(0.0, 1.0)).is_err());
    }

    #[test]
    fn k_matches_real_part_form() {
        // K = Re[gamma w0 / (t1^3 (2 w0 + i gamma))] / 2.
        for (t1, g) in [(0.3, 1.0), (0.2, 0.05), (0.45, 3.0)] {
            let ce = closing_expansion(&p(t1, g)).unwrap();
            let alt = 0.5 * (C::new(g * ce.omega0, 0.0) / (t1.powi(3) * C::new(2.0 * ce.omega0, g))).re;
            assert!((ce.k - alt).abs() < 1e-12 * ce.k);
        }
    }

    #[test]
    fn q_and_k_match_root_expansion() {
        // |f_L|^2 ≈ Q dw^2 and ln|beta_L| ≈ K dw^2 near omega0.
        let params = p(0.3, 1.0);
        let ce = closing_expansion(&params).unwrap();
        let dw = 1e-3;
        let r = bloch_roots(&params, ce.omega0 + dw, 0.0).unwrap();
        assert!((r.f_l.norm_sqr() / (dw * dw) - ce.q).abs() < 1e-2 * ce.q);
        assert!((r.beta_l.norm().ln() / (dw * dw) - ce.k).abs() < 1e-2 * ce.k);
    }

    #[test]
    fn k_peaks_at_two_omega0() {
        let base = p(0.3, 1.0);
        let ks: Vec<(f64, f64)> = (1..=200)
            .map(|i| {
                let g = 0.01 * i as f64;
                (g, closing_expansion(&base.with_gamma(g)).unwrap().k)
            })
            .collect();
        let best = ks.iter().cloned().fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!((best.0 - 0.8).abs() < 0.011);
    }

    #[test]
    fn bulk_power_law_exponent() {
        let params = p(0.3, 1.0);
        let a = bulk_loss_asymptotic(&params, 70).unwrap();
        let b = bulk_loss_asymptotic(&params, 50).unwrap();
        assert!((a / b - (20.0f64 / 40.0).powf(-1.5)).abs() < 1e-12);
        assert!(bulk_loss_asymptotic(&params, 90).is_err());
    }

    #[test]
    fn edge_is_integral_of_bulk_beyond_boundary() {
        let params = p(0.3, 1.0);
        let edge = edge_loss_closing(&params).unwrap();
        // ∫_{-inf}^0 |x - x0|^{-3/2} dx via u = x0 - x on [x0, inf), mapped to (0, 1].
        let x0 = params.x0 as f64;
        let pre = bulk_loss_asymptotic(&params, 0).unwrap() * x0.powf(1.5);
        let (tail, _) = integrate(
            |s| {
                let u = x0 / s;
                pre * u.powf(-1.5) * x0 / (s * s)
            },
            0.0,
            1.0,
            4,
            &QuadratureOptions {
                rel_tol: 1e-13,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((tail - edge).abs() < 1e-10 * edge);
    }

    #[test]
    fn t1_scaling_consistent_with_closed_form() {
        let g = 1.0;
        let base = edge_loss_closing(&p(0.1, g)).unwrap() / edge_loss_closing_t1_scaling(0.1, 0.5, g).unwrap();
        for t1 in [0.2, 0.3, 0.4, 0.45] {
            let r = edge_loss_closing(&p(t1, g)).unwrap() / edge_loss_closing_t1_scaling(t1, 0.5, g).unwrap();
            assert!((r / base - 1.0).abs() < 1e-10);
        }
        let vals: Vec<f64> = [0.1, 0.2, 0.3, 0.4]
            .iter()
            .map(|&t1| edge_loss_closing_t1_scaling(t1, 0.5, g).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!(edge_loss_closing_t1_scaling(0.5, 0.5, g).is_err());
        assert!(edge_loss_closing_t1_scaling(0.4999999, 0.5, g).unwrap() > 1e3);
    }

    #[test]
    fn gamma_shape_consistent_and_minimal_at_two_omega0() {
        for (t1, t2) in [(0.3, 0.5), (0.2, 0.5), (0.4, 0.6)] {
            let base = ModelParams::new(t1, t2, 1.0, 100, 90).unwrap();
            let omega0 = closing_expansion(&base).unwrap().omega0;
            let ratio0 = edge_loss_closing(&base).unwrap() / edge_loss_closing_gamma_shape(&base).unwrap();
            let mut best = (0.0, f64::INFINITY);
            for i in 1..=300 {
                let g = 0.02 * i as f64;
                let q = base.with_gamma(g);
                let v = edge_loss_closing(&q).unwrap();
                assert!((v / edge_loss_closing_gamma_shape(&q).unwrap() / ratio0 - 1.0).abs() < 1e-10);
                if v < best.1 {
                    best = (g, v);
                }
            }
            assert!((best.0 - 2.0 * omega0).abs() <= 0.02 + 1e-12, "{} vs {}", best.0, 2.0 * omega0);
        }
    }

    #[test]
    fn geometric_factor_matches_direct_sum() {
        for b in [1.001f64, 1.05, 1.3, 3.0] {
            let direct: f64 = (0..=2000).map(|m| b.powi(-2 * (90 + m))).sum();
            let closed = left_geometric_factor(b, 90).unwrap();
            let tail_left = b.powi(-2 * (90 + 2001)) / (1.0 - b.powi(-2));
            assert!((closed - direct - tail_left).abs() < 1e-12 * closed);
        }
        assert!(left_geometric_factor(1.0, 90).is_err());
    }

    #[test]
    fn opening_expansion_parities() {
        let params = p(0.7, 1.4);
        let e = opening_expansion(&params).unwrap();
        assert!(e.beta.im.abs() < 1e-10);
        assert!(e.dbeta.re.abs() < 1e-10);
        assert!(e.d2beta.im.abs() < 1e-8);
        assert!(e.f.im.abs() < 1e-8 && e.df.re.abs() < 1e-8 && e.d2f.im.abs() < 1e-8);
        let analytic = dbeta_domega(&params, C::new(0.0, 0.0), e.beta);
        assert!((analytic - e.dbeta).norm() < 1e-9);
        // Finite differences of f_L along the real axis.
        let h = 1e-4;
        let f = |w: f64| bloch_roots(&params, w, 0.0).unwrap().f_l;
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - f(0.0) * 2.0 + f(-h)) / (h * h);
        assert!((d1 - e.df).norm() < 1e-7);
        assert!((d2 - e.d2f).norm() < 1e-5 * (1.0 + e.d2f.norm()));
        // Quadratic form of |beta|^2 against the product rule.
        let form = e.beta * e.d2beta - e.dbeta * e.dbeta;
        assert!((form.re - e.beta_sq.1).abs() < 1e-9);
    }

    #[test]
    fn opening_estimates_are_positive_and_close() {
        let params = p(0.7, 1.4);
        let full = edge_loss_opening(&params, 1e-9).unwrap();
        let approx = edge_loss_opening_expansion(&params).unwrap();
        assert!(full > 0.0 && full < 1.0);
        assert!((approx / full - 1.0).abs() < 0.1);
        assert!(edge_loss_opening(&p(0.3, 1.0), 1e-9).is_err());
    }

    #[test]
    fn expansion_rejects_maximum_at_zero() {
        // For small gamma omega = 0 is a local maximum of |beta_L|.
        assert!(edge_loss_opening_expansion(&p(0.7, 0.3)).is_err());
    }
}
