// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-quantity tables. Sweep points run in parallel; rows keep point order.

use edgeburst_core::asymptotics::{
    edge_loss_closing_estimate, edge_loss_opening_estimate, edge_loss_opening_expansion, AnalyticEstimate,
    WEAK_SCATTERING_THRESHOLD,
};
use edgeburst_core::dynamics::{evolve, loss_profile_with, LossMethod, LossOptions, LossProfile};
use edgeburst_core::fit::{fit_line, LineFit};
use edgeburst_core::lyapunov::{dlambda_dv_at_zero, lyapunov_curve, lyapunov_numeric_oracle_many, oracle_params};
use edgeburst_core::spectral::{gbz_radius, imaginary_gap, min_abs_beta_l, obc_spectrum, pbc_spectrum};
use edgeburst_core::{BoundaryCondition, Error as CoreError, ModelParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{describe, Quantity, Settings};
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

/// Everything a quantity needs besides its parameter points.
#[derive(Debug, Clone)]
pub struct Context {
    pub boundary: BoundaryCondition,
    pub settings: Settings,
}

impl Context {
    pub fn loss_options(&self) -> LossOptions {
        LossOptions {
            residual_tol: self.settings.residual_tol,
            ..Default::default()
        }
    }

    /// Sidecar `tolerances` block.
    pub fn tolerances(&self) -> Value {
        json!({
            "settings": self.settings,
            "loss": self.loss_options(),
            "weak_scattering_threshold": WEAK_SCATTERING_THRESHOLD,
        })
    }
}

pub fn params_json(p: &ModelParams) -> Value {
    json!({"t1": p.t1, "t2": p.t2, "gamma": p.gamma, "length": p.length, "x0": p.x0})
}

fn method_name(m: LossMethod) -> String {
    match serde_json::to_value(m) {
        Ok(Value::String(s)) => s,
        _ => format!("{m:?}"),
    }
}

/// Domain errors mark estimates that do not apply at a point.
fn or_nan(r: edgeburst_core::Result<f64>) -> edgeburst_core::Result<f64> {
    match r {
        Err(CoreError::Domain(_)) => Ok(f64::NAN),
        r => r,
    }
}

fn par_map<T: Send>(
    points: &[ModelParams],
    f: impl Fn(&ModelParams) -> edgeburst_core::Result<T> + Sync,
) -> Result<Vec<T>> {
    points
        .par_iter()
        .map(|p| f(p).map_err(|e| CliError::from_core(describe(p), e)))
        .collect()
}

fn new_table(name: &str, quantity: &str, columns: Vec<&'static str>, points: &[ModelParams]) -> Table {
    let mut t = Table::new(name, quantity, columns);
    t.params = points.iter().map(params_json).collect();
    t
}

fn base_cells(p: &ModelParams) -> Vec<Cell> {
    vec![p.t1.into(), p.t2.into(), p.gamma.into()]
}

fn chain_cells(p: &ModelParams) -> Vec<Cell> {
    vec![p.t1.into(), p.t2.into(), p.gamma.into(), p.length.into(), p.x0.into()]
}

pub fn compute(quantity: Quantity, ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    match quantity {
        Quantity::LossProfile => loss_profile_table(ctx, points, name),
        Quantity::P1VsGamma => p1_table(ctx, points, name),
        Quantity::Spectra => spectra_table(ctx, points, name),
        Quantity::Gbz => gbz_table(ctx, points, name),
        Quantity::LyapunovCurve => lyapunov_table(ctx, points, name),
        Quantity::Dlambda0 => dlambda0_table(points, name),
        Quantity::AnalyticOverlays => overlays_table(ctx, points, name),
    }
}

fn profiles(ctx: &Context, points: &[ModelParams]) -> Result<Vec<LossProfile>> {
    let opts = ctx.loss_options();
    par_map(points, |p| loss_profile_with(p, ctx.boundary, &opts))
}

pub fn loss_profile_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let profs = profiles(ctx, points)?;
    let mut t = new_table(
        name,
        "loss_profile",
        vec!["t1", "t2", "gamma", "length", "x0", "boundary", "x", "P_x", "method"],
        points,
    );
    t.boundary = Some(ctx.boundary.to_string());
    let mut diagnostics = Vec::new();
    for (p, prof) in points.iter().zip(&profs) {
        let method = method_name(prof.method);
        for (i, &px) in prof.p.iter().enumerate() {
            let mut row = chain_cells(p);
            row.extend([ctx.boundary.to_string().into(), (i + 1).into(), px.into(), method.clone().into()]);
            t.push(row);
        }
        t.count_method(method, prof.p.len());
        diagnostics.push(json!({
            "residual_norm": prof.residual_norm,
            "t_final": prof.t_final,
            "conservation_defect": prof.conservation_defect(),
        }));
    }
    t.extra.insert("diagnostics".into(), Value::Array(diagnostics));
    Ok(t)
}

/// Closing-gap estimate for `|t1| <= |t2|`, open-gap integral otherwise.
fn analytic_estimate(ctx: &Context, p: &ModelParams) -> edgeburst_core::Result<Option<AnalyticEstimate>> {
    let r = if p.gap_closing() {
        edge_loss_closing_estimate(p)
    } else {
        edge_loss_opening_estimate(p, ctx.settings.quad_tol)
    };
    match r {
        Ok(e) => Ok(Some(e)),
        Err(CoreError::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn proxy_value(p: &ModelParams) -> edgeburst_core::Result<f64> {
    or_nan(dlambda_dv_at_zero(p).map(|d| d.value))
}

pub fn p1_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let opts = ctx.loss_options();
    let rows = par_map(points, |p| {
        let prof = loss_profile_with(p, ctx.boundary, &opts)?;
        let analytic = analytic_estimate(ctx, p)?;
        let proxy = proxy_value(p)?;
        Ok((prof, analytic, proxy))
    })?;
    let mut t = new_table(
        name,
        "p1_vs_gamma",
        vec![
            "t1",
            "t2",
            "gamma",
            "length",
            "x0",
            "P1_numeric",
            "P1_analytic",
            "weak_scattering_flag",
            "dlambda0",
            "P_min",
            "P_min_site",
            "edge_burst_ratio",
            "method",
        ],
        points,
    );
    t.boundary = Some(ctx.boundary.to_string());
    for (p, (prof, analytic, proxy)) in points.iter().zip(rows) {
        let method = method_name(prof.method);
        let mut row = chain_cells(p);
        row.extend([
            prof.p_edge.into(),
            analytic.map_or(f64::NAN, |a| a.value).into(),
            (proxy >= WEAK_SCATTERING_THRESHOLD).into(),
            proxy.into(),
            prof.p_min_bulk.into(),
            prof.p_min_site().into(),
            prof.edge_burst_ratio().into(),
            method.clone().into(),
        ]);
        t.push(row);
        t.count_method(method, 1);
    }
    Ok(t)
}

pub fn spectra_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let n_k = ctx.settings.n_k;
    let spectra = par_map(points, |p| match ctx.boundary {
        BoundaryCondition::Obc => obc_spectrum(p),
        BoundaryCondition::Pbc => pbc_spectrum(p, n_k),
    })?;
    let mut t = new_table(
        name,
        "spectra",
        vec!["t1", "t2", "gamma", "length", "boundary", "label", "re_E", "im_E"],
        points,
    );
    t.boundary = Some(ctx.boundary.to_string());
    for (p, s) in points.iter().zip(&spectra) {
        for pt in &s.points {
            let mut row = base_cells(p);
            row.extend([
                p.length.into(),
                s.boundary.to_string().into(),
                pt.label.into(),
                pt.energy.re.into(),
                pt.energy.im.into(),
            ]);
            t.push(row);
        }
    }
    t.extra.insert(
        "label".into(),
        json!(match ctx.boundary {
            BoundaryCondition::Obc => "eigenvalue index, sorted by Re E then Im E",
            BoundaryCondition::Pbc => "Bloch momentum k",
        }),
    );
    Ok(t)
}

pub fn gbz_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let n_k = ctx.settings.n_k;
    let rows = par_map(points, |p| {
        let rg = gbz_radius(p.t1, p.gamma)?.r_g;
        let gap = or_nan(imaginary_gap(p, n_k))?;
        let (omega, beta) = match min_abs_beta_l(p) {
            Ok(v) => v,
            Err(CoreError::Domain(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        Ok((rg, gap, omega, beta))
    })?;
    let mut t = new_table(
        name,
        "gbz",
        vec!["t1", "t2", "gamma", "r_G", "ln_r_G", "imaginary_gap", "min_abs_beta_L", "omega_min"],
        points,
    );
    for (p, (rg, gap, omega, beta)) in points.iter().zip(rows) {
        let mut row = base_cells(p);
        row.extend([rg.into(), rg.ln().into(), gap.into(), beta.into(), omega.into()]);
        t.push(row);
    }
    Ok(t)
}

pub fn lyapunov_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let vs = ctx.settings.velocities.values("velocities")?;
    let t_obs = ctx.settings.t_obs;
    let rows = par_map(points, |p| {
        let curve = lyapunov_curve(p, &vs)?;
        let oracle = match t_obs {
            Some(t_obs) => {
                // Rays slower than the fastest group velocity stay inside the
                // oracle chain.
                let reach = p.t1.abs() + 2.0 * p.t2.abs();
                let inside: Vec<f64> = vs.iter().copied().filter(|v| v.abs() <= reach).collect();
                let values = lyapunov_numeric_oracle_many(&oracle_params(p, t_obs)?, &inside, t_obs)?;
                let mut it = values.into_iter();
                vs.iter()
                    .map(|v| if v.abs() <= reach { it.next().unwrap_or(f64::NAN) } else { f64::NAN })
                    .collect()
            }
            None => vec![f64::NAN; vs.len()],
        };
        Ok((curve, oracle))
    })?;
    let mut t = new_table(
        name,
        "lyapunov_curve",
        vec!["t1", "t2", "gamma", "v", "lambda", "contour_bound", "re_k_s", "im_k_s", "kink", "lambda_oracle"],
        points,
    );
    for (p, (curve, oracle)) in points.iter().zip(rows) {
        for (c, o) in curve.iter().zip(oracle) {
            let mut row = base_cells(p);
            row.extend([
                c.v.into(),
                c.lambda.unwrap_or(f64::NAN).into(),
                c.bound.into(),
                c.k_s.map_or(f64::NAN, |k| k.re).into(),
                c.k_s.map_or(f64::NAN, |k| k.im).into(),
                c.kink.into(),
                o.into(),
            ]);
            t.push(row);
        }
    }
    if let Some(t_obs) = t_obs {
        t.extra.insert("t_obs".into(), json!(t_obs));
    }
    Ok(t)
}

pub fn dlambda0_table(points: &[ModelParams], name: &str) -> Result<Table> {
    let rows = par_map(points, |p| {
        let rg = gbz_radius(p.t1, p.gamma)?.r_g;
        match dlambda_dv_at_zero(p) {
            Ok(d) => Ok((rg, d.value, d.one_sided, d.richardson_delta)),
            Err(CoreError::Domain(_)) => Ok((rg, f64::NAN, false, f64::NAN)),
            Err(e) => Err(e),
        }
    })?;
    let mut t = new_table(
        name,
        "dlambda0",
        vec!["t1", "t2", "gamma", "r_G", "dlambda_dv0", "one_sided", "richardson_delta"],
        points,
    );
    for (p, (rg, value, one_sided, delta)) in points.iter().zip(rows) {
        let mut row = base_cells(p);
        row.extend([rg.into(), value.into(), one_sided.into(), delta.into()]);
        t.push(row);
    }
    Ok(t)
}

pub fn overlays_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let rows = par_map(points, |p| {
        let est = analytic_estimate(ctx, p)?;
        let expansion = if p.gap_closing() {
            f64::NAN
        } else {
            or_nan(edge_loss_opening_expansion(p))?
        };
        let proxy = match est {
            Some(e) => e.scattering_proxy.unwrap_or(f64::NAN),
            None => proxy_value(p)?,
        };
        Ok((est, expansion, proxy))
    })?;
    let mut t = new_table(
        name,
        "analytic_overlays",
        vec![
            "t1",
            "t2",
            "gamma",
            "length",
            "x0",
            "regime",
            "P1_analytic",
            "P1_expansion",
            "scattering_proxy",
            "weak_scattering_flag",
            "physical",
        ],
        points,
    );
    for (p, (est, expansion, proxy)) in points.iter().zip(rows) {
        let mut row = chain_cells(p);
        row.extend([
            if p.gap_closing() { "closing" } else { "opening" }.into(),
            est.map_or(f64::NAN, |e| e.value).into(),
            expansion.into(),
            proxy.into(),
            (proxy >= WEAK_SCATTERING_THRESHOLD).into(),
            est.is_some_and(|e| e.physical).into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

/// Site probabilities `|psi_x^A|^2 + |psi_x^B|^2` at each snapshot time.
pub fn wavepacket_table(ctx: &Context, points: &[ModelParams], name: &str) -> Result<Table> {
    let times = ctx.settings.snapshot_times.values("snapshot_times")?;
    let t_final = times.last().copied().unwrap_or(0.0);
    if !(t_final > 0.0) {
        return Err(CliError::Validation("snapshot_times must reach past t = 0".into()));
    }
    let snaps = par_map(points, |p| evolve(p, ctx.boundary, t_final, &times))?;
    let mut t = new_table(
        name,
        "wavepacket",
        vec!["t1", "t2", "gamma", "length", "x0", "time", "x", "probability"],
        points,
    );
    t.boundary = Some(ctx.boundary.to_string());
    for (p, snaps) in points.iter().zip(&snaps) {
        for s in snaps {
            for (i, prob) in s.site_probabilities().into_iter().enumerate() {
                let mut row = chain_cells(p);
                row.extend([s.time.into(), (i + 1).into(), prob.into()]);
                t.push(row);
            }
        }
    }
    t.count_method("TIME_STEPPING", t.rows.len());
    Ok(t)
}

/// Axes of a bulk-decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitAxes {
    /// `ln P` against `ln d`.
    LogLog,
    /// `ln P` against `d`.
    SemiLog,
}

impl FitAxes {
    pub fn name(self) -> &'static str {
        match self {
            Self::LogLog => "loglog",
            Self::SemiLog => "semilog",
        }
    }
}

/// Bulk loss against distance `d = x0 - x` for `d` in `d_range`, with the
/// straight-line fit on the chosen axes. Fit statistics go into the sidecar.
pub fn bulk_fit_table(
    ctx: &Context,
    p: &ModelParams,
    d_range: (usize, usize),
    axes: FitAxes,
    name: &str,
) -> Result<Table> {
    let (d_min, d_max) = d_range;
    if d_min == 0 || d_max < d_min + 1 || d_max >= p.x0 {
        return Err(CliError::Validation(format!(
            "fit range {d_min}..={d_max} must satisfy 1 <= d_min < d_max < x0 = {}",
            p.x0
        )));
    }
    let prof = profiles(ctx, std::slice::from_ref(p))?.remove(0);
    let ds: Vec<usize> = (d_min..=d_max).collect();
    let px: Vec<f64> = ds.iter().map(|&d| prof.at(p.x0 - d)).collect();
    let xs: Vec<f64> = ds
        .iter()
        .map(|&d| match axes {
            FitAxes::LogLog => (d as f64).ln(),
            FitAxes::SemiLog => d as f64,
        })
        .collect();
    let ys: Vec<f64> = px.iter().map(|v| v.ln()).collect();
    let fit: LineFit = fit_line(&xs, &ys).map_err(|e| CliError::from_core(describe(p), e))?;
    let mut t = new_table(
        name,
        "bulk_fit",
        vec!["x", "distance", "P_x", "fit_x", "ln_P_x", "fit_ln_P_x"],
        std::slice::from_ref(p),
    );
    t.boundary = Some(ctx.boundary.to_string());
    for (i, &d) in ds.iter().enumerate() {
        t.push(vec![
            (p.x0 - d).into(),
            d.into(),
            px[i].into(),
            xs[i].into(),
            ys[i].into(),
            (fit.intercept + fit.slope * xs[i]).into(),
        ]);
    }
    let method = method_name(prof.method);
    t.count_method(method, ds.len());
    t.extra.insert(
        "fit".into(),
        json!({
            "axes": axes.name(),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "rss": fit.rss,
            "r_squared": fit.r_squared,
            "n": fit.n,
            "d_min": d_min,
            "d_max": d_max,
        }),
    );
    Ok(t)
}
