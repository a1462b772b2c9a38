// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: config-driven sweeps, figure-data reproduction and
//! single-point queries. Every CSV is written next to a JSON sidecar.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod quantities;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use edgeburst_core::{BoundaryCondition, ModelParams};

use crate::config::{describe, ExperimentConfig, Overrides, Quantity, Settings};
use crate::error::{CliError, Result};
use crate::figures::{manifest, FigureId};
use crate::output::{write_json, write_tables};
use crate::quantities::Context;
use crate::sweep::Sweep;

pub use crate::error::CliError as Error;

#[derive(Debug, Parser)]
#[command(name = "edgeburst", version, about = "Edge-burst loss statistics for the dissipative two-chain ladder")]
pub struct Cli {
    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Coupling t1 (single-point default 0.3).
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Coupling t2 (single-point default 0.5).
    #[arg(long, allow_negative_numbers = true)]
    pub t2: Option<f64>,
    /// Loss rate on chain B (single-point default 1.0).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Number of sites L (single-point default 100).
    #[arg(long)]
    pub length: Option<usize>,
    /// Excitation site, 1-based (single-point default 90).
    #[arg(long)]
    pub x0: Option<usize>,
    /// obc or pbc.
    #[arg(long, value_parser = parse_boundary)]
    pub boundary: Option<BoundaryCondition>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryCondition, String> {
    s.parse().map_err(|e: edgeburst_core::Error| e.to_string())
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            t1: self.t1,
            t2: self.t2,
            gamma: self.gamma,
            length: self.length,
            x0: self.x0,
            boundary: self.boundary,
            out: self.out.clone(),
        }
    }

    /// Single point with defaults `(0.3, 0.5, 1.0, 100, 90)`.
    fn point(&self) -> Result<ModelParams> {
        let p = ModelParams {
            t1: self.t1.unwrap_or(0.3),
            t2: self.t2.unwrap_or(0.5),
            gamma: self.gamma.unwrap_or(1.0),
            length: self.length.unwrap_or(100),
            x0: self.x0.unwrap_or(90),
        };
        p.validate().map_err(|e| CliError::from_core(describe(&p), e))?;
        Ok(p)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a TOML experiment config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the data behind one figure (FIG1B ... FIG5).
    Reproduce {
        figure: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Per-site loss probabilities P_x.
    LossProfile {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
    },
    /// OBC eigenvalues or PBC bands.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 512)]
        n_k: usize,
    },
    /// GBZ radius, imaginary gap and min |beta_L|.
    Gbz {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// lambda(v) on a velocity grid and |d lambda/dv| at v = 0.
    Lyapunov {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = -0.8, allow_negative_numbers = true)]
        v_min: f64,
        #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
        v_max: f64,
        #[arg(long, default_value_t = 0.01)]
        v_step: f64,
        /// Also run the direct-evolution oracle up to this time.
        #[arg(long)]
        t_obs: Option<f64>,
    },
    /// Analytic edge-loss estimates with their validity flags.
    EdgeAnalytics {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-9)]
        quad_tol: f64,
    },
}

/// Runs one subcommand and returns the written files.
pub fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Validation("--workers must be >= 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| dispatch(cli.command))
}

fn single(
    common: &CommonArgs,
    settings: Settings,
    quantities: &[(Quantity, &str)],
    default_boundary: BoundaryCondition,
) -> Result<Vec<PathBuf>> {
    let point = common.point()?;
    settings.validate()?;
    let ctx = Context {
        boundary: common.boundary.unwrap_or(default_boundary),
        settings,
    };
    let tables = quantities
        .iter()
        .map(|&(q, name)| quantities::compute(q, &ctx, &[point], name))
        .collect::<Result<Vec<_>>>()?;
    write_tables(&common.out_dir(), &tables, &ctx.tolerances())
}

fn run_config(path: &std::path::Path, common: &CommonArgs) -> Result<Vec<PathBuf>> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply(&common.overrides());
    let points = config.validate()?;
    let ctx = Context {
        boundary: config.boundary,
        settings: config.settings.clone(),
    };
    let prefix = config.name.as_ref().map_or(String::new(), |n| format!("{n}_"));
    let mut outputs = config.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let tables = outputs
        .iter()
        .map(|&q| quantities::compute(q, &ctx, &points, &format!("{prefix}{}", q.name())))
        .collect::<Result<Vec<_>>>()?;
    write_tables(&config.output_dir, &tables, &ctx.tolerances())
}

fn reproduce(figure: &str, common: &CommonArgs) -> Result<Vec<PathBuf>> {
    let id: FigureId = figure.parse()?;
    let mut m = manifest(id);
    m.apply(&common.overrides());
    m.validate()?;
    let computed = m.compute()?;
    let dir = common.out_dir();
    let mut paths = Vec::new();
    for (table, tolerances) in &computed {
        paths.extend(write_tables(&dir, std::slice::from_ref(table), tolerances)?);
    }
    paths.push(write_json(&dir, &m.manifest_file(), &m.to_json())?);
    Ok(paths)
}

fn dispatch(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Run { config, common } => run_config(&config, &common),
        Command::Reproduce { figure, common } => reproduce(&figure, &common),
        Command::LossProfile { common, residual_tol } => single(
            &common,
            Settings {
                residual_tol,
                ..Default::default()
            },
            &[(Quantity::LossProfile, "loss_profile")],
            BoundaryCondition::Obc,
        ),
        Command::Spectrum { common, n_k } => single(
            &common,
            Settings {
                n_k,
                ..Default::default()
            },
            &[(Quantity::Spectra, "spectra")],
            BoundaryCondition::Obc,
        ),
        Command::Gbz { common } => single(&common, Settings::default(), &[(Quantity::Gbz, "gbz")], BoundaryCondition::Obc),
        Command::Lyapunov {
            common,
            v_min,
            v_max,
            v_step,
            t_obs,
        } => single(
            &common,
            Settings {
                velocities: Sweep::range(v_min, v_max, v_step),
                t_obs,
                ..Default::default()
            },
            &[
                (Quantity::LyapunovCurve, "lyapunov_curve"),
                (Quantity::Dlambda0, "dlambda0"),
            ],
            BoundaryCondition::Obc,
        ),
        Command::EdgeAnalytics { common, quad_tol } => single(
            &common,
            Settings {
                quad_tol,
                ..Default::default()
            },
            &[(Quantity::AnalyticOverlays, "analytic_overlays")],
            BoundaryCondition::Obc,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "edgeburst", "--workers", "2", "loss-profile", "--t1", "-0.3", "--gamma", "0.5", "--boundary", "PBC",
        ])
        .unwrap();
        assert_eq!(cli.workers, Some(2));
        match cli.command {
            Command::LossProfile { common, residual_tol } => {
                assert_eq!(common.t1, Some(-0.3));
                assert_eq!(common.boundary, Some(BoundaryCondition::Pbc));
                assert_eq!(residual_tol, 1e-8);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["edgeburst", "gbz", "--boundary", "ring"]).is_err());
    }

    #[test]
    fn single_point_defaults() {
        let p = CommonArgs::default().point().unwrap();
        assert_eq!((p.t1, p.t2, p.gamma, p.length, p.x0), (0.3, 0.5, 1.0, 100, 90));
        let bad = CommonArgs {
            x0: Some(120),
            ..Default::default()
        };
        assert!(matches!(bad.point(), Err(CliError::Validation(_))));
    }
}
