// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Figure-data manifests. Common parameters: `t2 = 0.5`, `L = 100`,
//! `x0 = 90`.

use std::fmt;
use std::str::FromStr;

use edgeburst_core::{BoundaryCondition, ModelParams};
use serde_json::{json, Value};

use crate::config::{Overrides, ParamSweeps, Quantity, Settings};
use crate::error::{CliError, Result};
use crate::quantities::{self, params_json, Context, FitAxes};
use crate::output::Table;
use crate::sweep::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1B,
    Fig1C,
    Fig2A,
    Fig2B,
    Fig2CD,
    Fig3A,
    Fig3B,
    Fig3C,
    Fig3D,
    Fig4A,
    Fig4B,
    Fig4C,
    Fig4D,
    Fig5,
}

impl FigureId {
    pub const ALL: [FigureId; 14] = [
        Self::Fig1B,
        Self::Fig1C,
        Self::Fig2A,
        Self::Fig2B,
        Self::Fig2CD,
        Self::Fig3A,
        Self::Fig3B,
        Self::Fig3C,
        Self::Fig3D,
        Self::Fig4A,
        Self::Fig4B,
        Self::Fig4C,
        Self::Fig4D,
        Self::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1B => "FIG1B",
            Self::Fig1C => "FIG1C",
            Self::Fig2A => "FIG2A",
            Self::Fig2B => "FIG2B",
            Self::Fig2CD => "FIG2CD",
            Self::Fig3A => "FIG3A",
            Self::Fig3B => "FIG3B",
            Self::Fig3C => "FIG3C",
            Self::Fig3D => "FIG3D",
            Self::Fig4A => "FIG4A",
            Self::Fig4B => "FIG4B",
            Self::Fig4C => "FIG4C",
            Self::Fig4D => "FIG4D",
            Self::Fig5 => "FIG5",
        }
    }

    fn stem(self) -> String {
        self.name().to_ascii_lowercase()
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace(['-', '_', '.', ' '], "");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|f| f.name()).collect();
                CliError::Validation(format!("unknown figure id {s:?} (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JobKind {
    Quantity(Quantity),
    Wavepacket,
    BulkFit { axes: FitAxes, d_min: usize, d_max: usize },
}

impl JobKind {
    fn label(&self) -> String {
        match self {
            Self::Quantity(q) => q.name().into(),
            Self::Wavepacket => "wavepacket".into(),
            Self::BulkFit { axes, .. } => format!("bulk_fit_{}", axes.name()),
        }
    }
}

/// One output file of a figure.
#[derive(Debug, Clone)]
pub struct Job {
    /// File stem.
    pub file: String,
    pub kind: JobKind,
    pub boundary: BoundaryCondition,
    pub points: Vec<ModelParams>,
    pub settings: Settings,
    /// Parameters chosen here where the figure does not print them.
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct FigureManifest {
    pub figure: FigureId,
    pub jobs: Vec<Job>,
}

fn points(t1: Sweep, gamma: Sweep) -> Vec<ModelParams> {
    ParamSweeps {
        t1,
        t2: Sweep::Scalar(0.5),
        gamma,
        length: Sweep::Scalar(100.0),
        x0: Sweep::Scalar(90.0),
    }
    .points()
    .expect("figure parameters are valid")
}

fn pair(t1: f64, gamma: f64) -> ModelParams {
    ModelParams::new(t1, 0.5, gamma, 100, 90).expect("figure parameters are valid")
}

struct Builder {
    figure: FigureId,
    jobs: Vec<Job>,
}

impl Builder {
    fn new(figure: FigureId) -> Self {
        Self { figure, jobs: Vec::new() }
    }

    fn job(mut self, suffix: &str, kind: JobKind, boundary: BoundaryCondition, points: Vec<ModelParams>) -> Self {
        self.jobs.push(Job {
            file: format!("{}_{suffix}", self.figure.stem()),
            kind,
            boundary,
            points,
            settings: Settings::default(),
            note: None,
        });
        self
    }

    fn q(self, q: Quantity, points: Vec<ModelParams>) -> Self {
        self.job(q.name(), JobKind::Quantity(q), BoundaryCondition::Obc, points)
    }

    fn note(mut self, note: &'static str) -> Self {
        self.jobs.last_mut().expect("job present").note = Some(note);
        self
    }

    fn settings(mut self, f: impl FnOnce(&mut Settings)) -> Self {
        f(&mut self.jobs.last_mut().expect("job present").settings);
        self
    }

    fn done(self) -> FigureManifest {
        FigureManifest {
            figure: self.figure,
            jobs: self.jobs,
        }
    }
}

fn closing_t1s() -> Sweep {
    Sweep::List(vec![0.2, 0.3, 0.4])
}

fn closing_gammas() -> Sweep {
    Sweep::range(0.02, 3.0, 0.02)
}

const GAMMA_RANGE_NOTE: &str = "gamma range chosen here to cover the rise, peak and decay of P1";

pub fn manifest(figure: FigureId) -> FigureManifest {
    use BoundaryCondition::{Obc, Pbc};
    use Quantity::*;
    let b = Builder::new(figure);
    match figure {
        FigureId::Fig1B => b
            .q(P1VsGamma, points(closing_t1s(), closing_gammas()))
            .note(GAMMA_RANGE_NOTE)
            .job("inset_spectra", JobKind::Quantity(Spectra), Pbc, points(closing_t1s(), 0.5.into()))
            .done(),
        FigureId::Fig1C => b
            .q(P1VsGamma, points(0.7.into(), Sweep::log(0.002, 100.0, 121)))
            .note("log-spaced gamma grid over [0.002, 100]; both peaks of P1 lie outside [0.02, 12]")
            .job("inset_spectra", JobKind::Quantity(Spectra), Pbc, points(0.7.into(), 0.5.into()))
            .done(),
        FigureId::Fig2A => b
            .q(P1VsGamma, points(closing_t1s(), closing_gammas()))
            .note(GAMMA_RANGE_NOTE)
            .q(AnalyticOverlays, points(closing_t1s(), closing_gammas()))
            .done(),
        FigureId::Fig2B => b
            .q(Gbz, points(closing_t1s(), Sweep::range(0.01, 3.0, 0.01)))
            .done(),
        FigureId::Fig2CD => {
            let pts = vec![pair(0.3, 0.6), pair(0.2, 0.02)];
            b.q(LossProfile, pts.clone())
                .note("weak scattering at (t1, gamma) = (0.3, 0.6), strong at (0.2, 0.02)")
                .job("wavepacket", JobKind::Wavepacket, Obc, pts)
                .settings(|s| s.snapshot_times = Sweep::range(0.0, 600.0, 4.0))
                .done()
        }
        FigureId::Fig3A => b
            .q(LyapunovCurve, points(Sweep::List(vec![0.2, 0.3, 0.4]), 1.0.into()))
            .settings(|s| s.velocities = Sweep::range(-1.0, 0.0, 0.005))
            .done(),
        FigureId::Fig3B => b
            .job("spectra_pbc", JobKind::Quantity(Spectra), Pbc, points(0.2.into(), Sweep::List(vec![0.4, 1.0])))
            .job("spectra_obc", JobKind::Quantity(Spectra), Obc, points(0.2.into(), Sweep::List(vec![0.4, 1.0])))
            .note("gamma = 0.4 puts t1 = 0.2 at r_G = 0")
            .done(),
        FigureId::Fig3C => b
            .q(LyapunovCurve, points(0.3.into(), Sweep::List(vec![0.1, 0.3, 0.5, 0.8, 1.0, 2.0])))
            .note("gamma values chosen here; gamma = 0.6 (r_G = 0) has no rightward saddle")
            .settings(|s| s.velocities = Sweep::range(0.0, 0.8, 0.005))
            .done(),
        FigureId::Fig3D => b
            .q(Dlambda0, points(closing_t1s(), closing_gammas()))
            .note(GAMMA_RANGE_NOTE)
            .done(),
        FigureId::Fig4A => b
            .q(P1VsGamma, points(0.7.into(), Sweep::range(0.1, 10.0, 0.1)))
            .q(AnalyticOverlays, points(0.7.into(), Sweep::range(0.1, 10.0, 0.1)))
            .done(),
        FigureId::Fig4B => b
            .q(Dlambda0, points(0.7.into(), Sweep::range(0.02, 10.0, 0.02)))
            .done(),
        FigureId::Fig4C => b
            .q(Gbz, points(0.7.into(), Sweep::range(0.02, 10.0, 0.02)))
            .done(),
        FigureId::Fig4D => b
            .q(LossProfile, vec![pair(0.7, 10.0)])
            .job("wavepacket", JobKind::Wavepacket, Obc, vec![pair(0.7, 10.0)])
            .settings(|s| s.snapshot_times = Sweep::range(0.0, 600.0, 4.0))
            .done(),
        FigureId::Fig5 => {
            let mut b = b;
            for (panels, gamma) in [("a_d", 0.02), ("b_e", 1.4), ("c_f", 30.0)] {
                let (ll, sl) = panels.split_once('_').expect("panel pair");
                for (panel, axes) in [(ll, FitAxes::LogLog), (sl, FitAxes::SemiLog)] {
                    b = b
                        .job(
                            &format!("{panel}_gamma_{gamma}_{}", axes.name()),
                            JobKind::BulkFit {
                                axes,
                                d_min: 10,
                                d_max: 70,
                            },
                            Obc,
                            vec![pair(0.7, gamma)],
                        )
                        .note("fit window 10 <= x0 - x <= 70 chosen here");
                }
            }
            b.done()
        }
    }
}

impl FigureManifest {
    pub fn apply(&mut self, o: &Overrides) {
        for job in &mut self.jobs {
            for p in &mut job.points {
                *p = o.apply_to_point(p);
            }
            if let Some(b) = o.boundary {
                job.boundary = b;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for job in &self.jobs {
            for p in &job.points {
                p.validate()
                    .map_err(|e| CliError::from_core(crate::config::describe(p), e))?;
            }
            job.settings.validate()?;
        }
        Ok(())
    }

    /// Computes every job; nothing is written here.
    pub fn compute(&self) -> Result<Vec<(Table, Value)>> {
        self.jobs
            .iter()
            .map(|job| {
                let ctx = Context {
                    boundary: job.boundary,
                    settings: job.settings.clone(),
                };
                let mut table = match job.kind {
                    JobKind::Quantity(q) => quantities::compute(q, &ctx, &job.points, &job.file)?,
                    JobKind::Wavepacket => quantities::wavepacket_table(&ctx, &job.points, &job.file)?,
                    JobKind::BulkFit { axes, d_min, d_max } => {
                        quantities::bulk_fit_table(&ctx, &job.points[0], (d_min, d_max), axes, &job.file)?
                    }
                };
                table.extra.insert("figure".into(), json!(self.figure.name()));
                if let Some(note) = job.note {
                    table.extra.insert("note".into(), json!(note));
                }
                Ok((table, ctx.tolerances()))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "figure": self.figure.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "common": {"t2": 0.5, "length": 100, "x0": 90},
            "jobs": self.jobs.iter().map(|j| json!({
                "file": format!("{}.csv", j.file),
                "sidecar": format!("{}.json", j.file),
                "kind": j.kind.label(),
                "boundary": j.boundary.to_string(),
                "points": j.points.len(),
                "params": j.points.iter().map(params_json).collect::<Vec<_>>(),
                "note": j.note,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn manifest_file(&self) -> String {
        format!("{}_manifest.json", self.figure.stem())
    }
}
