// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML experiment configuration.
//!
//! ```toml
//! outputs = ["p1_vs_gamma", "gbz"]
//! boundary = "obc"
//! output_dir = "out/fig1b"
//!
//! [params]
//! t1 = [0.2, 0.3, 0.4]
//! t2 = 0.5
//! gamma = { start = 0.02, stop = 3.0, step = 0.02 }
//! length = 100
//! x0 = 90
//!
//! [settings]
//! residual_tol = 1e-8
//! ```

use std::path::{Path, PathBuf};

use edgeburst_core::{BoundaryCondition, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::sweep::Sweep;

/// Requested output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LossProfile,
    P1VsGamma,
    Spectra,
    Gbz,
    LyapunovCurve,
    Dlambda0,
    AnalyticOverlays,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Self::LossProfile => "loss_profile",
            Self::P1VsGamma => "p1_vs_gamma",
            Self::Spectra => "spectra",
            Self::Gbz => "gbz",
            Self::LyapunovCurve => "lyapunov_curve",
            Self::Dlambda0 => "dlambda0",
            Self::AnalyticOverlays => "analytic_overlays",
        }
    }
}

fn default_t2() -> Sweep {
    Sweep::Scalar(0.5)
}

fn default_length() -> Sweep {
    Sweep::Scalar(100.0)
}

fn default_x0() -> Sweep {
    Sweep::Scalar(90.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSweeps {
    pub t1: Sweep,
    #[serde(default = "default_t2")]
    pub t2: Sweep,
    pub gamma: Sweep,
    #[serde(default = "default_length")]
    pub length: Sweep,
    #[serde(default = "default_x0")]
    pub x0: Sweep,
}

impl ParamSweeps {
    /// Cartesian product, `gamma` varying fastest.
    pub fn points(&self) -> Result<Vec<ModelParams>> {
        let t1s = self.t1.values("t1")?;
        let t2s = self.t2.values("t2")?;
        let gammas = self.gamma.values("gamma")?;
        let lengths = self.length.integer_values("length")?;
        let x0s = self.x0.integer_values("x0")?;
        let mut out = Vec::with_capacity(t1s.len() * t2s.len() * gammas.len() * lengths.len() * x0s.len());
        for &t1 in &t1s {
            for &t2 in &t2s {
                for &length in &lengths {
                    for &x0 in &x0s {
                        for &gamma in &gammas {
                            let p = ModelParams::new(t1, t2, gamma, length, x0)
                                .map_err(|e| CliError::from_core(describe(&ModelParams { t1, t2, gamma, length, x0 }), e))?;
                            out.push(p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `t1=0.3 t2=0.5 gamma=1 L=100 x0=90`.
pub fn describe(p: &ModelParams) -> String {
    format!("t1={} t2={} gamma={} L={} x0={}", p.t1, p.t2, p.gamma, p.length, p.x0)
}

fn default_residual_tol() -> f64 {
    1e-8
}

fn default_n_k() -> usize {
    512
}

fn default_quad_tol() -> f64 {
    1e-9
}

fn default_velocities() -> Sweep {
    Sweep::range(-0.8, 0.8, 0.01)
}

fn default_times() -> Sweep {
    Sweep::range(0.0, 300.0, 2.0)
}

/// Numerical settings shared by all quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Truncation bar on the remaining norm for time-stepped loss profiles.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Momentum grid for periodic spectra and the imaginary gap.
    #[serde(default = "default_n_k")]
    pub n_k: usize,
    /// Relative tolerance of the open-gap frequency integral.
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Velocity grid for `lyapunov_curve`.
    #[serde(default = "default_velocities")]
    pub velocities: Sweep,
    /// When set, `lyapunov_curve` also runs the direct-evolution oracle up
    /// to this time.
    #[serde(default)]
    pub t_obs: Option<f64>,
    /// Snapshot times for wavepacket tables.
    #[serde(default = "default_times")]
    pub snapshot_times: Sweep,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            residual_tol: default_residual_tol(),
            n_k: default_n_k(),
            quad_tol: default_quad_tol(),
            velocities: default_velocities(),
            t_obs: None,
            snapshot_times: default_times(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.residual_tol < 1.0) {
            return Err(CliError::Validation(format!(
                "residual_tol must lie in (0, 1), got {}",
                self.residual_tol
            )));
        }
        if self.n_k < 8 {
            return Err(CliError::Validation(format!("n_k must be >= 8, got {}", self.n_k)));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(CliError::Validation(format!("quad_tol must lie in (0, 1), got {}", self.quad_tol)));
        }
        if let Some(t) = self.t_obs {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("t_obs must be > 0, got {t}")));
            }
        }
        self.velocities.values("velocities")?;
        let times = self.snapshot_times.values("snapshot_times")?;
        if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Validation("snapshot_times must be non-negative and sorted".into()));
        }
        Ok(())
    }
}

fn default_boundary() -> BoundaryCondition {
    BoundaryCondition::Obc
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamSweeps,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryCondition,
    pub outputs: Vec<Quantity>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Prefix for output file names.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub settings: Settings,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub gamma: Option<f64>,
    pub length: Option<usize>,
    pub x0: Option<usize>,
    pub boundary: Option<BoundaryCondition>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply_to_sweeps(&self, s: &mut ParamSweeps) {
        if let Some(v) = self.t1 {
            s.t1 = v.into();
        }
        if let Some(v) = self.t2 {
            s.t2 = v.into();
        }
        if let Some(v) = self.gamma {
            s.gamma = v.into();
        }
        if let Some(v) = self.length {
            s.length = (v as f64).into();
        }
        if let Some(v) = self.x0 {
            s.x0 = (v as f64).into();
        }
    }

    pub fn apply_to_point(&self, p: &ModelParams) -> ModelParams {
        ModelParams {
            t1: self.t1.unwrap_or(p.t1),
            t2: self.t2.unwrap_or(p.t2),
            gamma: self.gamma.unwrap_or(p.gamma),
            length: self.length.unwrap_or(p.length),
            x0: self.x0.unwrap_or(p.x0),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        o.apply_to_sweeps(&mut self.params);
        if let Some(b) = o.boundary {
            self.boundary = b;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<Vec<ModelParams>> {
        if self.outputs.is_empty() {
            return Err(CliError::Validation("outputs must list at least one quantity".into()));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(CliError::Validation(format!("name {name:?} is not a valid file prefix")));
            }
        }
        self.settings.validate()?;
        self.params.points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
outputs = ["p1_vs_gamma", "gbz"]
output_dir = "out"

[params]
t1 = [0.2, 0.3]
gamma = { start = 0.5, stop = 1.0, step = 0.25 }

[settings]
residual_tol = 1e-9
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.boundary, BoundaryCondition::Obc);
        assert_eq!(c.outputs, vec![Quantity::P1VsGamma, Quantity::Gbz]);
        assert_eq!(c.settings.residual_tol, 1e-9);
        assert_eq!(c.settings.n_k, 512);
        let pts = c.validate().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].t1, pts[0].gamma, pts[0].length, pts[0].x0), (0.2, 0.5, 100, 90));
        assert_eq!((pts[5].t1, pts[5].gamma), (0.3, 1.0));
    }

    #[test]
    fn overrides_replace_sweeps() {
        let mut c = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        c.apply(&Overrides {
            gamma: Some(2.0),
            length: Some(40),
            x0: Some(30),
            out: Some(PathBuf::from("elsewhere")),
            ..Default::default()
        });
        let pts = c.validate().unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.gamma == 2.0 && p.length == 40 && p.x0 == 30));
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn rejects_unknown_entries_and_bad_values() {
        let unknown = EXAMPLE.replace("\"gbz\"", "\"gbzz\"");
        assert!(ExperimentConfig::from_toml(&unknown).is_err());
        let extra = format!("{EXAMPLE}\ncolour = 1\n");
        assert!(ExperimentConfig::from_toml(&extra).is_err());
        let bad_x0 = EXAMPLE.replace("t1 = [0.2, 0.3]", "t1 = 0.3\nx0 = 200");
        let c = ExperimentConfig::from_toml(&bad_x0).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        let empty = EXAMPLE.replace("t1 = [0.2, 0.3]", "t1 = []");
        let c = ExperimentConfig::from_toml(&empty).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        let no_outputs = EXAMPLE.replace("outputs = [\"p1_vs_gamma\", \"gbz\"]", "outputs = []");
        let c = ExperimentConfig::from_toml(&no_outputs).unwrap();
        assert!(c.validate().is_err());
    }
}
