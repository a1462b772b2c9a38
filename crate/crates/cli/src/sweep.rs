// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps as written in config files: a scalar, an explicit list,
//! `{ start, stop, step }`, or `{ start, stop, num, scale }`.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Scalar(f64),
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        step: f64,
    },
    Spaced {
        start: f64,
        stop: f64,
        num: usize,
        #[serde(default)]
        scale: Scale,
    },
}

impl From<f64> for Sweep {
    fn from(v: f64) -> Self {
        Self::Scalar(v)
    }
}

/// Rounds to 12 significant digits so that `0.1 + 2 * 0.1` prints as `0.3`.
fn tidy(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

impl Sweep {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self::Range { start, stop, step }
    }

    pub fn log(start: f64, stop: f64, num: usize) -> Self {
        Self::Spaced {
            start,
            stop,
            num,
            scale: Scale::Log,
        }
    }

    /// Expanded values; an empty or malformed sweep is a validation error.
    pub fn values(&self, field: &str) -> Result<Vec<f64>> {
        let bad = |msg: String| CliError::Validation(format!("sweep for {field}: {msg}"));
        let values = match *self {
            Self::Scalar(v) => vec![v],
            Self::List(ref vs) => vs.clone(),
            Self::Range { start, stop, step } => {
                if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
                    return Err(bad(format!("needs finite bounds and step > 0, got step {step}")));
                }
                if stop < start {
                    Vec::new()
                } else {
                    let n = ((stop - start) / step + 1e-9).floor() as usize;
                    (0..=n).map(|i| tidy(start + step * i as f64)).collect()
                }
            }
            Self::Spaced {
                start,
                stop,
                num,
                scale,
            } => {
                if !(start.is_finite() && stop.is_finite()) {
                    return Err(bad("bounds must be finite".into()));
                }
                match (num, scale) {
                    (0, _) => Vec::new(),
                    (1, _) => vec![start],
                    (_, Scale::Linear) => (0..num)
                        .map(|i| tidy(start + (stop - start) * i as f64 / (num - 1) as f64))
                        .collect(),
                    (_, Scale::Log) => {
                        if !(start > 0.0 && stop > 0.0) {
                            return Err(bad("log spacing needs positive bounds".into()));
                        }
                        let (a, b) = (start.ln(), stop.ln());
                        (0..num)
                            .map(|i| tidy((a + (b - a) * i as f64 / (num - 1) as f64).exp()))
                            .collect()
                    }
                }
            }
        };
        if values.is_empty() {
            return Err(bad("sweep is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(bad(format!("non-finite value {v}")));
        }
        Ok(values)
    }

    /// Values of an integer field (`length`, `x0`).
    pub fn integer_values(&self, field: &str) -> Result<Vec<usize>> {
        self.values(field)?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(CliError::Validation(format!(
                        "{field} must be a non-negative integer, got {v}"
                    )))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Deserialize)]
    struct Holder {
        s: Sweep,
    }

    fn parse(text: &str) -> Sweep {
        toml::from_str::<Holder>(text).unwrap().s
    }

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse("s = 0.5").values("s").unwrap(), vec![0.5]);
        assert_eq!(parse("s = 100").values("s").unwrap(), vec![100.0]);
        assert_eq!(parse("s = [0.2, 0.3]").values("s").unwrap(), vec![0.2, 0.3]);
        assert_eq!(
            parse("s = { start = 0.1, stop = 0.5, step = 0.1 }").values("s").unwrap(),
            vec![0.1, 0.2, 0.3, 0.4, 0.5]
        );
        let log = parse("s = { start = 0.01, stop = 100, num = 5, scale = \"log\" }")
            .values("s")
            .unwrap();
        assert_eq!(log, vec![0.01, 0.1, 1.0, 10.0, 100.0]);
        let lin = parse("s = { start = 0, stop = 1, num = 3 }").values("s").unwrap();
        assert_eq!(lin, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn empty_and_malformed_sweeps_are_rejected() {
        for text in [
            "s = []",
            "s = { start = 1.0, stop = 0.5, step = 0.1 }",
            "s = { start = 0.0, stop = 1.0, step = 0.0 }",
            "s = { start = 0.0, stop = 1.0, num = 0 }",
            "s = { start = 0.0, stop = 1.0, num = 4, scale = \"log\" }",
        ] {
            let err = parse(text).values("s").unwrap_err();
            assert!(matches!(err, CliError::Validation(_)), "{text}");
        }
    }

    #[test]
    fn integer_fields() {
        assert_eq!(Sweep::List(vec![40.0, 100.0]).integer_values("length").unwrap(), vec![40, 100]);
        assert!(Sweep::Scalar(40.5).integer_values("length").is_err());
        assert!(Sweep::Scalar(-1.0).integer_values("x0").is_err());
    }
}
