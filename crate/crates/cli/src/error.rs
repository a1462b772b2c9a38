// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use edgeburst_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, sweep or parameters. Exit code 1.
    #[error("validation error: {0}")]
    Validation(String),

    /// A computation failed. Exit code 2.
    #[error("computation failed for {context}: {source}")]
    Computation {
        context: String,
        #[source]
        source: CoreError,
    },

    /// Output could not be written. Exit code 2.
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Computation { .. } | Self::Io { .. } => 2,
        }
    }

    /// Invalid parameters reported by the core count as validation errors.
    pub fn from_core(context: impl Into<String>, source: CoreError) -> Self {
        match source {
            CoreError::InvalidParams(msg) => Self::Validation(format!("{}: {msg}", context.into())),
            source => Self::Computation {
                context: context.into(),
                source,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
