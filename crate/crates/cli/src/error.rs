// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;
use tlsloss::ErrorClass;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Model(#[from] tlsloss::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// 2 configuration, 3 truncation, 4 integrator, 5 estimator, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Model(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Truncation => 3,
                ErrorClass::Integrator => 4,
                ErrorClass::Estimator => 5,
            },
            CliError::Io { .. } => 1,
        }
    }
}
