// Copyright 2026 The tlsloss Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Population beyond the Fock cutoff is no longer negligible.
    #[error("truncation error: {what} = {weight:.3e} exceeds {threshold:.1e} (fock cutoff {fock_cutoff})")]
    Truncation {
        what: &'static str,
        weight: f64,
        threshold: f64,
        fock_cutoff: usize,
    },

    #[error("integrator error at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("oracle cap exceeded: total dimension {dim} > {cap}")]
    OracleCapExceeded { dim: usize, cap: usize },

    #[error("degenerate eigenproblem: eigenvalue gap {gap:.3e}")]
    DegenerateEigenproblem { gap: f64 },

    #[error("fit window too short: {found} usable samples, need {needed}")]
    WindowTooShort { found: usize, needed: usize },

    #[error("non-monotone decay and no envelope available: {0}")]
    NonMonotoneDecay(String),
}

/// Coarse error classes, used by the CLI to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Truncation,
    Integrator,
    Estimator,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. }
            | Error::DimensionMismatch { .. }
            | Error::OracleCapExceeded { .. } => ErrorClass::Config,
            Error::Truncation { .. } => ErrorClass::Truncation,
            Error::Integrator { .. } | Error::DegenerateEigenproblem { .. } => {
                ErrorClass::Integrator
            }
            Error::WindowTooShort { .. } | Error::NonMonotoneDecay(_) => ErrorClass::Estimator,
        }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
