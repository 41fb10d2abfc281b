// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state is not normalized (norm = {norm:.3e})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("norm drift {drift:.3e} after {gates} gates exceeds {limit:.1e}")]
    NormDrift { drift: f64, gates: usize, limit: f64 },

    #[error("trace drift {drift:.3e} exceeds {limit:.1e}; use more substeps")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("quadrature did not converge: estimated error {estimate:.3e} > {tol:.1e}")]
    QuadratureNotConverged { estimate: f64, tol: f64 },

    #[error("degenerate Gram matrix (smallest eigenvalue {min_eigenvalue:.3e})")]
    DegenerateGram { min_eigenvalue: f64 },

    #[error("Fock dimension {dim} is too small; need at least {needed}")]
    InsufficientDimension { dim: usize, needed: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::NotNormalized { .. } => "not-normalized",
            Error::NotUnitary { .. } => "not-unitary",
            Error::NormDrift { .. } => "norm-drift",
            Error::TraceDrift { .. } => "trace-drift",
            Error::QuadratureNotConverged { .. } => "quadrature-not-converged",
            Error::DegenerateGram { .. } => "degenerate-gram",
            Error::InsufficientDimension { .. } => "insufficient-dimension",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
