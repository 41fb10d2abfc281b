// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration. A JSON file supplies a base; command-line flags are
//! layered on top with [`RunConfig::merge`].

use std::path::PathBuf;

use qlg_core::pipeline::DriveConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Upper bound on Fock dimensions accepted from configs.
pub const MAX_DIM: usize = 512;
/// Upper bound on the Trotter depths accepted from configs.
pub const MAX_STEPS: usize = 1 << 16;

/// Interpretation of `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    /// `|β − β₀| ≤ δ`.
    #[default]
    Absolute,
    /// `|β − β₀| ≤ δ β₀`.
    Relative,
}

impl DeltaMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "absolute" => Some(DeltaMode::Absolute),
            "relative" => Some(DeltaMode::Relative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub lambda: Option<f64>,
    pub n_t: Option<usize>,
    pub n_k: Option<usize>,
    pub k_f: Option<f64>,
    pub beta0: Option<f64>,
    pub period: Option<f64>,
    pub seed: Option<u64>,

    pub code: Option<String>,
    /// Codeword to prepare: `0`, `1`, `plus` or `minus`.
    pub logical: Option<String>,
    pub target_file: Option<PathBuf>,
    pub haar_seed: Option<u64>,
    /// Haar support dimension; defaults to `dim`.
    pub d: Option<usize>,

    pub gate: Option<String>,
    pub state_prep: Option<bool>,
    pub delta: Option<f64>,
    pub delta_mode: Option<DeltaMode>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub restarts: Option<usize>,
    pub random_gates: Option<usize>,

    pub samples: Option<usize>,

    pub kappa_sweep: Option<String>,
    pub zeta_sweep: Option<String>,
    pub seeds: Option<usize>,
    pub dt_substeps: Option<usize>,

    pub wigner_points: Option<usize>,
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),* $(,)?) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::config("config-parse", e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            let kind = if e.kind() == std::io::ErrorKind::NotFound {
                "config-not-found"
            } else {
                "config-unreadable"
            };
            CliError::config(kind, format!("{}: {e}", path.display()))
        })?;
        RunConfig::from_json(&text)
    }

    /// Fields set in `top` win over `self`.
    pub fn merge(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(
            base, top, dim, lambda, n_t, n_k, k_f, beta0, period, seed, code, logical, target_file, haar_seed, d,
            gate, state_prep, delta, delta_mode, budget, tol, restarts, random_gates, samples, kappa_sweep,
            zeta_sweep, seeds, dt_substeps, wigner_points, workers,
        )
    }

    /// Canonical serialization used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        positive("lambda", self.lambda.unwrap_or(1.0))
    }

    pub fn dim_or(&self, default: usize) -> Result<usize, CliError> {
        let dim = self.dim.unwrap_or(default);
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(CliError::field("dim", format!("must be in 2..={MAX_DIM}, got {dim}")));
        }
        Ok(dim)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn drive(&self) -> Result<DriveConfig, CliError> {
        let def = DriveConfig::default();
        let n_t = steps("n_t", self.n_t.unwrap_or(def.n_t))?;
        let n_k = steps("n_k", self.n_k.unwrap_or(def.n_k))?;
        Ok(DriveConfig {
            n_t,
            n_k,
            k_f: positive("k_f", self.k_f.unwrap_or(def.k_f))?,
            beta0: positive("beta0", self.beta0.unwrap_or(def.beta0))?,
            period: positive("period", self.period.unwrap_or(def.period))?,
        })
    }

    /// Absolute box half-width.
    pub fn delta_abs(&self, default: f64, beta0: f64) -> Result<f64, CliError> {
        let delta = self.delta.unwrap_or(default);
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(CliError::field("delta", format!("must be non-negative, got {delta}")));
        }
        Ok(match self.delta_mode.unwrap_or_default() {
            DeltaMode::Absolute => delta,
            DeltaMode::Relative => delta * beta0,
        })
    }

    pub fn count(&self, name: &str, value: Option<usize>, default: usize, max: usize) -> Result<usize, CliError> {
        let v = value.unwrap_or(default);
        if !(1..=max).contains(&v) {
            return Err(CliError::field(name, format!("must be in 1..={max}, got {v}")));
        }
        Ok(v)
    }

    pub fn workers(&self) -> Result<Option<usize>, CliError> {
        match self.workers {
            Some(0) => Err(CliError::field("workers", "must be ≥ 1")),
            w => Ok(w),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::field(name, format!("must be positive and finite, got {v}")))
    }
}

fn steps(name: &str, v: usize) -> Result<usize, CliError> {
    if (1..=MAX_STEPS).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::field(name, format!("must be in 1..={MAX_STEPS}, got {v}")))
    }
}
