// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Target states: codewords, Fock-amplitude files and Haar samples.
//!
//! An amplitude file is JSON, either a bare array or `{"amplitudes": [...]}`.
//! Each entry is a real number or a `[re, im]` pair; entry `n` is the
//! amplitude of `|n⟩`. The vector is rescaled to unit norm.

use std::path::Path;

use num_complex::Complex64;
use qlg_core::codes::{CodeKind, CodeSpec};
use qlg_core::fock::{FockSpace, QuantumState};
use qlg_core::haar;
use qlg_core::linalg::CVector;
use serde::Deserialize;

use crate::config::{RunConfig, MAX_DIM};
use crate::error::CliError;

/// Default Fock dimension for codewords.
pub const CODE_DIM: usize = 32;
/// Default Fock dimension for Haar targets.
pub const HAAR_DIM: usize = 16;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AmplitudeFile {
    Bare(Vec<Entry>),
    Wrapped {
        amplitudes: Vec<Entry>,
    },
}

fn parse_error(msg: impl Into<String>) -> CliError {
    CliError::config("target-parse", msg)
}

/// Parses and normalizes an amplitude file.
pub fn parse_amplitudes(text: &str) -> Result<Vec<Complex64>, CliError> {
    let file: AmplitudeFile = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    let entries = match file {
        AmplitudeFile::Bare(v) => v,
        AmplitudeFile::Wrapped { amplitudes } => amplitudes,
    };
    if entries.is_empty() {
        return Err(parse_error("amplitude list is empty"));
    }
    if entries.len() > MAX_DIM {
        return Err(parse_error(format!("at most {MAX_DIM} amplitudes are supported, got {}", entries.len())));
    }
    let amps: Vec<Complex64> = entries
        .into_iter()
        .map(|e| match e {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        })
        .collect();
    if amps.iter().any(|z| !z.is_finite()) {
        return Err(parse_error("amplitudes must be finite"));
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-300 && norm.is_finite()) {
        return Err(parse_error("amplitude vector has zero norm"));
    }
    Ok(amps.into_iter().map(|z| z / norm).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logical {
    Zero,
    One,
    Plus,
    Minus,
}

impl Logical {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "0" | "zero" => Some(Logical::Zero),
            "1" | "one" => Some(Logical::One),
            "+" | "plus" => Some(Logical::Plus),
            "-" | "minus" => Some(Logical::Minus),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Logical::Zero => "0",
            Logical::One => "1",
            Logical::Plus => "plus",
            Logical::Minus => "minus",
        }
    }

    pub fn state(self, code: &CodeSpec) -> Result<QuantumState, CliError> {
        let (z, o) = (code.zero().amplitudes(), code.one().amplitudes());
        let v = match self {
            Logical::Zero => return Ok(code.zero().clone()),
            Logical::One => return Ok(code.one().clone()),
            Logical::Plus => z + o,
            Logical::Minus => z - o,
        };
        Ok(QuantumState::normalized(*code.space(), v)?)
    }
}

pub fn code_kind(name: &str) -> Result<CodeKind, CliError> {
    CodeKind::parse(name).ok_or_else(|| CliError::field("code", format!("unknown code '{name}'; use binomial, cat or gkp")))
}

pub fn build_code(cfg: &RunConfig, kind: CodeKind) -> Result<CodeSpec, CliError> {
    let space = FockSpace::new(cfg.dim_or(CODE_DIM)?, cfg.lambda()?)?;
    Ok(CodeSpec::build(kind, space)?)
}

/// A resolved preparation target.
#[derive(Debug, Clone)]
pub struct Target {
    pub label: String,
    pub state: QuantumState,
}

/// Resolves exactly one of `code`, `target_file` or `haar_seed`.
pub fn resolve(cfg: &RunConfig) -> Result<Target, CliError> {
    let given = [cfg.code.is_some(), cfg.target_file.is_some(), cfg.haar_seed.is_some()];
    match given.iter().filter(|g| **g).count() {
        0 => return Err(CliError::field("target", "give one of --code, --target-file or --haar-seed")),
        1 => {}
        _ => return Err(CliError::field("target", "--code, --target-file and --haar-seed are exclusive")),
    }
    if let Some(name) = &cfg.code {
        let code = build_code(cfg, code_kind(name)?)?;
        let which = match &cfg.logical {
            Some(s) => Logical::parse(s)
                .ok_or_else(|| CliError::field("logical", format!("unknown codeword '{s}'; use 0, 1, plus or minus")))?,
            None => Logical::Zero,
        };
        return Ok(Target {
            label: format!("{}:{}", code.kind().name(), which.name()),
            state: which.state(&code)?,
        });
    }
    if let Some(path) = &cfg.target_file {
        return from_file(cfg, path);
    }
    let seed = cfg.haar_seed.expect("checked above");
    let dim = cfg.dim_or(HAAR_DIM)?;
    let d = cfg.d.unwrap_or(dim);
    if !(2..=dim).contains(&d) {
        return Err(CliError::field("d", format!("must be in 2..={dim}, got {d}")));
    }
    let space = FockSpace::new(dim, cfg.lambda()?)?;
    Ok(Target {
        label: format!("haar:{seed}:d{d}"),
        state: haar::sample_haar_state(space, d, seed, 0)?,
    })
}

fn from_file(cfg: &RunConfig, path: &Path) -> Result<Target, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::config("target-not-found", format!("{}: no such file", path.display()))
        } else {
            CliError::config("target-unreadable", format!("{}: {e}", path.display()))
        }
    })?;
    let amps = parse_amplitudes(&text)?;
    let dim = cfg.dim_or(amps.len().max(2))?;
    if dim < amps.len() {
        return Err(CliError::field(
            "dim",
            format!("{} amplitudes do not fit in dim {dim}", amps.len()),
        ));
    }
    let mut v = CVector::zeros(dim);
    for (n, a) in amps.iter().enumerate() {
        v[n] = *a;
    }
    let space = FockSpace::new(dim, cfg.lambda()?)?;
    Ok(Target {
        label: format!("file:{}", path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned())),
        state: QuantumState::normalized(space, v)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_formats() {
        let a = parse_amplitudes("[1, 0, [0, 1]]").unwrap();
        assert_eq!(a.len(), 3);
        assert!((a[2] - Complex64::new(0.0, 1.0 / 2f64.sqrt())).norm() < 1e-15);
        let b = parse_amplitudes(r#"{"amplitudes": [[3, 0], [4, 0]]}"#).unwrap();
        assert!((b[1].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn amplitude_rejections() {
        for bad in ["", "[]", "[0, 0]", "{\"amps\": [1]}", "[[1]]", "[[1, 2, 3]]", "[\"a\"]", "[1e400]"] {
            let e = parse_amplitudes(bad).unwrap_err();
            assert_eq!(e.kind, "target-parse", "{bad}");
        }
    }

    #[test]
    fn exactly_one_target() {
        let none = RunConfig::default();
        assert_eq!(resolve(&none).unwrap_err().field.as_deref(), Some("target"));
        let two = RunConfig {
            code: Some("binomial".into()),
            haar_seed: Some(1),
            ..RunConfig::default()
        };
        assert!(resolve(&two).is_err());
    }

    #[test]
    fn missing_file_kind() {
        let c = RunConfig {
            target_file: Some("/nonexistent/target.json".into()),
            ..RunConfig::default()
        };
        let e = resolve(&c).unwrap_err();
        assert_eq!(e.kind, "target-not-found");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn codeword_and_haar_targets() {
        let c = RunConfig {
            code: Some("binomial".into()),
            logical: Some("plus".into()),
            ..RunConfig::default()
        };
        let t = resolve(&c).unwrap();
        assert_eq!(t.label, "binomial:plus");
        assert_eq!(t.state.space().dim(), CODE_DIM);
        let h = RunConfig {
            haar_seed: Some(7),
            dim: Some(10),
            d: Some(4),
            ..RunConfig::default()
        };
        let t = resolve(&h).unwrap();
        assert!(t.state.amplitudes().rows(4, 6).iter().all(|z| z.norm() == 0.0));
    }
}
