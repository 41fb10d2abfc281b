// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Run directories: named artifacts plus `manifest.json`. Everything
//! time-dependent lives in the manifest, so artifacts are byte-identical
//! across repeated runs of the same configuration.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Artifacts held in memory until the run has succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        let name = name.into();
        debug_assert!(name != MANIFEST && !name.contains('/'));
        self.files.push((name, contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash identifying `(command, config)`.
pub fn config_hash(command: &str, cfg: &RunConfig) -> String {
    sha256_hex(format!("{command}\n{}", cfg.canonical_json()).as_bytes())
}

pub fn default_out_dir(command: &str, cfg: &RunConfig) -> PathBuf {
    PathBuf::from(format!("qlg-{}-{}", command.replace(' ', "-"), &config_hash(command, cfg)[..12]))
}

#[derive(Serialize)]
struct ArtifactEntry<'a> {
    name: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config_sha256: String,
    config: &'a RunConfig,
    artifacts: Vec<ArtifactEntry<'a>>,
    created_unix: u64,
}

/// Refuses to reuse a non-empty directory.
pub fn check_out_dir(out: &Path) -> Result<(), CliError> {
    match std::fs::read_dir(out) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(CliError::config(
                    "output-exists",
                    format!("{} exists and is not empty", out.display()),
                ));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(CliError::io(&out.display().to_string(), e)),
    }
}

/// Writes every artifact and the manifest into `out`.
pub fn write_run(out: &Path, command: &str, cfg: &RunConfig, artifacts: &Artifacts) -> Result<(), CliError> {
    check_out_dir(out)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(&out.display().to_string(), e))?;
    for (name, contents) in &artifacts.files {
        let path = out.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    }
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = Manifest {
        tool: "qlg",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_sha256: config_hash(command, cfg),
        config: cfg,
        artifacts: artifacts
            .files
            .iter()
            .map(|(name, c)| ArtifactEntry {
                name,
                bytes: c.len(),
                sha256: sha256_hex(c),
            })
            .collect(),
        created_unix,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = out.join(MANIFEST);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn hash_depends_on_command_and_config() {
        let a = RunConfig::default();
        let b = RunConfig {
            n_t: Some(8),
            ..RunConfig::default()
        };
        assert_ne!(config_hash("haar", &a), config_hash("haar", &b));
        assert_ne!(config_hash("haar", &a), config_hash("noise", &a));
        assert_eq!(config_hash("haar", &b), config_hash("haar", &b.clone()));
    }

    #[test]
    fn writes_manifest_and_refuses_reuse() {
        let dir = std::env::temp_dir().join(format!("qlg-output-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let mut arts = Artifacts::new();
        arts.add("a.csv", "x\n1\n");
        write_run(&dir, "haar", &RunConfig::default(), &arts).unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m["artifacts"][0]["name"], "a.csv");
        assert_eq!(m["artifacts"][0]["sha256"], sha256_hex(b"x\n1\n"));
        let e = write_run(&dir, "haar", &RunConfig::default(), &arts).unwrap_err();
        assert_eq!(e.kind, "output-exists");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
