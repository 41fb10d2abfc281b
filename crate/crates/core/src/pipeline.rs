// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Target → generator → drive pulse, shared by state preparation, gate
//! synthesis and the benchmarks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, QuantumState};
use crate::ncft::{self, DrivePulse, NcftKernelTable};
use crate::qlg::{self, GateSequence, PreparedSequence};
use crate::synth::{self, LogicalEmbedding, PrincipalHamiltonian, TargetUnitary};

/// Discretization and drive strength of a single-period sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub n_t: usize,
    pub n_k: usize,
    pub k_f: f64,
    pub beta0: f64,
    /// Period `T` in units of `1/ω₀`.
    pub period: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            n_t: 64,
            n_k: 40,
            k_f: 40.0,
            beta0: 1.0,
            period: 2.0 * PI,
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::param("N_t", "must be ≥ 1"));
        }
        if self.n_k == 0 {
            return Err(Error::param("N_k", "must be ≥ 1"));
        }
        if !(self.k_f > 0.0 && self.k_f.is_finite()) {
            return Err(Error::param("k_f", format!("must be positive, got {}", self.k_f)));
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::param("beta0", format!("must be positive, got {}", self.beta0)));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::param("T", format!("must be positive, got {}", self.period)));
        }
        Ok(())
    }

    pub fn kernel_table(&self, space: FockSpace) -> Result<NcftKernelTable> {
        self.validate()?;
        NcftKernelTable::new(space, self.k_f, self.n_k, self.n_t)
    }
}

/// Everything derived from one target unitary.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub target: TargetUnitary,
    pub generator: PrincipalHamiltonian,
    pub pulse: DrivePulse,
    pub config: DriveConfig,
}

impl Synthesis {
    pub fn space(&self) -> &FockSpace {
        self.target.space()
    }

    /// Gate sequence at the pulse's current envelope.
    pub fn sequence(&self) -> Result<GateSequence> {
        qlg::compile(&self.pulse, self.space(), self.config.period)
    }

    /// Diagonalized sequence at unit envelope; replay with `β` per slice.
    pub fn prepared(&self) -> Result<PreparedSequence> {
        PreparedSequence::from_pulse(&self.pulse, self.space(), self.config.period)
    }
}

/// Drive pulse for `target`. The sequence at envelope `β₀` generates
/// `exp(−(i/λ) β₀T Ĥ)`, so the generator is extracted with period `β₀T`.
pub fn synthesize_unitary(
    target: TargetUnitary,
    config: DriveConfig,
    table: Option<&NcftKernelTable>,
) -> Result<Synthesis> {
    config.validate()?;
    let generator = synth::principal_hamiltonian(&target, config.beta0 * config.period)?;
    let owned;
    let table = match table {
        Some(t) => {
            target.space().check_same(t.space())?;
            t
        }
        None => {
            owned = config.kernel_table(*target.space())?;
            &owned
        }
    };
    if table.k_grid().len() != config.n_k || table.tau_grid().len() != config.n_t {
        return Err(Error::param("table", "kernel table grid differs from the drive config"));
    }
    let pulse = ncft::synthesize_pulse_with(&generator.hamiltonian, table, config.beta0)?;
    Ok(Synthesis {
        target,
        generator,
        pulse,
        config,
    })
}

/// Pulse steering `psi0` to `psi_tar` through the Householder map.
pub fn synthesize_state(
    psi0: &QuantumState,
    psi_tar: &QuantumState,
    config: DriveConfig,
    table: Option<&NcftKernelTable>,
) -> Result<Synthesis> {
    synthesize_unitary(synth::householder_unitary(psi0, psi_tar)?, config, table)
}

/// Pulse implementing `ul` on the code space and the identity elsewhere.
pub fn synthesize_gate(
    embedding: &LogicalEmbedding,
    ul: &crate::linalg::CMatrix,
    config: DriveConfig,
    table: Option<&NcftKernelTable>,
) -> Result<Synthesis> {
    synthesize_unitary(synth::embed_logical_gate(embedding, ul)?, config, table)
}

/// Outcome of preparing a state with an unoptimized sequence.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub synthesis: Synthesis,
    pub output: QuantumState,
    pub fidelity: f64,
}

/// Synthesizes, compiles and runs a state preparation.
pub fn prepare_state(
    psi0: &QuantumState,
    psi_tar: &QuantumState,
    config: DriveConfig,
    table: Option<&NcftKernelTable>,
) -> Result<Preparation> {
    let synthesis = synthesize_state(psi0, psi_tar, config, table)?;
    let prepared = synthesis.prepared()?;
    let output = prepared.evolve(synthesis.pulse.envelope(), psi0)?;
    let fidelity = fock::fidelity_state(psi_tar, &output)?;
    Ok(Preparation {
        synthesis,
        output,
        fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use crate::linalg::{self, CMatrix};

    #[test]
    fn weak_generator_limit() {
        // For U = exp(−i s G T/λ) the leading-order drive becomes exact as
        // s → 0, so the infidelity must shrink along the ladder.
        let s = FockSpace::new(8, 1.0).unwrap();
        let mut rng = haar::sample_rng(17, 0);
        let g = CMatrix::from_fn(8, 8, |_, _| haar::gaussian_vector(1, &mut rng)[0]);
        let g = linalg::hermitize(&g);
        let cfg = DriveConfig {
            n_t: 32,
            n_k: 24,
            k_f: 12.0,
            ..DriveConfig::default()
        };
        let table = cfg.kernel_table(s).unwrap();
        let vac = QuantumState::vacuum(s);
        let mut last = f64::INFINITY;
        for scale in [0.2, 0.1, 0.05, 0.025] {
            let u = linalg::expm_hermitian(&g, scale * cfg.period);
            let target = TargetUnitary::new(s, u).unwrap();
            let want = target.apply(&vac).unwrap();
            let syn = synthesize_unitary(target, cfg, Some(&table)).unwrap();
            let out = syn.prepared().unwrap().evolve(syn.pulse.envelope(), &vac).unwrap();
            let infidelity = 1.0 - fock::fidelity_state(&want, &out).unwrap();
            assert!(infidelity < last, "scale {scale}: {infidelity} ≥ {last}");
            last = infidelity;
        }
        assert!(last < 1e-3, "{last}");
    }

    #[test]
    fn envelope_and_beta0_compensate() {
        let s = FockSpace::new(6, 1.0).unwrap();
        let vac = QuantumState::vacuum(s);
        let tar = haar::sample_haar_state(s, 3, 2, 0).unwrap();
        let base = DriveConfig {
            n_t: 16,
            n_k: 12,
            k_f: 8.0,
            ..DriveConfig::default()
        };
        let a = prepare_state(&vac, &tar, base, None).unwrap();
        let b = prepare_state(&vac, &tar, DriveConfig { beta0: 2.0, ..base }, None).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-10);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = DriveConfig {
            beta0: 0.0,
            ..DriveConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
