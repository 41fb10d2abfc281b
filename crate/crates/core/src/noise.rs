// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-photon loss and envelope amplitude noise.
//!
//! Each slice of a gate sequence acts for `Δτ = T/N_t` under the
//! piecewise-constant Hamiltonian `H ≈ Σ (θ/Δτ) O cos(k x̂ + γ) O†` (sum over
//! the slice's gates, `O = diag(e^{inτ})`). The master equation
//! `ρ' = −(i/λ)[H, ρ] + κ D[â]ρ` is integrated in the interaction picture of
//! `H`: the coherent part is applied exactly from the eigen-decomposition of
//! `H`, and the dissipator with fixed-step RK4.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, DensityState, QuantumState};
use crate::haar;
use crate::io;
use crate::linalg::{self, CMatrix, CVector};
use crate::qlg::{GateSequence, PreparedSequence};

/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Single-photon loss rate in units of `ω₀`.
    pub kappa: f64,
    /// Amplitude-noise strength.
    pub zeta: f64,
    pub seed: u64,
    /// RK4 steps per slice.
    pub dt_substeps: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            kappa: 0.0,
            zeta: 0.0,
            seed: 0,
            dt_substeps: 4,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::param("kappa", format!("must be non-negative, got {}", self.kappa)));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::param("zeta", format!("must be non-negative, got {}", self.zeta)));
        }
        if self.dt_substeps == 0 {
            return Err(Error::param("dt_substeps", "must be ≥ 1"));
        }
        Ok(())
    }
}

fn slice_duration(seq: &GateSequence) -> f64 {
    seq.meta().period / seq.meta().n_t.max(1) as f64
}

/// Spectrum `(e, V)` of each slice's Hamiltonian, with the slice unitary
/// `U_m = V diag(e^{−i e Δτ/λ}) V†` equal to the product of the slice's gates.
/// In the untruncated space this is `H_m = Σ (θ/Δτ) O cos(k x̂ + γ) O†`;
/// truncated cosines do not commute, so `H_m` is taken as the principal
/// logarithm of the gate product instead of the plain sum.
fn slice_spectra(seq: &GateSequence) -> Vec<(Vec<f64>, CMatrix)> {
    let space = *seq.space();
    let dim = space.dim();
    let scale = space.lambda() / slice_duration(seq);
    let prepared = PreparedSequence::from_sequence(seq);
    (0..prepared.n_slices())
        .into_par_iter()
        .map(|m| {
            let mut scratch = CVector::zeros(dim);
            let columns: Vec<CVector> = (0..dim)
                .map(|j| {
                    let mut c = CVector::zeros(dim);
                    c[j] = Complex64::new(1.0, 0.0);
                    prepared.apply_slice(m, 1.0, &mut c, &mut scratch);
                    c
                })
                .collect();
            let (values, v) = linalg::normal_eigen(&CMatrix::from_columns(&columns));
            (values.iter().map(|u| -u.arg() * scale).collect(), v)
        })
        .collect()
}

/// Piecewise-constant slice Hamiltonians `H_m`.
pub fn slice_hamiltonians(seq: &GateSequence) -> Vec<CMatrix> {
    slice_spectra(seq)
        .into_iter()
        .map(|(e, v)| linalg::spectral_apply(&e, &v, |x| Complex64::new(x, 0.0)))
        .collect()
}

/// Elementwise `M_{ij} e^{i(e_i − e_j)s/λ}`: `U(s)† M U(s)` in the eigenbasis of `H`.
fn rotate(m: &CMatrix, energies: &[f64], s: f64, lambda: f64) -> CMatrix {
    let ph: Vec<Complex64> = energies.iter().map(|e| Complex64::from_polar(1.0, e * s / lambda)).collect();
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * ph[i] * ph[j].conj())
}

/// `κ(a ρ a† − {a†a, ρ}/2)`.
fn dissipator(a: &CMatrix, n: &CMatrix, rho: &CMatrix, kappa: f64) -> CMatrix {
    let anti = n * rho + rho * n;
    (a * rho * a.adjoint() - anti * Complex64::new(0.5, 0.0)) * Complex64::new(kappa, 0.0)
}

/// Integrates the master equation through every slice of `seq`.
pub fn lindblad_evolve(seq: &GateSequence, rho0: &DensityState, cfg: &NoiseConfig) -> Result<DensityState> {
    cfg.validate()?;
    let space = *seq.space();
    space.check_same(rho0.space())?;
    let lambda = space.lambda();
    let dt = slice_duration(seq);
    let h_sub = dt / cfg.dt_substeps as f64;
    let (a_op, _) = fock::ladder_ops(&space);
    let a = a_op.matrix().clone();
    let n = a.adjoint() * &a;
    let mut rho = rho0.matrix().clone();
    for (energies, v) in slice_spectra(seq) {
        let vh = v.adjoint();
        // Work in the eigenbasis of H.
        let mut r = &vh * &rho * &v;
        if cfg.kappa > 0.0 {
            let a_e = &vh * &a * &v;
            let n_e = &vh * &n * &v;
            let at = |s: f64| (rotate(&a_e, &energies, s, lambda), rotate(&n_e, &energies, s, lambda));
            for step in 0..cfg.dt_substeps {
                let s0 = step as f64 * h_sub;
                let (a0, n0) = at(s0);
                let (am, nm) = at(s0 + 0.5 * h_sub);
                let (a1, n1) = at(s0 + h_sub);
                let half = Complex64::new(0.5 * h_sub, 0.0);
                let full = Complex64::new(h_sub, 0.0);
                let k1 = dissipator(&a0, &n0, &r, cfg.kappa);
                let k2 = dissipator(&am, &nm, &(&r + &k1 * half), cfg.kappa);
                let k3 = dissipator(&am, &nm, &(&r + &k2 * half), cfg.kappa);
                let k4 = dissipator(&a1, &n1, &(&r + &k3 * full), cfg.kappa);
                r += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
                    * Complex64::new(h_sub / 6.0, 0.0);
            }
        }
        // Back to the lab frame at the end of the slice.
        let u = CMatrix::from_diagonal(&CVector::from_fn(energies.len(), |i, _| {
            Complex64::from_polar(1.0, -energies[i] * dt / lambda)
        }));
        rho = &v * (&u * r * u.adjoint()) * &vh;
    }
    let drift = (rho.trace().re - rho0.trace()).abs();
    if !(drift <= TRACE_DRIFT_LIMIT) {
        return Err(Error::TraceDrift {
            drift,
            limit: TRACE_DRIFT_LIMIT,
        });
    }
    Ok(DensityState::from_matrix_unchecked(space, linalg::hermitize(&rho)))
}

/// `exp(−κ ∫₀ᵀ n̄(t) dt)` with `n̄` taken at slice boundaries of the lossless
/// trajectory and integrated by the trapezoid rule.
pub fn coherent_bound(seq: &GateSequence, psi0: &QuantumState, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", format!("must be non-negative, got {kappa}")));
    }
    seq.space().check_same(psi0.space())?;
    if kappa == 0.0 {
        return Ok(1.0);
    }
    let dt = slice_duration(seq);
    let prepared = PreparedSequence::from_sequence(seq);
    let mut psi = psi0.amplitudes().clone();
    let mut scratch = CVector::zeros(psi.len());
    let photons = |v: &CVector| v.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>();
    let mut prev = photons(&psi);
    let mut integral = 0.0;
    for m in 0..prepared.n_slices() {
        prepared.apply_slice(m, 1.0, &mut psi, &mut scratch);
        let next = photons(&psi);
        integral += 0.5 * dt * (prev + next);
        prev = next;
    }
    Ok((-kappa * integral).exp())
}

/// `β_m + ζ ξ_m/√Δτ` with `ξ_m` i.i.d. standard normal drawn from stream
/// `stream` of `seed`.
pub fn noisy_envelope(beta: &[f64], zeta: f64, dtau: f64, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::param("zeta", format!("must be non-negative, got {zeta}")));
    }
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(Error::param("dtau", format!("must be positive, got {dtau}")));
    }
    if zeta == 0.0 {
        return Ok(beta.to_vec());
    }
    let mut rng = haar::sample_rng(seed, stream);
    let scale = zeta / dtau.sqrt();
    Ok(beta
        .iter()
        .map(|b| {
            let xi: f64 = rng.sample(StandardNormal);
            b + scale * xi
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub mean_infidelity: f64,
    pub std: f64,
    pub n_samples: usize,
    /// Coherent bound `1 − exp(−κ∫n̄)` for loss sweeps; the noiseless
    /// infidelity for amplitude-noise sweeps.
    pub bound: f64,
}

/// CSV with columns `(param_name, mean_infidelity, std, n_samples, bound)`.
pub fn sweep_csv(param_name: &str, points: &[SweepPoint]) -> String {
    io::csv_string(
        &[param_name, "mean_infidelity", "std", "n_samples", "bound"],
        points
            .iter()
            .map(|p| [p.param, p.mean_infidelity, p.std, p.n_samples as f64, p.bound]),
    )
}

/// Preparation infidelity `1 − ⟨ψ_tar|ρ(T)|ψ_tar⟩` for each loss rate.
pub fn kappa_sweep(
    seq: &GateSequence,
    psi0: &QuantumState,
    target: &QuantumState,
    kappas: &[f64],
    dt_substeps: usize,
) -> Result<Vec<SweepPoint>> {
    let rho0 = psi0.to_density();
    kappas
        .par_iter()
        .map(|&kappa| {
            let cfg = NoiseConfig {
                kappa,
                dt_substeps,
                ..NoiseConfig::default()
            };
            let rho = lindblad_evolve(seq, &rho0, &cfg)?;
            let infidelity = (1.0 - rho.fidelity_pure(target)?).max(0.0);
            let bound = coherent_bound(seq, psi0, kappa)?;
            Ok(SweepPoint {
                param: kappa,
                mean_infidelity: infidelity,
                std: 0.0,
                n_samples: 1,
                bound: 1.0 - bound,
            })
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Mean preparation infidelity over `samples` noisy envelopes per `ζ`.
/// Sample `i` uses noise stream `i` at every `ζ`.
#[allow(clippy::too_many_arguments)]
pub fn zeta_sweep(
    prepared: &PreparedSequence,
    envelope: &[f64],
    dtau: f64,
    psi0: &QuantumState,
    target: &QuantumState,
    zetas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if samples == 0 {
        return Err(Error::param("samples", "must be ≥ 1"));
    }
    let infidelity = |env: &[f64]| -> Result<f64> {
        let out = prepared.evolve(env, psi0)?;
        Ok((1.0 - fock::fidelity_state(target, &out)?).max(0.0))
    };
    let baseline = infidelity(envelope)?;
    zetas
        .iter()
        .map(|&zeta| {
            let values = (0..samples as u64)
                .into_par_iter()
                .map(|i| infidelity(&noisy_envelope(envelope, zeta, dtau, seed, i)?))
                .collect::<Result<Vec<f64>>>()?;
            let (mean, std) = mean_std(&values);
            Ok(SweepPoint {
                param: zeta,
                mean_infidelity: mean,
                std,
                n_samples: samples,
                bound: baseline,
            })
        })
        .collect()
}
