// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Noncommutative Fourier transformation.
//!
//! An operator `Ĥ` is expanded over plane-wave operators
//! `exp(ik(x̂ cos τ + p̂ sin τ))` with coefficient
//! `f(k,τ) = Σ h_{n,m} f_{n,m}(k,τ)`. The drive that realizes `Ĥ` as a sum
//! of cosine potentials has amplitude `A = k|f|` and phase `φ = Arg f`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, OperatorMatrix};
use crate::io;
use crate::linalg::CMatrix;
use crate::special::{hyp1f1_scaled, ln_factorial};

fn check_indices(space: &FockSpace, n: usize, m: usize, k: f64) -> Result<()> {
    if n >= space.dim() || m >= space.dim() {
        return Err(Error::param(
            "n, m",
            format!("Fock indices ({n}, {m}) outside dim {}", space.dim()),
        ));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param("k", format!("wavenumber must be positive, got {k}")));
    }
    Ok(())
}

fn minus_i_pow(d: usize) -> Complex64 {
    match d % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `f_{n,m}(k, 0)`; the full kernel is this times `e^{i(m−n)τ}`.
pub(crate) fn kernel_at_zero(lambda: f64, n: usize, m: usize, k: f64) -> Complex64 {
    let (lo, hi) = if n < m { (n, m) } else { (m, n) };
    let d = hi - lo;
    let s = k * (lambda / 2.0).sqrt();
    let x = s * s;
    // e^{λk²/4} ₁F₁(1+hi; 1+d; −λk²/2), with both exponentials kept in log form.
    let f = hyp1f1_scaled((1 + hi) as f64, (1 + d) as f64, -x);
    if f.mantissa == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = lambda.ln() + 0.5 * (ln_factorial(hi) - ln_factorial(lo)) - ln_factorial(d)
        + d as f64 * s.ln()
        + 0.5 * x
        + f.log_scale;
    if log_mag < -745.0 {
        return Complex64::new(0.0, 0.0);
    }
    minus_i_pow(d) * (f.mantissa * log_mag.exp())
}

/// Closed-form kernel `f_{n,m}(k,τ)`.
pub fn kernel(space: &FockSpace, n: usize, m: usize, k: f64, tau: f64) -> Result<Complex64> {
    check_indices(space, n, m, k)?;
    let phase = Complex64::from_polar(1.0, (m as f64 - n as f64) * tau);
    Ok(kernel_at_zero(space.lambda(), n, m, k) * phase)
}

/// Quadrature settings for [`kernel_oracle_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Half-width of the integration square is
    /// `radius_factor · √(λ(max(n,m)+1)) + k_margin · λk`.
    pub radius_factor: f64,
    /// Extra radius per unit `λk`; the `e^{λk²/4}` prefactor amplifies the
    /// neglected Gaussian tail, so the square must grow with `k`.
    pub k_margin: f64,
    /// Points per axis.
    pub points: usize,
    /// Accepted relative difference between the full and half resolution
    /// estimates.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            radius_factor: 6.0,
            k_margin: 1.0,
            points: 400,
            tol: 1e-7,
        }
    }
}

fn husimi_integral(lambda: f64, n: usize, m: usize, k: f64, tau: f64, radius: f64, points: usize) -> Complex64 {
    let h = 2.0 * radius / (points - 1) as f64;
    let norm = (-0.5 * (ln_factorial(n) + ln_factorial(m))).exp();
    let scale = (2.0 * lambda).sqrt().recip();
    let (kc, ks) = (k * tau.cos(), k * tau.sin());
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..points {
        let x = -radius + i as f64 * h;
        let wx = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..points {
            let p = -radius + j as f64 * h;
            let wp = if j == 0 || j == points - 1 { 0.5 } else { 1.0 };
            let alpha = Complex64::new(x, p) * scale;
            let q = (-(x * x + p * p) / (2.0 * lambda)).exp()
                * alpha.conj().powu(n as u32)
                * alpha.powu(m as u32);
            row += q * Complex64::from_polar(wp, -(kc * x + ks * p));
        }
        total += row * wx;
    }
    total * norm * h * h
}

/// [`kernel_oracle_with`] using the default [`OracleConfig`].
pub fn kernel_oracle(space: &FockSpace, n: usize, m: usize, k: f64, tau: f64) -> Result<Complex64> {
    kernel_oracle_with(space, n, m, k, tau, &OracleConfig::default())
}

/// Slow independent evaluation of `f_{n,m}(k,τ)` by direct quadrature of
/// the Husimi-Q representation of `|n⟩⟨m|`:
/// `f = e^{λk²/4}/(2π) ∬ Q(x,p) e^{−ik(x cos τ + p sin τ)} dx dp`.
///
/// The error estimate is the difference between the trapezoid rule on the
/// full grid and at half resolution, plus a bound on the Gaussian tail
/// outside the square. A relative estimate above `cfg.tol` is reported as
/// [`Error::QuadratureNotConverged`].
pub fn kernel_oracle_with(
    space: &FockSpace,
    n: usize,
    m: usize,
    k: f64,
    tau: f64,
    cfg: &OracleConfig,
) -> Result<Complex64> {
    check_indices(space, n, m, k)?;
    if cfg.points < 8 {
        return Err(Error::param("points", "need at least 8 quadrature points"));
    }
    let lambda = space.lambda();
    let radius = cfg.radius_factor * (lambda * (n.max(m) + 1) as f64).sqrt() + cfg.k_margin * lambda * k;
    let pref = (lambda * k * k / 4.0).exp() / (2.0 * PI);
    let fine = husimi_integral(lambda, n, m, k, tau, radius, cfg.points) * pref;
    let coarse = husimi_integral(lambda, n, m, k, tau, radius, cfg.points / 2) * pref;
    // ∬_{r>R} |Q| ≈ 2πλ e^{−u} u^{(n+m)/2}/√(n!m!), u = R²/2λ.
    let u = radius * radius / (2.0 * lambda);
    let tail = (lambda.ln() + lambda * k * k / 4.0 - u + 0.5 * (n + m) as f64 * u.ln()
        - 0.5 * (ln_factorial(n) + ln_factorial(m)))
    .exp();
    let estimate = ((fine - coarse).norm() + tail) / fine.norm().max(f64::MIN_POSITIVE);
    if !(estimate <= cfg.tol) {
        return Err(Error::QuadratureNotConverged {
            estimate,
            tol: cfg.tol,
        });
    }
    Ok(fine)
}

/// `k_n = n·k_f/N_k`, `n = 1..=N_k`.
pub fn k_grid(k_f: f64, n_k: usize) -> Result<Vec<f64>> {
    if !(k_f > 0.0 && k_f.is_finite()) {
        return Err(Error::param("k_f", format!("must be positive, got {k_f}")));
    }
    if n_k == 0 {
        return Err(Error::param("N_k", "must be ≥ 1"));
    }
    Ok((1..=n_k).map(|n| n as f64 * k_f / n_k as f64).collect())
}

/// `τ_m = m·2π/N_t`, `m = 1..=N_t`.
pub fn tau_grid(n_t: usize) -> Result<Vec<f64>> {
    if n_t == 0 {
        return Err(Error::param("N_t", "must be ≥ 1"));
    }
    Ok((1..=n_t).map(|m| m as f64 * 2.0 * PI / n_t as f64).collect())
}

/// Kernel values on a `(k, τ)` grid.
///
/// Only the τ-independent factors `f_{n,m}(k_n, 0)` are stored; the
/// τ-dependence is the exact phase `e^{i(m−n)τ}`, applied on lookup.
#[derive(Debug, Clone)]
pub struct NcftKernelTable {
    space: FockSpace,
    k_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    base: Vec<CMatrix>,
}

impl NcftKernelTable {
    pub fn new(space: FockSpace, k_f: f64, n_k: usize, n_t: usize) -> Result<Self> {
        Self::from_grids(space, k_grid(k_f, n_k)?, tau_grid(n_t)?)
    }

    pub fn from_grids(space: FockSpace, k_grid: Vec<f64>, tau_grid: Vec<f64>) -> Result<Self> {
        if k_grid.is_empty() || k_grid.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::param("k_grid", "entries must be positive and finite"));
        }
        if tau_grid.is_empty() || tau_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("tau_grid", "entries must be finite"));
        }
        let dim = space.dim();
        let lambda = space.lambda();
        let base = k_grid
            .par_iter()
            .map(|&k| CMatrix::from_fn(dim, dim, |n, m| kernel_at_zero(lambda, n, m, k)))
            .collect();
        Ok(NcftKernelTable {
            space,
            k_grid,
            tau_grid,
            base,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    /// `f_{n,m}(k_{ik}, 0)` as a `dim × dim` matrix.
    pub fn base(&self, ik: usize) -> &CMatrix {
        &self.base[ik]
    }

    /// `f_{n,m}(k_{ik}, τ_{it})`.
    pub fn get(&self, n: usize, m: usize, ik: usize, it: usize) -> Complex64 {
        let tau = self.tau_grid[it];
        self.base[ik][(n, m)] * Complex64::from_polar(1.0, (m as f64 - n as f64) * tau)
    }
}

/// `f_tar(k_n, τ_m) = Σ h_{n,m} f_{n,m}(k_n, τ_m)` as an `N_k × N_t` matrix.
pub fn f_target(h: &OperatorMatrix, table: &NcftKernelTable) -> Result<CMatrix> {
    table.space.check_same(h.space())?;
    let dim = table.space.dim();
    let h = h.matrix();
    let n_t = table.tau_grid.len();
    let rows: Vec<Vec<Complex64>> = table
        .base
        .par_iter()
        .map(|base| {
            // Collect by frequency m − n first; τ enters only through e^{i(m−n)τ}.
            let mut by_freq = vec![Complex64::new(0.0, 0.0); 2 * dim - 1];
            for n in 0..dim {
                for m in 0..dim {
                    by_freq[m + dim - 1 - n] += h[(n, m)] * base[(n, m)];
                }
            }
            table
                .tau_grid
                .iter()
                .map(|&tau| {
                    by_freq
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| g.norm_sqr() > 0.0)
                        .map(|(j, g)| {
                            let freq = j as f64 - (dim - 1) as f64;
                            g * Complex64::from_polar(1.0, freq * tau)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(CMatrix::from_fn(rows.len(), n_t, |r, c| rows[r][c]))
}

/// Sampled drive: amplitude `A(k_n,τ_m) ≥ 0` and phase `φ(k_n,τ_m)` in
/// `(−π, π]` stored as `[k][τ]`, plus the envelope `β(τ_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPulse")]
pub struct DrivePulse {
    k_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    amplitude: Vec<Vec<f64>>,
    phase: Vec<Vec<f64>>,
    envelope: Vec<f64>,
    beta0: f64,
}

#[derive(Deserialize)]
struct RawPulse {
    k_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    amplitude: Vec<Vec<f64>>,
    phase: Vec<Vec<f64>>,
    envelope: Vec<f64>,
    beta0: f64,
}

impl TryFrom<RawPulse> for DrivePulse {
    type Error = Error;
    fn try_from(r: RawPulse) -> Result<Self> {
        DrivePulse::new(r.k_grid, r.tau_grid, r.amplitude, r.phase, r.envelope, r.beta0)
    }
}

/// Maps an angle to `(−π, π]`.
pub fn principal_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

impl DrivePulse {
    pub fn new(
        k_grid: Vec<f64>,
        tau_grid: Vec<f64>,
        amplitude: Vec<Vec<f64>>,
        phase: Vec<Vec<f64>>,
        envelope: Vec<f64>,
        beta0: f64,
    ) -> Result<Self> {
        let pulse = DrivePulse {
            k_grid,
            tau_grid,
            amplitude,
            phase,
            envelope,
            beta0,
        };
        pulse.validate()?;
        Ok(pulse)
    }

    pub fn validate(&self) -> Result<()> {
        let (n_k, n_t) = (self.k_grid.len(), self.tau_grid.len());
        if n_k == 0 || n_t == 0 {
            return Err(Error::param("pulse", "grids must be non-empty"));
        }
        if self.k_grid.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::param("k_grid", "entries must be positive and finite"));
        }
        if self.tau_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("tau_grid", "entries must be finite"));
        }
        for (name, arr) in [("amplitude", &self.amplitude), ("phase", &self.phase)] {
            if arr.len() != n_k || arr.iter().any(|row| row.len() != n_t) {
                return Err(Error::param(
                    if name == "amplitude" { "amplitude" } else { "phase" },
                    format!("expected {n_k} × {n_t} samples"),
                ));
            }
        }
        if self.amplitude.iter().flatten().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(Error::param("amplitude", "entries must be finite and ≥ 0"));
        }
        if self.phase.iter().flatten().any(|&p| !(p > -PI && p <= PI)) {
            return Err(Error::param("phase", "entries must lie in (−π, π]"));
        }
        if self.envelope.len() != n_t {
            return Err(Error::param("envelope", format!("expected {n_t} samples")));
        }
        if self.envelope.iter().any(|b| !b.is_finite()) || !self.beta0.is_finite() {
            return Err(Error::param("envelope", "entries must be finite"));
        }
        Ok(())
    }

    /// Pulse realizing the coefficient array `f` (`N_k × N_t`):
    /// `A = k|f|`, `φ = Arg f`, envelope `β₀` everywhere.
    pub fn from_coefficients(k_grid: Vec<f64>, tau_grid: Vec<f64>, f: &CMatrix, beta0: f64) -> Result<Self> {
        if f.nrows() != k_grid.len() || f.ncols() != tau_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: k_grid.len() * tau_grid.len(),
                found: f.nrows() * f.ncols(),
            });
        }
        let amplitude = (0..f.nrows())
            .map(|r| (0..f.ncols()).map(|c| k_grid[r] * f[(r, c)].norm()).collect())
            .collect();
        let phase = (0..f.nrows())
            .map(|r| (0..f.ncols()).map(|c| principal_angle(f[(r, c)].arg())).collect())
            .collect();
        let envelope = vec![beta0; tau_grid.len()];
        DrivePulse::new(k_grid, tau_grid, amplitude, phase, envelope, beta0)
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn amplitude(&self) -> &[Vec<f64>] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[Vec<f64>] {
        &self.phase
    }

    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn n_k(&self) -> usize {
        self.k_grid.len()
    }

    pub fn n_t(&self) -> usize {
        self.tau_grid.len()
    }

    /// `k_f`, taken as the largest grid wavenumber.
    pub fn k_f(&self) -> f64 {
        self.k_grid.iter().copied().fold(0.0, f64::max)
    }

    pub fn with_envelope(mut self, envelope: Vec<f64>) -> Result<Self> {
        if envelope.len() != self.n_t() {
            return Err(Error::DimensionMismatch {
                expected: self.n_t(),
                found: envelope.len(),
            });
        }
        if envelope.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("envelope", "entries must be finite"));
        }
        self.envelope = envelope;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pulse serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Long-format CSV `k,tau,amplitude,phase`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let rows = self.k_grid.iter().enumerate().flat_map(|(ik, &k)| {
            self.tau_grid
                .iter()
                .enumerate()
                .map(move |(it, &t)| [k, t, self.amplitude[ik][it], self.phase[ik][it]])
        });
        io::csv_string(&["k", "tau", "amplitude", "phase"], rows)
    }
}

/// Builds the kernel table for `h`'s space and returns the drive pulse.
pub fn synthesize_pulse(h: &OperatorMatrix, k_f: f64, n_k: usize, n_t: usize, beta0: f64) -> Result<DrivePulse> {
    let table = NcftKernelTable::new(*h.space(), k_f, n_k, n_t)?;
    synthesize_pulse_with(h, &table, beta0)
}

/// As [`synthesize_pulse`], reusing a precomputed table.
pub fn synthesize_pulse_with(h: &OperatorMatrix, table: &NcftKernelTable, beta0: f64) -> Result<DrivePulse> {
    if !beta0.is_finite() {
        return Err(Error::param("beta0", "must be finite"));
    }
    let f = f_target(h, table)?;
    DrivePulse::from_coefficients(table.k_grid.clone(), table.tau_grid.clone(), &f, beta0)
}

/// Discretized plane-wave resynthesis
/// `Σ_{k,τ} (Δk Δτ/2π) A e^{iφ} exp(ik(x̂ cos τ + p̂ sin τ))`
/// on a uniform grid, ignoring the envelope.
pub fn reconstruct(pulse: &DrivePulse, space: &FockSpace) -> CMatrix {
    let dim = space.dim();
    let n_t = pulse.n_t();
    let dk = pulse.k_f() / pulse.n_k() as f64;
    let dtau = 2.0 * PI / n_t as f64;
    let weight = dk * dtau / (2.0 * PI);
    let parts: Vec<CMatrix> = pulse
        .k_grid
        .par_iter()
        .enumerate()
        .map(|(ik, &k)| {
            let w = fock::plane_wave(space, k, 0.0).into_matrix();
            // exp(ik(x̂ cos τ + p̂ sin τ))_{ab} = W_{ab} e^{i(a−b)τ}
            let mut by_freq = vec![Complex64::new(0.0, 0.0); 2 * dim - 1];
            for (j, slot) in by_freq.iter_mut().enumerate() {
                let freq = j as f64 - (dim - 1) as f64;
                *slot = (0..n_t)
                    .map(|it| {
                        let tau = pulse.tau_grid[it];
                        Complex64::from_polar(pulse.amplitude[ik][it], pulse.phase[ik][it] + freq * tau)
                    })
                    .sum();
            }
            CMatrix::from_fn(dim, dim, |a, b| w[(a, b)] * by_freq[a + dim - 1 - b] * weight)
        })
        .collect();
    parts.into_iter().fold(CMatrix::zeros(dim, dim), |acc, p| acc + p)
}
