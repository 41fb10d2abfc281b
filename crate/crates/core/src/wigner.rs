// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Wigner functions on rectangular phase-space grids.
//!
//! `W(x, p) = Tr[ρ D(2β) P] / (πλ)` with `β = (x + ip)/√(2λ)` and parity
//! `P = (−1)^n̂`, using `D(β) P D(β)† = D(2β) P`. Only the `dim × dim` block
//! of `D(2β)` enters, so no padding is needed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, DensityState, FockSpace, QuantumState};
use crate::io;
use crate::linalg::{self, CMatrix, CVector};

pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_HALF_WIDTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    x: Vec<f64>,
    p: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl WignerGrid {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.is_empty() || p.is_empty() {
            return Err(Error::param("grid", "axes must be non-empty"));
        }
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::param("grid", "axes must be finite"));
        }
        Ok(WignerGrid { x, p })
    }

    /// `points × points` grid over `[−w√λ, w√λ]²`.
    pub fn square(lambda: f64, half_width: f64, points: usize) -> Result<Self> {
        if points == 0 || !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("grid", "need points ≥ 1 and a positive half width"));
        }
        let w = half_width * lambda.sqrt();
        let axis = linspace(-w, w, points);
        WignerGrid::new(axis.clone(), axis)
    }

    pub fn default_for(space: &FockSpace) -> Self {
        WignerGrid::square(space.lambda(), DEFAULT_HALF_WIDTH, DEFAULT_POINTS).expect("default grid is valid")
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
}

/// Wigner values, `values[i_p][i_x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    grid: WignerGrid,
    lambda: f64,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    lambda: f64,
    n_x: usize,
    n_p: usize,
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
    layout: &'a str,
    integral: f64,
    min: f64,
    max: f64,
}

impl WignerFunction {
    pub fn grid(&self) -> &WignerGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Value at grid indices `(i_x, i_p)`.
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip][ix]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.grid.x);
        let wp = trapezoid_weights(&self.grid.p);
        self.values
            .iter()
            .zip(&wp)
            .map(|(row, wpi)| wpi * row.iter().zip(&wx).map(|(v, w)| v * w).sum::<f64>())
            .sum()
    }

    /// Row-major CSV: header `p\x,x_0,…`, then one row per `p`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p\\x");
        for x in &self.grid.x {
            out.push(',');
            out.push_str(&io::fmt_f64(*x));
        }
        out.push('\n');
        for (p, row) in self.grid.p.iter().zip(&self.values) {
            out.push_str(&io::fmt_f64(*p));
            for v in row {
                out.push(',');
                out.push_str(&io::fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    /// JSON metadata describing the CSV grid.
    pub fn sidecar_json(&self) -> String {
        let (x, p) = (&self.grid.x, &self.grid.p);
        let meta = Sidecar {
            lambda: self.lambda,
            n_x: x.len(),
            n_p: p.len(),
            x_min: x[0],
            x_max: x[x.len() - 1],
            p_min: p[0],
            p_max: p[p.len() - 1],
            layout: "rows are p, columns are x",
            integral: self.integral(),
            min: self.min(),
            max: self.max(),
        };
        serde_json::to_string_pretty(&meta).expect("sidecar serializes")
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Weighted pure components `(w_j, ψ_j)` with `ρ = Σ w_j |ψ_j⟩⟨ψ_j|`.
fn evaluate(space: &FockSpace, components: &[(f64, CVector)], grid: &WignerGrid) -> WignerFunction {
    let lambda = space.lambda();
    let dim = space.dim();
    let scale = 1.0 / (std::f64::consts::PI * lambda);
    let parity: Vec<f64> = (0..dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let signed: Vec<(f64, CVector)> = components
        .iter()
        .map(|(w, psi)| (*w, CVector::from_fn(dim, |n, _| psi[n] * parity[n])))
        .collect();
    let values = grid
        .p
        .par_iter()
        .map(|&p| {
            grid.x
                .iter()
                .map(|&x| {
                    let beta = Complex64::new(x, p) / (2.0 * lambda).sqrt();
                    let d = fock::displacement_matrix(dim, beta * 2.0);
                    let tr: f64 = components
                        .iter()
                        .zip(&signed)
                        .map(|((w, psi), (_, ppsi))| w * psi.dotc(&(&d * ppsi)).re)
                        .sum();
                    scale * tr
                })
                .collect()
        })
        .collect();
    WignerFunction {
        grid: grid.clone(),
        lambda,
        values,
    }
}

pub fn wigner_pure(state: &QuantumState, grid: &WignerGrid) -> WignerFunction {
    evaluate(state.space(), &[(1.0, state.amplitudes().clone())], grid)
}

pub fn wigner_density(rho: &DensityState, grid: &WignerGrid) -> WignerFunction {
    let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let components: Vec<(f64, CVector)> = vals
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > 1e-14)
        .map(|(j, w)| (*w, vecs.column(j).into_owned()))
        .collect();
    evaluate(rho.space(), &components, grid)
}

/// Single-point evaluation of `Tr[ρ D(2β) P]/(πλ)`.
pub fn wigner_point(rho: &CMatrix, lambda: f64, x: f64, p: f64) -> f64 {
    let dim = rho.nrows();
    let beta = Complex64::new(x, p) / (2.0 * lambda).sqrt();
    let d = fock::displacement_matrix(dim, beta * 2.0);
    let mut tr = Complex64::new(0.0, 0.0);
    for m in 0..dim {
        for n in 0..dim {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            tr += rho[(n, m)] * d[(m, n)] * sign;
        }
    }
    tr.re / (std::f64::consts::PI * lambda)
}
