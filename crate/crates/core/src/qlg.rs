// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum lattice gates.
//!
//! A drive pulse is discretized into elementary gates
//! `ĝ = exp(−(i/λ) θ cos(k x̂ + γ))`, one per `(τ_m, k_n)` grid point,
//! ordered time-major with `k` ascending inside each slice. Gates act in the
//! frame rotating with the free oscillator, so the gate of slice `τ` is
//! `O ĝ O†` with `O = exp(iτ n̂)`; equivalently the lattice potential is
//! `cos(k(x̂ cos τ + p̂ sin τ) + γ)`.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, OperatorMatrix, QuantumState};
use crate::linalg::{self, CMatrix, CVector};
use crate::ncft::DrivePulse;
use crate::synth::TargetUnitary;

/// Allowed norm drift per thousand gates.
pub const NORM_DRIFT_PER_KGATE: f64 = 1e-8;

/// Default capacity of [`GateCache`].
pub const DEFAULT_CACHE_CAPACITY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub theta: f64,
    pub gamma: f64,
    pub k: f64,
    /// Slice time of the rotating frame.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub n_t: usize,
    pub n_k: usize,
    pub k_f: f64,
    pub beta0: f64,
    /// Drive period `T` used in the θ scaling.
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct GateSequence {
    space: FockSpace,
    meta: SequenceMeta,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct RawSequence {
    space: FockSpace,
    meta: SequenceMeta,
    gates: Vec<Gate>,
}

impl TryFrom<RawSequence> for GateSequence {
    type Error = Error;
    fn try_from(r: RawSequence) -> Result<Self> {
        GateSequence::new(r.space, r.meta, r.gates)
    }
}

impl GateSequence {
    pub fn new(space: FockSpace, meta: SequenceMeta, gates: Vec<Gate>) -> Result<Self> {
        let expected = meta.n_t.checked_mul(meta.n_k);
        if expected != Some(gates.len()) {
            return Err(Error::param(
                "gates",
                format!("expected N_t·N_k = {}·{} gates, found {}", meta.n_t, meta.n_k, gates.len()),
            ));
        }
        for (i, g) in gates.iter().enumerate() {
            if !(g.k > 0.0 && g.k.is_finite()) {
                return Err(Error::param("k", format!("gate {i}: wavenumber must be positive")));
            }
            if !(g.gamma > -PI && g.gamma <= PI) {
                return Err(Error::param("gamma", format!("gate {i}: phase outside (−π, π]")));
            }
            if !g.theta.is_finite() || !g.tau.is_finite() {
                return Err(Error::param("theta", format!("gate {i}: non-finite parameter")));
            }
        }
        Ok(GateSequence { space, meta, gates })
    }

    /// Sequence with no gates; acts as the identity.
    pub fn empty(space: FockSpace) -> Self {
        GateSequence {
            space,
            meta: SequenceMeta {
                n_t: 0,
                n_k: 0,
                k_f: 0.0,
                beta0: 0.0,
                period: 2.0 * PI,
            },
            gates: Vec::new(),
        }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates grouped by time slice.
    pub fn slices(&self) -> impl Iterator<Item = &[Gate]> {
        self.gates.chunks(self.meta.n_k.max(1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `θ_{n,m} = β(τ_m) A(k_n,τ_m) (T/N_t)(k_f/N_k)`, `γ_{n,m} = φ(k_n,τ_m)`.
pub fn compile(pulse: &DrivePulse, space: &FockSpace, period: f64) -> Result<GateSequence> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::param("T", format!("must be positive, got {period}")));
    }
    pulse.validate()?;
    let (n_t, n_k) = (pulse.n_t(), pulse.n_k());
    let k_f = pulse.k_f();
    let step = period / n_t as f64 * k_f / n_k as f64;
    let mut gates = Vec::with_capacity(n_t * n_k);
    for it in 0..n_t {
        let beta = pulse.envelope()[it];
        for ik in 0..n_k {
            gates.push(Gate {
                theta: beta * pulse.amplitude()[ik][it] * step,
                gamma: pulse.phase()[ik][it],
                k: pulse.k_grid()[ik],
                tau: pulse.tau_grid()[it],
            });
        }
    }
    GateSequence::new(
        *space,
        SequenceMeta {
            n_t,
            n_k,
            k_f,
            beta0: pulse.beta0(),
            period,
        },
        gates,
    )
}

/// `cos(k x̂ + γ) = (e^{iγ}W + e^{−iγ}W†)/2` with `W = exp(ik x̂)`, built in
/// the padded space and truncated.
pub fn cosine_operator(space: &FockSpace, gamma: f64, k: f64) -> CMatrix {
    let alpha = fock::plane_wave_alpha(space.lambda(), k, 0.0);
    let w = fock::truncate(&fock::displacement_matrix(space.padded_dim(), alpha), space.dim());
    let e = Complex64::from_polar(0.5, gamma);
    // Using W† for the second term keeps the result exactly Hermitian.
    &w * e + w.adjoint() * e.conj()
}

/// Eigen-decomposition of a cosine operator, reused for every `θ`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    values: Vec<f64>,
    vectors: CMatrix,
    vectors_adj: CMatrix,
}

impl Decomposition {
    pub fn new(space: &FockSpace, gamma: f64, k: f64) -> Self {
        let (values, vectors) = linalg::hermitian_eigen(&cosine_operator(space, gamma, k));
        let vectors_adj = vectors.adjoint();
        Decomposition {
            values,
            vectors,
            vectors_adj,
        }
    }

    /// `exp(−(i/λ) θ C)`.
    pub fn gate(&self, theta: f64, lambda: f64) -> CMatrix {
        linalg::spectral_apply(&self.values, &self.vectors, |e| Complex64::from_polar(1.0, -theta * e / lambda))
    }

    fn apply(&self, theta: f64, lambda: f64, psi: &mut CVector, scratch: &mut CVector) {
        scratch.gemv(Complex64::new(1.0, 0.0), &self.vectors_adj, psi, Complex64::new(0.0, 0.0));
        for (z, &e) in scratch.iter_mut().zip(&self.values) {
            *z *= Complex64::from_polar(1.0, -theta * e / lambda);
        }
        psi.gemv(Complex64::new(1.0, 0.0), &self.vectors, scratch, Complex64::new(0.0, 0.0));
    }
}

/// Elementary gate `exp(−(i/λ) θ cos(k x̂ + γ))` (no frame rotation).
pub fn elementary_gate(space: &FockSpace, theta: f64, gamma: f64, k: f64) -> Result<OperatorMatrix> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param("k", format!("wavenumber must be positive, got {k}")));
    }
    if theta == 0.0 {
        return OperatorMatrix::new(*space, CMatrix::identity(space.dim(), space.dim()), false);
    }
    let m = Decomposition::new(space, gamma, k).gate(theta, space.lambda());
    OperatorMatrix::new(*space, m, false)
}

fn key(x: f64) -> u64 {
    // −0.0 and 0.0 build identical gates.
    if x == 0.0 { 0 } else { x.to_bits() }
}

/// Bounded memo of elementary gates keyed by the exact bits of `(θ, γ, k)`;
/// the oldest entry is evicted first.
#[derive(Debug)]
pub struct GateCache {
    space: FockSpace,
    capacity: usize,
    gates: HashMap<(u64, u64, u64), Arc<CMatrix>>,
    order: VecDeque<(u64, u64, u64)>,
    decompositions: HashMap<(u64, u64), Arc<Decomposition>>,
}

impl GateCache {
    pub fn new(space: FockSpace, capacity: usize) -> Self {
        GateCache {
            space,
            capacity: capacity.max(1),
            gates: HashMap::new(),
            order: VecDeque::new(),
            decompositions: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn decomposition(&mut self, gamma: f64, k: f64) -> Arc<Decomposition> {
        let space = self.space;
        self.decompositions
            .entry((key(gamma), key(k)))
            .or_insert_with(|| Arc::new(Decomposition::new(&space, gamma, k)))
            .clone()
    }

    pub fn gate(&mut self, theta: f64, gamma: f64, k: f64) -> Arc<CMatrix> {
        let id = (key(theta), key(gamma), key(k));
        if let Some(g) = self.gates.get(&id) {
            return g.clone();
        }
        let g = Arc::new(self.decomposition(gamma, k).gate(theta, self.space.lambda()));
        if self.gates.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.gates.remove(&old);
            }
        }
        self.gates.insert(id, g.clone());
        self.order.push_back(id);
        g
    }
}

#[derive(Debug, Clone)]
struct PreparedGate {
    /// `θ` at unit envelope.
    weight: f64,
    decomposition: Arc<Decomposition>,
}

#[derive(Debug, Clone)]
struct PreparedSlice {
    frame: Vec<Complex64>,
    gates: Vec<PreparedGate>,
}

/// A sequence with its cosine operators already diagonalized. Each slice
/// can be replayed with a different envelope factor; gate angles in slice
/// `m` are `β_m · weight`.
#[derive(Debug, Clone)]
pub struct PreparedSequence {
    space: FockSpace,
    slices: Vec<PreparedSlice>,
}

impl PreparedSequence {
    /// Prepares `seq`; the gate angles become the weights, so replaying
    /// with a unit envelope reproduces `seq`.
    pub fn from_sequence(seq: &GateSequence) -> Self {
        let n_k = seq.meta.n_k.max(1);
        Self::build(seq.space, seq.gates.chunks(n_k).map(|s| s.to_vec()).collect())
    }

    /// Prepares a pulse at unit envelope: the weights are
    /// `A (T/N_t)(k_f/N_k)`, to be scaled by `β_m`.
    pub fn from_pulse(pulse: &DrivePulse, space: &FockSpace, period: f64) -> Result<Self> {
        let unit = pulse.clone().with_envelope(vec![1.0; pulse.n_t()])?;
        let seq = compile(&unit, space, period)?;
        Ok(Self::from_sequence(&seq))
    }

    fn build(space: FockSpace, slices: Vec<Vec<Gate>>) -> Self {
        let dim = space.dim();
        let prepared = slices
            .par_iter()
            .map(|gates| {
                let tau = gates.first().map_or(0.0, |g| g.tau);
                PreparedSlice {
                    frame: (0..dim).map(|n| Complex64::from_polar(1.0, n as f64 * tau)).collect(),
                    gates: gates
                        .iter()
                        .map(|g| PreparedGate {
                            weight: g.theta,
                            decomposition: Arc::new(Decomposition::new(&space, g.gamma, g.k)),
                        })
                        .collect(),
                }
            })
            .collect();
        PreparedSequence {
            space,
            slices: prepared,
        }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn n_gates(&self) -> usize {
        self.slices.iter().map(|s| s.gates.len()).sum()
    }

    /// Applies slice `m` with envelope factor `beta` in place.
    pub fn apply_slice(&self, m: usize, beta: f64, psi: &mut CVector, scratch: &mut CVector) {
        let slice = &self.slices[m];
        let lambda = self.space.lambda();
        for (z, o) in psi.iter_mut().zip(&slice.frame) {
            *z *= o.conj();
        }
        for g in &slice.gates {
            let theta = beta * g.weight;
            if theta != 0.0 {
                g.decomposition.apply(theta, lambda, psi, scratch);
            }
        }
        for (z, o) in psi.iter_mut().zip(&slice.frame) {
            *z *= o;
        }
    }

    /// Applies the adjoint of slice `m` in place.
    pub fn apply_slice_adjoint(&self, m: usize, beta: f64, psi: &mut CVector, scratch: &mut CVector) {
        let slice = &self.slices[m];
        let lambda = self.space.lambda();
        for (z, o) in psi.iter_mut().zip(&slice.frame) {
            *z *= o.conj();
        }
        for g in slice.gates.iter().rev() {
            let theta = beta * g.weight;
            if theta != 0.0 {
                g.decomposition.apply(-theta, lambda, psi, scratch);
            }
        }
        for (z, o) in psi.iter_mut().zip(&slice.frame) {
            *z *= o;
        }
    }

    fn check_envelope(&self, envelope: &[f64]) -> Result<()> {
        if envelope.len() != self.slices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slices.len(),
                found: envelope.len(),
            });
        }
        Ok(())
    }

    /// Evolves `psi0` through every slice.
    pub fn evolve(&self, envelope: &[f64], psi0: &QuantumState) -> Result<QuantumState> {
        self.space.check_same(psi0.space())?;
        self.check_envelope(envelope)?;
        let mut psi = psi0.amplitudes().clone();
        let mut scratch = CVector::zeros(psi.len());
        for (m, &beta) in envelope.iter().enumerate() {
            self.apply_slice(m, beta, &mut psi, &mut scratch);
        }
        finish(self.space, psi, self.n_gates())
    }

    /// Full one-period unitary.
    pub fn unitary(&self, envelope: &[f64]) -> Result<CMatrix> {
        self.check_envelope(envelope)?;
        let dim = self.space.dim();
        let columns: Vec<CVector> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut psi = CVector::zeros(dim);
                psi[j] = Complex64::new(1.0, 0.0);
                let mut scratch = CVector::zeros(dim);
                for (m, &beta) in envelope.iter().enumerate() {
                    self.apply_slice(m, beta, &mut psi, &mut scratch);
                }
                psi
            })
            .collect();
        Ok(CMatrix::from_columns(&columns))
    }
}

pub(crate) fn norm_limit(gates: usize) -> f64 {
    NORM_DRIFT_PER_KGATE * (gates as f64 / 1000.0).max(1.0)
}

fn finish(space: FockSpace, psi: CVector, gates: usize) -> Result<QuantumState> {
    let drift = (psi.norm() - 1.0).abs();
    let limit = norm_limit(gates);
    if !(drift <= limit) {
        return Err(Error::NormDrift { drift, gates, limit });
    }
    Ok(QuantumState::from_evolution(space, psi))
}

/// Left-fold of the sequence's gates onto `psi0`.
pub fn apply_sequence(seq: &GateSequence, psi0: &QuantumState) -> Result<QuantumState> {
    seq.space.check_same(psi0.space())?;
    if seq.is_empty() {
        return Ok(psi0.clone());
    }
    let prepared = PreparedSequence::from_sequence(seq);
    prepared.evolve(&vec![1.0; prepared.n_slices()], psi0)
}

/// Product of all gates of the sequence, in application order.
pub fn sequence_unitary(seq: &GateSequence) -> Result<TargetUnitary> {
    let dim = seq.space.dim();
    if seq.is_empty() {
        return TargetUnitary::new(seq.space, CMatrix::identity(dim, dim));
    }
    let prepared = PreparedSequence::from_sequence(seq);
    let u = prepared.unitary(&vec![1.0; prepared.n_slices()])?;
    let drift = linalg::unitarity_defect(&u);
    let limit = norm_limit(seq.len());
    if !(drift <= limit) {
        return Err(Error::NormDrift {
            drift,
            gates: seq.len(),
            limit,
        });
    }
    Ok(TargetUnitary::from_product(seq.space, u))
}
