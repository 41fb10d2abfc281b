// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! Optimal pulse engineering: box-constrained minimization of state or
//! gate infidelity over the per-slice envelope `β`.
//!
//! The envelope only rescales gate angles, so a [`PreparedSequence`] is
//! built once and replayed. The finite-difference gradient caches the
//! states entering every slice and the co-states leaving it; each
//! component then costs two single-slice applications instead of two full
//! evolutions.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::haar;
use crate::io;
use crate::linalg::{CMatrix, CVector};
use crate::ncft::DrivePulse;
use crate::qlg::{self, PreparedSequence};
use crate::synth::{self, LogicalEmbedding};

pub const DEFAULT_BUDGET: usize = 50_000;
pub const DEFAULT_TOL: f64 = 1e-6;
const LBFGS_MEMORY: usize = 10;
const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BRACKET: usize = 20;
const MAX_ZOOM: usize = 12;
const MAX_BACKTRACK: usize = 20;

/// Accepted line-search point `(x, f, ∇f)`.
type Point = (Vec<f64>, f64, Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `L = 1 − |⟨ψ_tar|U(β)|ψ₀⟩|²`.
    StatePrep { initial: QuantumState, target: QuantumState },
    /// `L = 1 − F_gate(G_tar, Q†U(β)Q)`.
    Gate {
        target: CMatrix,
        zero: QuantumState,
        one: QuantumState,
        embedding: LogicalEmbedding,
    },
}

impl Objective {
    pub fn state_prep(initial: QuantumState, target: QuantumState) -> Result<Self> {
        initial.space().check_same(target.space())?;
        Ok(Objective::StatePrep { initial, target })
    }

    pub fn gate(target: CMatrix, zero: QuantumState, one: QuantumState) -> Result<Self> {
        let embedding = LogicalEmbedding::from_codewords(&zero, &one)?;
        // Validates the 2×2 target.
        synth::embed_logical_gate(&embedding, &target)?;
        Ok(Objective::Gate {
            target,
            zero,
            one,
            embedding,
        })
    }

    pub fn space(&self) -> &crate::fock::FockSpace {
        match self {
            Objective::StatePrep { initial, .. } => initial.space(),
            Objective::Gate { embedding, .. } => embedding.space(),
        }
    }

    fn columns(m: &CMatrix) -> Vec<CVector> {
        m.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Columns propagated forward, and the columns they are projected on.
    fn ends(&self) -> (Vec<CVector>, Vec<CVector>) {
        match self {
            Objective::StatePrep { initial, target } => {
                (vec![initial.amplitudes().clone()], vec![target.amplitudes().clone()])
            }
            Objective::Gate { embedding, .. } => (Self::columns(embedding.q()), Self::columns(embedding.q())),
        }
    }

    fn loss_from_overlap(&self, m: &CMatrix) -> f64 {
        let l = match self {
            Objective::StatePrep { .. } => 1.0 - m[(0, 0)].norm_sqr(),
            Objective::Gate { target, .. } => 1.0 - synth::gate_fidelity(target, m),
        };
        l.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub objective: Objective,
    pub pulse: DrivePulse,
    pub period: f64,
    pub beta0: f64,
    /// Absolute half-width of the box `|β − β₀| ≤ δ`.
    pub delta: f64,
    /// Maximum number of loss evaluations; a gradient costs `2 N_t`.
    pub budget: usize,
    /// Target loss.
    pub tol: f64,
    pub seed: u64,
    /// Number of starts; the first is `β ≡ β₀`, the rest are uniform in the box.
    pub restarts: usize,
}

impl OptimizationProblem {
    pub fn new(objective: Objective, pulse: DrivePulse, delta: f64) -> Result<Self> {
        let p = OptimizationProblem {
            objective,
            beta0: pulse.beta0(),
            pulse,
            period: 2.0 * PI,
            delta,
            budget: DEFAULT_BUDGET,
            tol: DEFAULT_TOL,
            seed: 0,
            restarts: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", format!("must be non-negative, got {}", self.delta)));
        }
        if !self.beta0.is_finite() {
            return Err(Error::param("beta0", "must be finite"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::param("T", format!("must be positive, got {}", self.period)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::param("tol", "must be non-negative"));
        }
        if self.restarts == 0 {
            return Err(Error::param("restarts", "need at least one start"));
        }
        self.pulse.validate()
    }

    pub fn n_t(&self) -> usize {
        self.pulse.n_t()
    }

    pub fn lower(&self) -> f64 {
        self.beta0 - self.delta
    }

    pub fn upper(&self) -> f64 {
        self.beta0 + self.delta
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawProblem::from(self)).expect("problem serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawObjective {
    StatePrep {
        initial: QuantumState,
        target: QuantumState,
    },
    Gate {
        #[serde(with = "io::cmatrix")]
        target: CMatrix,
        zero: QuantumState,
        one: QuantumState,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    objective: RawObjective,
    pulse: DrivePulse,
    period: f64,
    beta0: f64,
    delta: f64,
    budget: usize,
    tol: f64,
    seed: u64,
    restarts: usize,
}

impl From<&OptimizationProblem> for RawProblem {
    fn from(p: &OptimizationProblem) -> Self {
        let objective = match &p.objective {
            Objective::StatePrep { initial, target } => RawObjective::StatePrep {
                initial: initial.clone(),
                target: target.clone(),
            },
            Objective::Gate { target, zero, one, .. } => RawObjective::Gate {
                target: target.clone(),
                zero: zero.clone(),
                one: one.clone(),
            },
        };
        RawProblem {
            objective,
            pulse: p.pulse.clone(),
            period: p.period,
            beta0: p.beta0,
            delta: p.delta,
            budget: p.budget,
            tol: p.tol,
            seed: p.seed,
            restarts: p.restarts,
        }
    }
}

impl TryFrom<RawProblem> for OptimizationProblem {
    type Error = Error;

    fn try_from(r: RawProblem) -> Result<Self> {
        let objective = match r.objective {
            RawObjective::StatePrep { initial, target } => Objective::state_prep(initial, target)?,
            RawObjective::Gate { target, zero, one } => Objective::gate(target, zero, one)?,
        };
        let p = OptimizationProblem {
            objective,
            pulse: r.pulse,
            period: r.period,
            beta0: r.beta0,
            delta: r.delta,
            budget: r.budget,
            tol: r.tol,
            seed: r.seed,
            restarts: r.restarts,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub beta_opt: Vec<f64>,
    /// `(evaluation index, best loss so far)`.
    pub loss_trace: Vec<(usize, f64)>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl OptimizationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV `evaluation,loss`.
    pub fn loss_trace_csv(&self) -> String {
        io::csv_string(
            &["evaluation", "loss"],
            self.loss_trace.iter().map(|&(i, l)| [i as f64, l]),
        )
    }
}

/// Loss and finite-difference gradient on a prepared sequence.
pub struct Evaluator {
    objective: Objective,
    prepared: PreparedSequence,
    start: Vec<CVector>,
    project: Vec<CVector>,
    lower: f64,
    upper: f64,
}

impl Evaluator {
    pub fn new(problem: &OptimizationProblem) -> Result<Self> {
        problem.validate()?;
        let space = problem.objective.space();
        let prepared = PreparedSequence::from_pulse(&problem.pulse, space, problem.period)?;
        let (start, project) = problem.objective.ends();
        Ok(Evaluator {
            objective: problem.objective.clone(),
            prepared,
            start,
            project,
            lower: problem.lower(),
            upper: problem.upper(),
        })
    }

    pub fn n_t(&self) -> usize {
        self.prepared.n_slices()
    }

    fn check_len(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.n_t() {
            return Err(Error::DimensionMismatch {
                expected: self.n_t(),
                found: beta.len(),
            });
        }
        Ok(())
    }

    fn check_norms(&self, cols: &[CVector]) -> Result<()> {
        let limit = qlg::norm_limit(self.prepared.n_gates());
        for c in cols {
            let drift = (c.norm() - 1.0).abs();
            if !(drift <= limit) {
                return Err(Error::NormDrift {
                    drift,
                    gates: self.prepared.n_gates(),
                    limit,
                });
            }
        }
        Ok(())
    }

    fn overlap(&self, left: &[CVector], right: &[CVector]) -> CMatrix {
        CMatrix::from_fn(left.len(), right.len(), |i, j| left[i].dotc(&right[j]))
    }

    fn apply_slice(&self, m: usize, beta: f64, cols: &mut [CVector], scratch: &mut CVector) {
        for c in cols.iter_mut() {
            self.prepared.apply_slice(m, beta, c, scratch);
        }
    }

    /// Infidelity at `beta`.
    pub fn loss(&self, beta: &[f64]) -> Result<f64> {
        self.check_len(beta)?;
        let mut cols = self.start.clone();
        let mut scratch = CVector::zeros(cols[0].len());
        for (m, &b) in beta.iter().enumerate() {
            self.apply_slice(m, b, &mut cols, &mut scratch);
        }
        self.check_norms(&cols)?;
        Ok(self.objective.loss_from_overlap(&self.overlap(&self.project, &cols)))
    }

    /// Loss and gradient at `beta`. Components use central differences with
    /// step `1e-6(1+|β|)`, or a second-order one-sided stencil when a
    /// central point would leave the box; no point outside the box is
    /// evaluated.
    pub fn loss_and_gradient(&self, beta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_len(beta)?;
        let n = self.n_t();
        let dim = self.start[0].len();
        let mut scratch = CVector::zeros(dim);
        let mut forward = Vec::with_capacity(n + 1);
        forward.push(self.start.clone());
        for (m, &b) in beta.iter().enumerate() {
            let mut next = forward[m].clone();
            self.apply_slice(m, b, &mut next, &mut scratch);
            forward.push(next);
        }
        self.check_norms(&forward[n])?;
        let f0 = self.objective.loss_from_overlap(&self.overlap(&self.project, &forward[n]));
        // backward[m] = U_{>m}† · project
        let mut backward = vec![Vec::new(); n];
        let mut co = self.project.clone();
        for m in (0..n).rev() {
            backward[m] = co.clone();
            for c in co.iter_mut() {
                self.prepared.apply_slice_adjoint(m, beta[m], c, &mut scratch);
            }
        }
        let grad = (0..n)
            .into_par_iter()
            .map(|m| {
                let mut scratch = CVector::zeros(dim);
                let at = |b: f64| {
                    let mut cols = forward[m].clone();
                    self.apply_slice(m, b, &mut cols, &mut scratch);
                    self.objective.loss_from_overlap(&self.overlap(&backward[m], &cols))
                };
                let mut at = at;
                let b = beta[m];
                let h = 1e-6 * (1.0 + b.abs());
                if b + h <= self.upper && b - h >= self.lower {
                    (at(b + h) - at(b - h)) / (2.0 * h)
                } else if b - 2.0 * h >= self.lower {
                    (3.0 * f0 - 4.0 * at(b - h) + at(b - 2.0 * h)) / (2.0 * h)
                } else if b + 2.0 * h <= self.upper {
                    (-3.0 * f0 + 4.0 * at(b + h) - at(b + 2.0 * h)) / (2.0 * h)
                } else {
                    0.0
                }
            })
            .collect();
        Ok((f0, grad))
    }
}

/// Infidelity at `beta`, recompiling the gate sequence from the pulse.
pub fn loss(problem: &OptimizationProblem, beta: &[f64]) -> Result<f64> {
    let pulse = problem.pulse.clone().with_envelope(beta.to_vec())?;
    let space = problem.objective.space();
    let seq = qlg::compile(&pulse, space, problem.period)?;
    let (start, project) = problem.objective.ends();
    let mut out = Vec::with_capacity(start.len());
    for c in start {
        let psi = qlg::apply_sequence(&seq, &QuantumState::new(*space, c)?)?;
        out.push(psi.into_amplitudes());
    }
    let m = CMatrix::from_fn(project.len(), out.len(), |i, j| project[i].dotc(&out[j]));
    Ok(problem.objective.loss_from_overlap(&m))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Search<'a> {
    eval: &'a Evaluator,
    lower: f64,
    upper: f64,
    grad_cost: usize,
    budget: usize,
    used: usize,
    best: (f64, Vec<f64>),
    trace: Vec<(usize, f64)>,
}

impl Search<'_> {
    fn project(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(self.lower, self.upper);
        }
    }

    fn can_afford(&self) -> bool {
        self.used + self.grad_cost <= self.budget
    }

    fn record(&mut self, f: f64, x: &[f64]) {
        if f < self.best.0 {
            self.best = (f, x.to_vec());
            self.trace.push((self.used, f));
        }
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.used += self.grad_cost;
        let (f, g) = self.eval.loss_and_gradient(x)?;
        self.record(f, x);
        Ok((f, g))
    }

    fn at_bound(&self, x: f64, g: f64) -> bool {
        let eps = 1e-12 * (1.0 + x.abs());
        (x <= self.lower + eps && g > 0.0) || (x >= self.upper - eps && g < 0.0)
    }

    fn projected_gradient_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        x.iter()
            .zip(g)
            .map(|(&xi, &gi)| ((xi - gi).clamp(self.lower, self.upper) - xi).abs())
            .fold(0.0, f64::max)
    }

    /// Largest step along `d` that stays in the box.
    fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        x.iter()
            .zip(d)
            .filter(|(_, &di)| di != 0.0)
            .map(|(&xi, &di)| if di > 0.0 { (self.upper - xi) / di } else { (self.lower - xi) / di })
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    fn step(x: &[f64], d: &[f64], a: f64) -> Vec<f64> {
        x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
    }

    /// Strong-Wolfe search on `[0, a_max]`. Returns the accepted point.
    #[allow(clippy::type_complexity)]
    fn wolfe(
        &mut self,
        x: &[f64],
        f0: f64,
        g0: &[f64],
        d: &[f64],
        a_init: f64,
        a_max: f64,
    ) -> Result<Option<Point>> {
        let dphi0 = dot(g0, d);
        let (mut a_prev, mut f_prev, mut dphi_prev) = (0.0, f0, dphi0);
        let mut a = a_init.min(a_max);
        for i in 0..MAX_BRACKET {
            if !self.can_afford() || a <= 0.0 {
                return Ok(None);
            }
            let xa = Self::step(x, d, a);
            let (fa, ga) = self.evaluate(&xa)?;
            let dphi = dot(&ga, d);
            if fa > f0 + WOLFE_C1 * a * dphi0 || (i > 0 && fa >= f_prev) {
                return self.zoom(x, f0, dphi0, d, (a_prev, f_prev, dphi_prev), (a, fa));
            }
            if dphi.abs() <= -WOLFE_C2 * dphi0 {
                return Ok(Some((xa, fa, ga)));
            }
            if dphi >= 0.0 {
                return self.zoom(x, f0, dphi0, d, (a, fa, dphi), (a_prev, f_prev));
            }
            if a >= a_max {
                // Sufficient decrease at the box boundary.
                return Ok(Some((xa, fa, ga)));
            }
            (a_prev, f_prev, dphi_prev) = (a, fa, dphi);
            a = (2.0 * a).min(a_max);
        }
        Ok(None)
    }

    #[allow(clippy::type_complexity)]
    fn zoom(
        &mut self,
        x: &[f64],
        f0: f64,
        dphi0: f64,
        d: &[f64],
        lo: (f64, f64, f64),
        hi: (f64, f64),
    ) -> Result<Option<Point>> {
        let (mut a_lo, mut f_lo, mut dphi_lo) = lo;
        let (mut a_hi, mut f_hi) = hi;
        let mut fallback = None;
        for _ in 0..MAX_ZOOM {
            if !self.can_afford() {
                break;
            }
            // Quadratic through (a_lo, f_lo, dphi_lo) and (a_hi, f_hi),
            // safeguarded to the inner 80% of the bracket.
            let da = a_hi - a_lo;
            let denom = 2.0 * (f_hi - f_lo - dphi_lo * da);
            let mut a = if denom.abs() > 0.0 { a_lo - dphi_lo * da * da / denom } else { a_lo + 0.5 * da };
            let (left, right) = if da > 0.0 { (a_lo, a_hi) } else { (a_hi, a_lo) };
            let margin = 0.1 * da.abs();
            if !(a > left + margin && a < right - margin) {
                a = a_lo + 0.5 * da;
            }
            let xa = Self::step(x, d, a);
            let (fa, ga) = self.evaluate(&xa)?;
            let dphi = dot(&ga, d);
            if fa > f0 + WOLFE_C1 * a * dphi0 || fa >= f_lo {
                a_hi = a;
                f_hi = fa;
            } else {
                if dphi.abs() <= -WOLFE_C2 * dphi0 {
                    return Ok(Some((xa, fa, ga)));
                }
                fallback = Some((xa, fa, ga));
                if dphi * (a_hi - a_lo) >= 0.0 {
                    a_hi = a_lo;
                    f_hi = f_lo;
                }
                (a_lo, f_lo, dphi_lo) = (a, fa, dphi);
            }
        }
        Ok(fallback)
    }

    /// Armijo backtracking along the projected steepest-descent path.
    fn backtrack(&mut self, x: &[f64], f0: f64, g0: &[f64], a0: f64) -> Result<Option<Point>> {
        let mut a = a0;
        for _ in 0..MAX_BACKTRACK {
            if !self.can_afford() {
                return Ok(None);
            }
            let mut xa = Self::step(x, g0, -a);
            self.project(&mut xa);
            let s: Vec<f64> = xa.iter().zip(x).map(|(p, q)| p - q).collect();
            if s.iter().all(|v| *v == 0.0) {
                return Ok(None);
            }
            let (fa, ga) = self.evaluate(&xa)?;
            if fa <= f0 + WOLFE_C1 * dot(g0, &s) {
                return Ok(Some((xa, fa, ga)));
            }
            a *= 0.5;
        }
        Ok(None)
    }

    /// Projected L-BFGS from `x0`.
    fn run(&mut self, x0: Vec<f64>, tol: f64, width: f64) -> Result<()> {
        let mut x = x0;
        self.project(&mut x);
        if !self.can_afford() {
            return Ok(());
        }
        let (mut f, mut g) = self.evaluate(&x)?;
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        while f > tol && self.can_afford() {
            if self.projected_gradient_norm(&x, &g) < 1e-14 {
                break;
            }
            let free: Vec<bool> = x.iter().zip(&g).map(|(&xi, &gi)| !self.at_bound(xi, gi)).collect();
            // Two-loop recursion on the free variables.
            let mut q: Vec<f64> = g.iter().zip(&free).map(|(&gi, &fr)| if fr { gi } else { 0.0 }).collect();
            let mut alphas = Vec::with_capacity(memory.len());
            for (s, y, rho) in memory.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(y) {
                    *qi -= a * yi;
                }
                alphas.push(a);
            }
            if let Some((s, y, _)) = memory.back() {
                let gamma = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += (a - b) * si;
                }
            }
            let mut d: Vec<f64> = q.iter().zip(&free).map(|(&qi, &fr)| if fr { -qi } else { 0.0 }).collect();
            if dot(&d, &g) >= 0.0 || memory.is_empty() {
                memory.clear();
                d = g.iter().zip(&free).map(|(&gi, &fr)| if fr { -gi } else { 0.0 }).collect();
            }
            let d_inf = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if d_inf == 0.0 {
                break;
            }
            let a_max = self.max_step(&x, &d);
            let a_init = if memory.is_empty() { 0.25 * width / d_inf } else { 1.0 };
            let mut accepted = if a_max > 0.0 {
                self.wolfe(&x, f, &g, &d, a_init, a_max)?
            } else {
                None
            };
            if accepted.is_none() {
                let g_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                accepted = self.backtrack(&x, f, &g, 0.25 * width / g_inf.max(f64::MIN_POSITIVE))?;
                memory.clear();
            }
            let Some((xn, fn_, gn)) = accepted else { break };
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if memory.len() == LBFGS_MEMORY {
                    memory.pop_front();
                }
                memory.push_back((s, y, 1.0 / sy));
            }
            x = xn;
            f = fn_;
            g = gn;
        }
        Ok(())
    }
}

/// Minimizes the loss over the box `[β₀−δ, β₀+δ]^{N_t}`. The returned `β`
/// is the best point evaluated, so the loss never exceeds the loss at `β₀`.
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    let eval = Evaluator::new(problem)?;
    let n = eval.n_t();
    let start = vec![problem.beta0; n];
    let initial_loss = eval.loss(&start)?;
    let mut search = Search {
        eval: &eval,
        lower: problem.lower(),
        upper: problem.upper(),
        grad_cost: 2 * n,
        budget: problem.budget,
        used: 1,
        best: (initial_loss, start.clone()),
        trace: vec![(1, initial_loss)],
    };
    if problem.delta > 0.0 {
        let share = problem.budget / problem.restarts;
        for r in 0..problem.restarts {
            if search.best.0 <= problem.tol {
                break;
            }
            let x0 = if r == 0 {
                start.clone()
            } else {
                let mut rng = haar::sample_rng(problem.seed, r as u64);
                (0..n).map(|_| rng.random_range(problem.lower()..=problem.upper())).collect()
            };
            search.budget = (search.used + share).min(problem.budget);
            search.run(x0, problem.tol, 2.0 * problem.delta)?;
        }
    }
    let (final_loss, beta_opt) = search.best;
    Ok(OptimizationResult {
        beta_opt,
        loss_trace: search.trace,
        initial_loss,
        final_loss,
        converged: final_loss <= problem.tol,
        evaluations: search.used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;
    use crate::fock::FockSpace;
    use crate::pipeline::{self, DriveConfig};
    use crate::synth::NamedGate;

    fn small_config() -> DriveConfig {
        DriveConfig {
            n_t: 16,
            n_k: 12,
            k_f: 8.0,
            ..DriveConfig::default()
        }
    }

    fn state_problem(delta: f64) -> OptimizationProblem {
        let s = FockSpace::new(8, 1.0).unwrap();
        let vac = QuantumState::vacuum(s);
        let tar = haar::sample_haar_state(s, 3, 5, 0).unwrap();
        let syn = pipeline::synthesize_state(&vac, &tar, small_config(), None).unwrap();
        OptimizationProblem::new(Objective::state_prep(vac, tar).unwrap(), syn.pulse, delta).unwrap()
    }

    fn gate_problem(delta: f64) -> OptimizationProblem {
        let s = FockSpace::new(10, 1.0).unwrap();
        let code = codes::binomial_code(s).unwrap();
        let g = NamedGate::H.matrix();
        let syn = pipeline::synthesize_gate(code.embedding(), &g, small_config(), None).unwrap();
        let obj = Objective::gate(g, code.zero().clone(), code.one().clone()).unwrap();
        OptimizationProblem::new(obj, syn.pulse, delta).unwrap()
    }

    #[test]
    fn fast_and_recompiled_losses_agree() {
        for p in [state_problem(0.5), gate_problem(0.5)] {
            let eval = Evaluator::new(&p).unwrap();
            let mut rng = haar::sample_rng(3, 0);
            let beta: Vec<f64> = (0..p.n_t()).map(|_| rng.random_range(0.6..1.4)).collect();
            let a = eval.loss(&beta).unwrap();
            let b = loss(&p, &beta).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            assert_eq!(a, eval.loss(&beta).unwrap());
        }
    }

    #[test]
    fn gradient_matches_fourth_order_stencil() {
        for p in [state_problem(0.5), gate_problem(0.5)] {
            let eval = Evaluator::new(&p).unwrap();
            let mut rng = haar::sample_rng(4, 0);
            let beta: Vec<f64> = (0..p.n_t()).map(|_| rng.random_range(0.7..1.3)).collect();
            let (f, g) = eval.loss_and_gradient(&beta).unwrap();
            assert_eq!(f, eval.loss(&beta).unwrap());
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            for m in [0, 5, p.n_t() - 1] {
                let h = 1e-3;
                let at = |dx: f64| {
                    let mut b = beta.clone();
                    b[m] += dx;
                    eval.loss(&b).unwrap()
                };
                let stencil = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
                assert!((g[m] - stencil).abs() <= 1e-4 * gnorm, "m={m}: {} vs {stencil}", g[m]);
            }
        }
    }

    #[test]
    fn one_sided_gradient_at_bounds() {
        let p = state_problem(0.25);
        let eval = Evaluator::new(&p).unwrap();
        let mut beta = vec![1.0; p.n_t()];
        beta[2] = p.upper();
        beta[3] = p.lower();
        let (_, g) = eval.loss_and_gradient(&beta).unwrap();
        let h = 1e-4;
        for (m, sgn) in [(2, -1.0), (3, 1.0)] {
            let mut b = beta.clone();
            b[m] += sgn * h;
            let mut b2 = beta.clone();
            b2[m] += sgn * 2.0 * h;
            let f0 = eval.loss(&beta).unwrap();
            let est = sgn * (-3.0 * f0 + 4.0 * eval.loss(&b).unwrap() - eval.loss(&b2).unwrap()) / (2.0 * h);
            assert!((g[m] - est).abs() < 1e-6 * (1.0 + est.abs()), "{} vs {est}", g[m]);
        }
    }

    #[test]
    fn zero_delta_returns_baseline() {
        let p = state_problem(0.0);
        let r = optimize(&p).unwrap();
        assert_eq!(r.beta_opt, vec![p.beta0; p.n_t()]);
        assert_eq!(r.final_loss, r.initial_loss);
        assert_eq!(r.final_loss, Evaluator::new(&p).unwrap().loss(&r.beta_opt).unwrap());
    }

    #[test]
    fn optimization_improves_and_stays_feasible() {
        let mut p = state_problem(0.5);
        p.budget = 4000;
        p.tol = 1e-10;
        let r = optimize(&p).unwrap();
        assert!(r.final_loss < 0.5 * r.initial_loss, "{} vs {}", r.final_loss, r.initial_loss);
        assert!(r.beta_opt.iter().all(|b| (b - p.beta0).abs() <= p.delta));
        assert!(r.loss_trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0));
        assert!(r.evaluations <= p.budget);
        assert!(!r.converged);
        let recomputed = loss(&p, &r.beta_opt).unwrap();
        assert!((recomputed - r.final_loss).abs() < 1e-12);
    }

    #[test]
    fn gate_optimization_improves() {
        let mut p = gate_problem(0.5);
        p.budget = 3000;
        let r = optimize(&p).unwrap();
        assert!(r.final_loss < r.initial_loss);
    }

    #[test]
    fn seeded_restarts_reproducible() {
        let mut p = state_problem(0.5);
        p.budget = 1500;
        p.restarts = 3;
        p.seed = 9;
        let a = optimize(&p).unwrap();
        let b = optimize(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ideal_objectives_have_zero_loss() {
        let s = FockSpace::new(6, 1.0).unwrap();
        let p0 = state_problem(0.5);
        let zero_pulse = p0
            .pulse
            .clone()
            .with_envelope(vec![0.0; p0.n_t()])
            .unwrap();
        let vac = QuantumState::vacuum(s);
        let mut p = OptimizationProblem::new(Objective::state_prep(vac.clone(), vac).unwrap(), zero_pulse, 0.1).unwrap();
        p.beta0 = 0.0;
        assert_eq!(Evaluator::new(&p).unwrap().loss(&vec![0.0; p.n_t()]).unwrap(), 0.0);
        let g = NamedGate::I.matrix();
        let obj = Objective::gate(g.clone(), QuantumState::fock(s, 0).unwrap(), QuantumState::fock(s, 1).unwrap())
            .unwrap();
        let m = obj.ends().1.len();
        assert_eq!(m, 2);
        assert!(obj.loss_from_overlap(&g).abs() < 1e-15);
    }

    #[test]
    fn json_round_trips() {
        for p in [state_problem(0.3), gate_problem(0.3)] {
            let back = OptimizationProblem::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p);
        }
        let r = OptimizationResult {
            beta_opt: vec![1.0, 0.9],
            loss_trace: vec![(1, 0.5), (33, 0.25)],
            initial_loss: 0.5,
            final_loss: 0.25,
            converged: false,
            evaluations: 33,
        };
        assert_eq!(OptimizationResult::from_json(&r.to_json()).unwrap(), r);
        assert!(r.loss_trace_csv().starts_with("evaluation,loss\n1,0.5\n"));
    }

    #[test]
    fn invalid_problems_rejected() {
        let p = state_problem(0.3);
        let mut bad = p.clone();
        bad.delta = -1.0;
        assert!(bad.validate().is_err());
        let mut bad = p.clone();
        bad.restarts = 0;
        assert!(bad.validate().is_err());
        let eval = Evaluator::new(&p).unwrap();
        assert!(matches!(eval.loss(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
