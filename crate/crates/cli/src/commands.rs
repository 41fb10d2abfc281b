// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each maps a merged [`RunConfig`] to the
//! artifacts of the run; nothing is written here.

use qlg_core::codes::{self, CodeKind, CodeSpec};
use qlg_core::fock::{self, OperatorMatrix, QuantumState};
use qlg_core::haar::{self, BenchmarkConfig};
use qlg_core::linalg::CMatrix;
use qlg_core::noise;
use qlg_core::ope::{self, Objective, OptimizationProblem, OptimizationResult};
use qlg_core::pipeline::{self, DriveConfig, Synthesis};
use qlg_core::qlg;
use qlg_core::sweep;
use qlg_core::synth::{self, NamedGate};
use qlg_core::wigner::{self, WignerGrid};
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Artifacts;
use crate::target::{self, Target};

pub const MAX_SAMPLES: usize = 1_000_000;
pub const MAX_RANDOM_GATES: usize = 10_000;
pub const DEFAULT_ZETA_SEEDS: usize = 20;

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn wigner_grid(cfg: &RunConfig, state: &QuantumState) -> Result<WignerGrid, CliError> {
    let points = cfg.count("wigner_points", cfg.wigner_points, wigner::DEFAULT_POINTS, 2001)?;
    Ok(WignerGrid::square(state.space().lambda(), wigner::DEFAULT_HALF_WIDTH, points)?)
}

fn add_wigner(arts: &mut Artifacts, stem: &str, state: &QuantumState, grid: &WignerGrid) {
    let w = wigner::wigner_pure(state, grid);
    arts.add(format!("{stem}.csv"), w.to_csv());
    arts.add(format!("{stem}.json"), w.sidecar_json() + "\n");
}

fn drive_json(d: &DriveConfig) -> serde_json::Value {
    json!({"n_t": d.n_t, "n_k": d.n_k, "k_f": d.k_f, "beta0": d.beta0, "period": d.period})
}

/// `prepare`: unoptimized preparation from vacuum.
pub fn prepare(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let Target { label, state } = target::resolve(cfg)?;
    let drive = cfg.drive()?;
    let grid = wigner_grid(cfg, &state)?;
    let vac = QuantumState::vacuum(*state.space());
    let prep = pipeline::prepare_state(&vac, &state, drive, None)?;
    let seq = prep.synthesis.sequence()?;
    let mut arts = Artifacts::new();
    arts.add(
        "summary.json",
        pretty(&json!({
            "command": "prepare",
            "target": label,
            "dim": state.space().dim(),
            "lambda": state.space().lambda(),
            "drive": drive_json(&drive),
            "fidelity": prep.fidelity,
            "infidelity": 1.0 - prep.fidelity,
            "target_mean_photons": state.mean_photon_number(),
            "output_mean_photons": prep.output.mean_photon_number(),
            "near_branch_cut": prep.synthesis.generator.near_branch_cut,
            "gates": seq.len(),
        })),
    );
    add_wigner(&mut arts, "wigner", &prep.output, &grid);
    arts.add("pulse.csv", prep.synthesis.pulse.to_csv());
    arts.add("sequence.json", seq.to_json() + "\n");
    Ok(arts)
}

fn problem(cfg: &RunConfig, objective: Objective, syn: &Synthesis, delta: f64) -> Result<OptimizationProblem, CliError> {
    let mut p = OptimizationProblem::new(objective, syn.pulse.clone(), delta)?;
    p.period = syn.config.period;
    p.budget = cfg.count("budget", cfg.budget, ope::DEFAULT_BUDGET, usize::MAX)?;
    p.tol = cfg.tol.unwrap_or(ope::DEFAULT_TOL);
    p.restarts = cfg.count("restarts", cfg.restarts, 1, 1000)?;
    p.seed = cfg.seed();
    p.validate()?;
    Ok(p)
}

fn gate_matrix(name: &str, seed: u64) -> Result<(String, CMatrix), CliError> {
    if name.eq_ignore_ascii_case("random") {
        let mut rng = haar::sample_rng(seed, 0);
        return Ok((format!("random:{seed}"), synth::random_su2(&mut rng)));
    }
    let g = NamedGate::parse(name)
        .ok_or_else(|| CliError::field("gate", format!("unknown gate '{name}'; use H, S, T, X, Y, Z, I or random")))?;
    Ok((format!("{g:?}"), g.matrix()))
}

fn single_code(cfg: &RunConfig) -> Result<CodeSpec, CliError> {
    let name = cfg.code.as_deref().ok_or_else(|| CliError::field("code", "a code is required"))?;
    target::build_code(cfg, target::code_kind(name)?)
}

fn optimized_artifacts(
    arts: &mut Artifacts,
    summary: serde_json::Value,
    syn: &Synthesis,
    result: &OptimizationResult,
) -> Result<(), CliError> {
    arts.add("summary.json", pretty(&summary));
    arts.add("result.json", result.to_json() + "\n");
    arts.add("loss_trace.csv", result.loss_trace_csv());
    let pulse = syn.pulse.clone().with_envelope(result.beta_opt.clone())?;
    arts.add("pulse.csv", pulse.to_csv());
    Ok(())
}

/// `optimize`: OPE for a state preparation, a logical gate, or a batch of
/// random SU(2) gates.
pub fn optimize(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let drive = cfg.drive()?;
    let delta = cfg.delta_abs(1.0, drive.beta0)?;
    if let Some(n) = cfg.random_gates {
        return random_gates(cfg, drive, delta, n);
    }
    let mut arts = Artifacts::new();
    if cfg.state_prep.unwrap_or(false) {
        if cfg.gate.is_some() {
            return Err(CliError::field("gate", "--gate and --state-prep are exclusive"));
        }
        let Target { label, state } = target::resolve(cfg)?;
        let vac = QuantumState::vacuum(*state.space());
        let syn = pipeline::synthesize_state(&vac, &state, drive, None)?;
        let p = problem(cfg, Objective::state_prep(vac, state.clone())?, &syn, delta)?;
        let r = ope::optimize(&p)?;
        let summary = json!({
            "command": "optimize",
            "objective": "state_prep",
            "target": label,
            "dim": state.space().dim(),
            "drive": drive_json(&drive),
            "delta": delta,
            "initial_infidelity": r.initial_loss,
            "final_infidelity": r.final_loss,
            "converged": r.converged,
            "evaluations": r.evaluations,
        });
        optimized_artifacts(&mut arts, summary, &syn, &r)?;
        return Ok(arts);
    }
    let code = single_code(cfg)?;
    let gate_name = cfg.gate.as_deref().ok_or_else(|| CliError::field("gate", "give --gate or --state-prep"))?;
    let (label, g) = gate_matrix(gate_name, cfg.seed())?;
    let syn = pipeline::synthesize_gate(code.embedding(), &g, drive, None)?;
    let obj = Objective::gate(g, code.zero().clone(), code.one().clone())?;
    let p = problem(cfg, obj, &syn, delta)?;
    let r = ope::optimize(&p)?;
    let summary = json!({
        "command": "optimize",
        "objective": "gate",
        "code": code.kind().name(),
        "gate": label,
        "dim": code.space().dim(),
        "drive": drive_json(&drive),
        "delta": delta,
        "initial_gate_error": r.initial_loss,
        "final_gate_error": r.final_loss,
        "converged": r.converged,
        "evaluations": r.evaluations,
    });
    optimized_artifacts(&mut arts, summary, &syn, &r)?;
    Ok(arts)
}

fn random_gates(cfg: &RunConfig, drive: DriveConfig, delta: f64, n: usize) -> Result<Artifacts, CliError> {
    if !(1..=MAX_RANDOM_GATES).contains(&n) {
        return Err(CliError::field("random_gates", format!("must be in 1..={MAX_RANDOM_GATES}, got {n}")));
    }
    let kinds: Vec<CodeKind> = match cfg.code.as_deref() {
        None | Some("all") => vec![CodeKind::Binomial, CodeKind::Cat, CodeKind::Gkp],
        Some(name) => vec![target::code_kind(name)?],
    };
    let seed = cfg.seed();
    let mut rows = String::from("code,index,initial_gate_error,final_gate_error,evaluations,converged\n");
    for kind in kinds {
        let code = target::build_code(cfg, kind)?;
        let table = drive.kernel_table(*code.space())?;
        let results = (0..n as u64)
            .into_par_iter()
            .map(|i| -> Result<OptimizationResult, CliError> {
                let g = synth::random_su2(&mut haar::sample_rng(seed, i));
                let syn = pipeline::synthesize_gate(code.embedding(), &g, drive, Some(&table))?;
                let obj = Objective::gate(g, code.zero().clone(), code.one().clone())?;
                Ok(ope::optimize(&problem(cfg, obj, &syn, delta)?)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, r) in results.iter().enumerate() {
            rows.push_str(&format!(
                "{},{i},{},{},{},{}\n",
                kind.name(),
                qlg_core::io::fmt_f64(r.initial_loss),
                qlg_core::io::fmt_f64(r.final_loss),
                r.evaluations,
                u8::from(r.converged)
            ));
        }
    }
    let mut arts = Artifacts::new();
    arts.add("random_gates.csv", rows);
    Ok(arts)
}

/// `haar`: Haar-state preparation statistics.
pub fn haar(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let d = cfg.d.unwrap_or(4);
    if !(2..=crate::config::MAX_DIM).contains(&d) {
        return Err(CliError::field("d", format!("must be ≥ 2, got {d}")));
    }
    let bc = BenchmarkConfig {
        d,
        drive: cfg.drive()?,
        samples: cfg.count("samples", cfg.samples, 200, MAX_SAMPLES)?,
        seed: cfg.seed(),
    };
    let report = haar::benchmark(&bc)?;
    let mut arts = Artifacts::new();
    arts.add("report.json", report.to_json() + "\n");
    arts.add("histogram.csv", report.histogram_csv());
    let rows = report
        .prep_fidelities
        .iter()
        .zip(&report.ref_fidelities)
        .enumerate()
        .map(|(i, (a, b))| [i as f64, *a, *b]);
    arts.add(
        "fidelities.csv",
        qlg_core::io::csv_string(&["sample", "prep_fidelity", "ref_fidelity"], rows),
    );
    Ok(arts)
}

/// `noise`: photon-loss and amplitude-noise sweeps of a code preparation.
pub fn noise(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    if cfg.kappa_sweep.is_none() && cfg.zeta_sweep.is_none() {
        return Err(CliError::field("sweep", "give --kappa-sweep and/or --zeta-sweep"));
    }
    let kappas = cfg.kappa_sweep.as_deref().map(sweep::parse_sweep).transpose().map_err(sweep_error("kappa_sweep"))?;
    let zetas = cfg.zeta_sweep.as_deref().map(sweep::parse_sweep).transpose().map_err(sweep_error("zeta_sweep"))?;
    let mut defaulted = cfg.clone();
    if defaulted.code.is_none() && defaulted.target_file.is_none() && defaulted.haar_seed.is_none() {
        defaulted.code = Some("binomial".into());
    }
    let Target { label, state } = target::resolve(&defaulted)?;
    let drive = cfg.drive()?;
    let delta = cfg.delta_abs(0.0, drive.beta0)?;
    let substeps = cfg.count("dt_substeps", cfg.dt_substeps, 4, 10_000)?;
    let seeds = cfg.count("seeds", cfg.seeds, DEFAULT_ZETA_SEEDS, MAX_SAMPLES)?;
    let vac = QuantumState::vacuum(*state.space());
    let syn = pipeline::synthesize_state(&vac, &state, drive, None)?;
    let mut envelope = syn.pulse.envelope().to_vec();
    let mut opt = serde_json::Value::Null;
    if delta > 0.0 {
        let p = problem(cfg, Objective::state_prep(vac.clone(), state.clone())?, &syn, delta)?;
        let r = ope::optimize(&p)?;
        opt = json!({"delta": delta, "initial_infidelity": r.initial_loss, "final_infidelity": r.final_loss, "evaluations": r.evaluations});
        envelope = r.beta_opt;
    }
    let pulse = syn.pulse.clone().with_envelope(envelope.clone())?;
    let seq = qlg::compile(&pulse, state.space(), drive.period)?;
    let out = qlg::apply_sequence(&seq, &vac)?;
    let noiseless = 1.0 - fock::fidelity_state(&state, &out)?;
    let mut arts = Artifacts::new();
    arts.add(
        "summary.json",
        pretty(&json!({
            "command": "noise",
            "target": label,
            "dim": state.space().dim(),
            "drive": drive_json(&drive),
            "optimization": opt,
            "noiseless_infidelity": noiseless,
            "dt_substeps": substeps,
            "zeta_seeds": seeds,
        })),
    );
    if let Some(k) = kappas {
        if k.iter().any(|x| *x < 0.0) {
            return Err(CliError::field("kappa_sweep", "loss rates must be non-negative"));
        }
        let pts = noise::kappa_sweep(&seq, &vac, &state, &k, substeps)?;
        arts.add("kappa_sweep.csv", noise::sweep_csv("kappa", &pts));
    }
    if let Some(z) = zetas {
        if z.iter().any(|x| *x < 0.0) {
            return Err(CliError::field("zeta_sweep", "noise strengths must be non-negative"));
        }
        let prepared = syn.prepared()?;
        let dtau = drive.period / drive.n_t as f64;
        let pts = noise::zeta_sweep(&prepared, &envelope, dtau, &vac, &state, &z, seeds, cfg.seed())?;
        arts.add("zeta_sweep.csv", noise::sweep_csv("zeta", &pts));
    }
    Ok(arts)
}

fn sweep_error(field: &'static str) -> impl Fn(qlg_core::Error) -> CliError {
    move |e| CliError::field(field, e.to_string())
}

/// `codes export`: codeword amplitudes and Wigner functions.
pub fn codes_export(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let kinds: Vec<CodeKind> = match cfg.code.as_deref() {
        None | Some("all") => vec![CodeKind::Binomial, CodeKind::Cat, CodeKind::Gkp],
        Some(name) => vec![target::code_kind(name)?],
    };
    let mut arts = Artifacts::new();
    let mut summary = Vec::new();
    for kind in kinds {
        let code = target::build_code(cfg, kind)?;
        let name = kind.name();
        let space = *code.space();
        let (a, _) = fock::ladder_ops(&space);
        let id = OperatorMatrix::new(space, CMatrix::identity(space.dim(), space.dim()), true)?;
        let kl = codes::kl_check(&code, &[id, a])?;
        summary.push(json!({
            "code": name,
            "dim": space.dim(),
            "lambda": space.lambda(),
            "params": code.params(),
            "mean_photons_zero": code.zero().mean_photon_number(),
            "mean_photons_one": code.one().mean_photon_number(),
            "kl_loss_diagonal": kl.diagonal,
            "kl_loss_off_diagonal": kl.off_diagonal,
        }));
        arts.add(format!("{name}_amplitudes.csv"), code.amplitudes_csv());
        let grid = wigner_grid(cfg, code.zero())?;
        add_wigner(&mut arts, &format!("{name}_wigner_zero"), code.zero(), &grid);
        add_wigner(&mut arts, &format!("{name}_wigner_one"), code.one(), &grid);
    }
    arts.add("codes.json", pretty(&json!(summary)));
    Ok(arts)
}
