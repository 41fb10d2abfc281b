// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlg_cli::commands;
use qlg_cli::config::{DeltaMode, RunConfig};
use qlg_cli::error::CliError;
use qlg_cli::output::{self, Artifacts};

#[derive(Parser)]
#[command(name = "qlg", version, about = "Single-period Floquet synthesis with quantum lattice gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare a target state from vacuum without optimization.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Optimize the drive envelope for a state preparation or a logical gate.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Logical gate: H, S, T, X, Y, Z, I or random.
        #[arg(long)]
        gate: Option<String>,
        /// Optimize the preparation of the target state instead of a gate.
        #[arg(long)]
        state_prep: bool,
        /// Optimize this many random SU(2) gates per code and export a CSV.
        #[arg(long)]
        random_gates: Option<usize>,
    },
    /// Haar-random state preparation benchmark.
    Haar {
        #[command(flatten)]
        common: Common,
        /// Support dimension of the sampled states.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Photon-loss and amplitude-noise sweeps.
    Noise {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Loss rates, e.g. 1e-6:1e-1:log9.
        #[arg(long)]
        kappa_sweep: Option<String>,
        /// Amplitude-noise strengths, e.g. 0:0.2:11.
        #[arg(long)]
        zeta_sweep: Option<String>,
        /// Noise realizations per amplitude-noise point.
        #[arg(long)]
        seeds: Option<usize>,
        /// RK4 steps per slice.
        #[arg(long)]
        dt_substeps: Option<usize>,
    },
    /// Code utilities.
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
}

#[derive(Subcommand)]
enum CodesAction {
    /// Write codeword amplitudes and Wigner functions.
    Export {
        #[command(flatten)]
        common: Common,
        /// binomial, cat, gkp or all.
        #[arg(long)]
        code: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; must not exist or be empty.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "Nt")]
    n_t: Option<usize>,
    #[arg(long = "Nk")]
    n_k: Option<usize>,
    #[arg(long = "kf")]
    k_f: Option<f64>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wigner grid points per axis.
    #[arg(long)]
    wigner_points: Option<usize>,
}

#[derive(Args)]
struct TargetArgs {
    /// binomial, cat or gkp.
    #[arg(long)]
    code: Option<String>,
    /// Codeword: 0, 1, plus or minus.
    #[arg(long)]
    logical: Option<String>,
    /// JSON file of Fock amplitudes.
    #[arg(long)]
    target_file: Option<PathBuf>,
    /// Haar-random target drawn from this seed.
    #[arg(long)]
    haar_seed: Option<u64>,
    /// Haar support dimension (default: dim).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct OptArgs {
    /// Box half-width around β₀.
    #[arg(long)]
    delta: Option<f64>,
    /// absolute: |β−β₀| ≤ δ; relative: |β−β₀| ≤ δβ₀.
    #[arg(long, value_parser = parse_delta_mode)]
    delta_mode: Option<DeltaMode>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
}

fn parse_delta_mode(s: &str) -> Result<DeltaMode, String> {
    DeltaMode::parse(s).ok_or_else(|| format!("expected absolute or relative, got '{s}'"))
}

impl Common {
    fn overlay(&self) -> RunConfig {
        RunConfig {
            dim: self.dim,
            lambda: self.lambda,
            n_t: self.n_t,
            n_k: self.n_k,
            k_f: self.k_f,
            beta0: self.beta0,
            seed: self.seed,
            wigner_points: self.wigner_points,
            workers: self.workers,
            ..RunConfig::default()
        }
    }
}

impl TargetArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.code = self.code.clone();
        c.logical = self.logical.clone();
        c.target_file = self.target_file.clone();
        c.haar_seed = self.haar_seed;
        c.d = self.d;
    }
}

impl OptArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.delta = self.delta;
        c.delta_mode = self.delta_mode;
        c.budget = self.budget;
        c.tol = self.tol;
        c.restarts = self.restarts;
    }
}

type Runner = fn(&RunConfig) -> Result<Artifacts, CliError>;

fn plan(cmd: Command) -> (&'static str, Common, RunConfig, Runner) {
    match cmd {
        Command::Prepare { common, target } => {
            let mut o = common.overlay();
            target.apply(&mut o);
            ("prepare", common, o, commands::prepare)
        }
        Command::Optimize {
            common,
            target,
            opt,
            gate,
            state_prep,
            random_gates,
        } => {
            let mut o = common.overlay();
            target.apply(&mut o);
            opt.apply(&mut o);
            o.gate = gate;
            o.state_prep = state_prep.then_some(true);
            o.random_gates = random_gates;
            ("optimize", common, o, commands::optimize)
        }
        Command::Haar { common, d, samples } => {
            let mut o = common.overlay();
            o.d = d;
            o.samples = samples;
            ("haar", common, o, commands::haar)
        }
        Command::Noise {
            common,
            target,
            opt,
            kappa_sweep,
            zeta_sweep,
            seeds,
            dt_substeps,
        } => {
            let mut o = common.overlay();
            target.apply(&mut o);
            opt.apply(&mut o);
            o.kappa_sweep = kappa_sweep;
            o.zeta_sweep = zeta_sweep;
            o.seeds = seeds;
            o.dt_substeps = dt_substeps;
            ("noise", common, o, commands::noise)
        }
        Command::Codes {
            action: CodesAction::Export { common, code },
        } => {
            let mut o = common.overlay();
            o.code = code;
            ("codes export", common, o, commands::codes_export)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, overlay, runner) = plan(cli.command);
    let base = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(overlay);
    if let Some(n) = cfg.workers()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::computation("thread-pool", e.to_string()))?;
    }
    let out = common.out.clone().unwrap_or_else(|| output::default_out_dir(name, &cfg));
    output::check_out_dir(&out)?;
    let artifacts = runner(&cfg)?;
    output::write_run(&out, name, &cfg, &artifacts)?;
    println!(
        "{}",
        serde_json::json!({"command": name, "out": out.display().to_string(), "artifacts": artifacts.len()})
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::config("usage", e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
