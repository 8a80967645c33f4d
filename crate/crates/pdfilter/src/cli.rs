//! Command-line interface.
//!
//! Exit status: 0 when the command ran and its checks passed, 1 for invalid
//! input or a failed check, 2 when a solver did not converge.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CommandKind, ExperimentConfig, Overrides};
use crate::manifest::Manifest;
use crate::{LoadedModel, Result};

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "PDFILTER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "pdfilter", version, about = "Exact filtering of Markov chains under noise-free observation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Load a model file and check every invariant.
    Validate(RunArgs),
    /// Sample a chain path and its observation.
    Simulate(RunArgs),
    /// Sample, observe and filter; export all three paths.
    Filter(RunArgs),
    /// Exit-time survival from a subset: nonlinear formula vs sub-generator.
    ExitTime(RunArgs),
    /// Monte Carlo check of the first-jump law of the filter.
    PdpCheck(RunArgs),
    /// Solve the stopping problem and evaluate its rule.
    Stop(RunArgs),
    /// Distance between two filters driven by the same observations.
    Stability(RunArgs),
    /// Re-run a command from its manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = OUT_DIR_ENV, default_value = "pdfilter-out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "pdfilter-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Monte Carlo replications.
    #[arg(long)]
    pub sims: Option<usize>,
    /// Grid resolution per face.
    #[arg(long)]
    pub grid: Option<u32>,
    /// Solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output time step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Comma-separated state names.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
    /// Start state name.
    #[arg(long)]
    pub start: Option<String>,
    /// Comma-separated initial weights.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    /// Comma-separated weights of the second initialization.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            horizon: self.horizon,
            sims: self.sims,
            grid: self.grid,
            tol: self.tol,
            step: self.step,
            subset: self.subset.clone(),
            start: self.start.clone(),
            mu: self.mu.clone(),
            rho: self.rho.clone(),
        }
    }
}

fn execute(cli: Cli) -> Result<commands::Outcome> {
    let (kind, args) = match cli.command {
        Cmd::Validate(a) => (CommandKind::Validate, a),
        Cmd::Simulate(a) => (CommandKind::Simulate, a),
        Cmd::Filter(a) => (CommandKind::Filter, a),
        Cmd::ExitTime(a) => (CommandKind::ExitTime, a),
        Cmd::PdpCheck(a) => (CommandKind::PdpCheck, a),
        Cmd::Stop(a) => (CommandKind::Stop, a),
        Cmd::Stability(a) => (CommandKind::Stability, a),
        Cmd::Rerun { manifest, out } => {
            let m = Manifest::read(&manifest)?;
            let lm = m.model.clone().load()?;
            return commands::run(&lm, &m.config, &out);
        }
    };
    let lm = LoadedModel::read(&args.model)?;
    let cfg = ExperimentConfig::resolve(kind, args.overrides(), &lm)?;
    commands::run(&lm, &cfg, &args.out)
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome.summary).unwrap_or_default());
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
