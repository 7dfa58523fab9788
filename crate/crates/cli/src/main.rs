//! `pilotspace`: optimal pilot design, CRB evaluation and bound curves.
//!
//! Exit codes: 0 on success (including a non-identifiable verdict), 2 when a
//! variation space is rank deficient, 1 for everything else.

mod commands;
mod config;
mod matrix_io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ModelKind;

#[derive(Parser)]
#[command(name = "pilotspace", version, about = "Pilot design and Cramér-Rao bounds for parametric channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal minimal-length observation matrix for a model.
    Design(DesignArgs),
    /// CRB of an observation matrix at a parameter point.
    Crb(ProbeArgs),
    /// Identifiability verdict only.
    Identify(ProbeArgs),
    /// Bound curves for the angle-constrained and proposed strategies.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[command(flatten)]
        args: ExperimentArgs,
    },
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Number of antennas of the ULA (or channel dimension for `ls`).
    #[arg(long)]
    pub nt: Option<usize>,
    /// Comma-separated azimuths in radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub azimuths: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub power: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
    /// Observation matrix JSON; without it, matrix and report go to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report JSON (default: next to the matrix, `*.report.json`).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Observation matrix JSON.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Parameter vector as a JSON array; required for `physical` in `crb`.
    #[arg(long)]
    pub theta: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ExperimentKind {
    SinglePath,
    Multipath,
}

impl ExperimentKind {
    fn name(self) -> &'static str {
        match self {
            Self::SinglePath => "single-path",
            Self::Multipath => "multipath",
        }
    }
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per Δ (multipath).
    #[arg(long)]
    pub trials: Option<usize>,
    /// CSV file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// gnuplot script reading the CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn rank_deficient(e: &anyhow::Error) -> bool {
    e.chain()
        .any(|c| matches!(c.downcast_ref::<pilotspace::Error>(), Some(pilotspace::Error::RankDeficient { .. })))
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is taken by rank deficiency
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let res = match &cli.command {
        Command::Design(a) => commands::design(a),
        Command::Crb(a) => commands::crb(a),
        Command::Identify(a) => commands::identify(a),
        Command::Experiment { kind, args } => commands::experiment(*kind, args),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if rank_deficient(&e) { 2 } else { 1 })
        }
    }
}
