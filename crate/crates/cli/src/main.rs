//! `kspart`: generate frames, run the partition solvers and pipelines, sweep
//! epsilon ladders, and convert between frame and projection files.
//!
//! Exit codes: 0 success, 2 usage or I/O, 3 validation failure, 4 certified
//! bound violated by an exhaustive run.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kspart_core::solvers::{LocalSearchConfig, DEFAULT_EXHAUSTIVE_LIMIT};
use kspart_core::{SolverConfig, Strategy};

#[derive(Parser)]
#[command(name = "kspart", version, about = "Frame partition and subset-selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated frame as JSON.
    Gen(GenArgs),
    /// Select a subset for a target and report its error.
    Solve(SolveArgs),
    /// Run a ladder of instances and write CSV rows.
    Sweep(SweepArgs),
    /// Turn a frame file into its projection file or back.
    Convert(ConvertArgs),
    /// Check the invariants of a frame or projection file.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Local,
    Auto,
}

#[derive(Args, Clone)]
struct Shared {
    /// Seed for generators and local search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Largest search size (in bits) run exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_LIMIT)]
    exhaustive_limit: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long)]
    json: bool,
}

impl Shared {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            strategy: match self.strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Local => Strategy::LocalSearch,
                StrategyArg::Auto => Strategy::Auto,
            },
            exhaustive_limit: self.exhaustive_limit,
            local_search: LocalSearchConfig { seed: self.seed, ..LocalSearchConfig::default() },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    RandomTight,
    SubTight,
    Counterexample,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Copies per axis for the counterexample.
    #[arg(long = "big-m", default_value_t = 2)]
    big_m: usize,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["half", "t", "coeffs"])))]
struct SolveArgs {
    /// Frame JSON file.
    frame: PathBuf,
    /// Split into two blocks near half the frame operator.
    #[arg(long)]
    half: bool,
    /// Scalar target `t B`.
    #[arg(long)]
    t: Option<f64>,
    /// JSON array of coefficients for the target `sum t_i u_i u_i*`.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomTight,
    Counterexample,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Half,
    Scalar,
    Coeffs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "random-tight")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "scalar")]
    target: TargetArg,
    /// Level for the scalar target.
    #[arg(long, default_value_t = 0.3)]
    t: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Comma-separated `m` (random tight) or `M` (counterexample) values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    ladder: Vec<usize>,
    /// Seeds per rung, starting at `--seed`.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Skip the exhaustive subset oracle column.
    #[arg(long)]
    no_oracle: bool,
    /// Write 0 in the `ms` column so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    /// Complete a sub-tight frame to a tight one first.
    #[arg(long, requires = "eps_budget")]
    complete: bool,
    /// Largest squared norm of an appended completion vector.
    #[arg(long)]
    eps_budget: Option<f64>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    #[command(flatten)]
    shared: Shared,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<kspart_core::Error>() {
        return match e {
            kspart_core::Error::BoundViolation { .. } => 4,
            kspart_core::Error::Io(_) => 2,
            _ => 3,
        };
    }
    if err.downcast_ref::<commands::BoundFailure>().is_some() {
        return 4;
    }
    if err.downcast_ref::<commands::CheckFailure>().is_some() {
        return 3;
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Convert(a) => commands::convert(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
