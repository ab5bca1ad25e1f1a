//! `ptmlab`: seeded batch runs of the ptmlab learners and experiments.

mod config;
mod error;
mod output;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use config::{load, Experiment, Loaded};
use error::{CliError, CliResult};
use run::RunOutput;

const DEFAULT_OUT: &str = "ptmlab-out";
const THREADS_ENV: &str = "PTMLAB_THREADS";

#[derive(Parser)]
#[command(name = "ptmlab", version, about = "Seeded PTM, Hamiltonian and memory-separation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Exit with status 5 when a guarantee check fails.
    #[arg(long)]
    assert: bool,
    /// Output directory (default: the config's `out`, else ./ptmlab-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn every PTM entry from simulated Choi copies.
    PtmLearn(RunArgs),
    /// Learn a PTM and keep only entries above the threshold.
    SparseLearn(RunArgs),
    /// Predict tr[O N(rho)] from a learned PTM.
    Predict(RunArgs),
    /// Learn Hamiltonian coefficients from short-time dynamics.
    HamLearn(RunArgs),
    /// Sweep the memory-separation distinguishing game over copy budgets.
    Separation(RunArgs),
    /// Compare the Choi-route PTM against the direct PTM on random channels.
    Oracle(RunArgs),
    /// Print summary tables for result files.
    Report {
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Simulation(format!("thread pool: {e}")))
}

fn execute<T: DeserializeOwned>(
    args: &RunArgs,
    kind: Experiment,
    f: fn(&Loaded<T>) -> CliResult<RunOutput>,
) -> CliResult<()> {
    let loaded = load::<T>(&args.config, kind, args.seed)?;
    let dir = args
        .out
        .clone()
        .or_else(|| loaded.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let output = f(&loaded)?;
    for (name, bytes) in &output.files {
        let path = output::write_file(&dir, name, bytes)?;
        println!("{}", path.display());
    }
    let failed: Vec<&output::Check> = output.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("ptmlab: check {} failed: {}", c.name, c.detail);
    }
    if let Some(c) = failed.iter().find(|c| c.name == "copy_accounting") {
        return Err(CliError::Simulation(format!("copy accounting mismatch: {}", c.detail)));
    }
    if args.assert && !failed.is_empty() {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        return Err(CliError::Guarantee(names.join(", ")));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::PtmLearn(a) => execute(a, Experiment::PtmLearn, |l| run::learn(l, false)),
        Command::SparseLearn(a) => execute(a, Experiment::SparseLearn, |l| run::learn(l, true)),
        Command::Predict(a) => execute(a, Experiment::Predict, run::predict),
        Command::HamLearn(a) => execute(a, Experiment::HamLearn, run::ham),
        Command::Separation(a) => execute(a, Experiment::SeparationSweep, run::sweep),
        Command::Oracle(a) => execute(a, Experiment::OracleCheck, run::oracle),
        Command::Report { files } => {
            for f in files {
                print!("{}", report::report(f)?);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptmlab: {e}");
            e.exit_code()
        }
    }
}
