use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use locc_bounds::{generate_random_scenario, run_scenario, Command, GeneratorSpec, RunOptions, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials for random scenarios.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Slack tolerance [default: 1e-7, or the scenario's `tolerances.slack`].
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the protocol, check every bound and audit each round.
    BoundsVerify(RunArgs),
    /// Print the outcome tree and chain-rule mutual information.
    ProtocolRun(RunArgs),
    /// Distillation-yield bounds of the (average) state.
    DistillReport(RunArgs),
    /// S, S_A, S_B and Holevo quantities of the ensemble.
    Entropy(RunArgs),
    /// Write the scenario drawn from a generator spec (JSON) to stdout.
    Generate {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Checks information-theoretic bounds for LOCC protocols and distillation.
#[derive(Debug, Parser)]
#[command(name = "locc-bounds", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(command: Command, args: &RunArgs) -> Result<bool, String> {
    let scenario = ScenarioFile::parse(&read(&args.scenario)?).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        seed: args.seed,
        trials: args.trials,
        tol: args.tol,
    };
    let report = run_scenario(&scenario, command, &opts).map_err(|e| e.to_string())?;
    match args.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Table => print!("{}", report.to_table()),
    }
    Ok(report.pass)
}

fn generate(spec: &Path, seed: u64) -> Result<bool, String> {
    let spec: GeneratorSpec = serde_json::from_str(&read(spec)?).map_err(|e| format!("generator spec: {e}"))?;
    let s = generate_random_scenario(seed, &spec).map_err(|e| e.to_string())?;
    print!("{}", s.to_json());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::BoundsVerify(a) => run(Command::BoundsVerify, a),
        Cmd::ProtocolRun(a) => run(Command::ProtocolRun, a),
        Cmd::DistillReport(a) => run(Command::DistillReport, a),
        Cmd::Entropy(a) => run(Command::Entropy, a),
        Cmd::Generate { spec, seed } => generate(spec, *seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
