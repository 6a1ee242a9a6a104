//! Command-line front end: scenario runs and the invariant verification
//! suite. Exit codes: 0 success, 2 validation error, 3 numerical failure.

mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scenario::{CliError, OutputFormat, RunOptions};

#[derive(Parser)]
#[command(
    name = "qsfm",
    about = "Stochastic finite state machines, tight-binding quantum \
models, and the maps between them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and emit its trajectory/report artifacts plus
    /// a summary JSON.
    Run {
        /// Scenario JSON path.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for artifacts.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the scenario's step count.
        #[arg(long)]
        steps: Option<usize>,
        /// Seed for the measurement sampler and randomized suites.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Trajectory output format.
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Run the module invariant suites and write a machine-readable report.
    Verify {
        /// Restrict to one suite (linalg, fsm, quantum, bridge, wannier).
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QSFM_LOG")).init();
    let cli = Cli::parse();

    let result = match cli.command {
        Command::Run {
            scenario: path,
            out,
            steps,
            seed,
            format,
        } => {
            let opts = RunOptions {
                out_dir: out,
                steps_override: steps,
                seed,
                format: match format {
                    FormatArg::Csv => OutputFormat::Csv,
                    FormatArg::Json => OutputFormat::Json,
                },
            };
            scenario::load_scenario(&path).and_then(|sc| scenario::run_scenario(&sc, &opts))
        }
        Command::Verify { suite, out, seed } => {
            let opts = RunOptions {
                out_dir: out,
                steps_override: None,
                seed,
                format: OutputFormat::Json,
            };
            scenario::run_scenario(&scenario::Scenario::Verify { suite }, &opts)
        }
    };

    match result {
        Ok(outcome) => {
            for artifact in &outcome.artifacts {
                log::info!("wrote {artifact}");
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.summary).expect("summary serializes")
            );
            ExitCode::SUCCESS
        }
        Err(err @ CliError::Validation(_)) => {
            eprintln!("{err}");
            ExitCode::from(2)
        }
        Err(err @ CliError::Numerical(_)) => {
            eprintln!("{err}");
            ExitCode::from(3)
        }
    }
}
