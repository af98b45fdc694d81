//! `evq` — config-driven runner for the event-by-event simulators.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "evq",
    about = "Event-by-event simulation of interference and Bell-test statistics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        /// Path to the run configuration.
        config: PathBuf,
        /// Override the config file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config file's output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Worker threads for grid and sweep fan-out (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available experiments and their parameters.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", config::describe_experiments());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(text) => text,
                Err(err) => {
                    eprintln!("error: cannot read {}: {err}", config.display());
                    return ExitCode::from(2);
                }
            };
            let resolved = match config::load(&text, seed, out) {
                Ok(resolved) => resolved,
                Err(err) => {
                    eprintln!("error: invalid config {}: {err:#}", config.display());
                    return ExitCode::from(2);
                }
            };
            match runner::execute(&resolved, threads) {
                Ok(()) => {
                    println!(
                        "{}: wrote {}",
                        resolved.experiment,
                        resolved.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: run failed: {err:#}");
                    eprintln!("partial outputs kept in {}", resolved.output_dir.display());
                    ExitCode::FAILURE
                }
            }
        }
    }
}
