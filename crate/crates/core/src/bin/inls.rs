use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inls::experiments::{self, Command, RunConfig, RunOptions, EXIT_RUNTIME};

#[derive(Parser)]
#[command(name = "inls", version, about = "Split-step runs and diagnostics for the 1-D inhomogeneous NLS")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed for randomized suites, overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Drop the nonlinearity.
    #[arg(long, global = true)]
    linear_only: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Evolve the initial data and record observables.
    Evolve,
    /// Measure the time-stepping order and energy drift.
    Convergence,
    /// Check Hardy's inequality on random odd packets.
    Hardy,
    /// Interaction-picture scattering, small-data and wave-operator checks.
    Scatter,
    /// Run evolve or scatter over a grid of (alpha, b).
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Evolve => Command::Evolve,
            Cmd::Convergence => Command::Convergence,
            Cmd::Hardy => Command::Hardy,
            Cmd::Scatter => Command::Scatter,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = RunOptions {
        out: cli.out.clone(),
        workers: cli.workers,
        seed: cli.seed,
        linear_only: cli.linear_only,
    };

    let result = match &cli.config {
        Some(path) => RunConfig::from_path(path),
        None => Err(inls::Error::Config("--config is required".into())),
    };
    let out_dir = result
        .as_ref()
        .ok()
        .and_then(|c| options.out.clone().or_else(|| c.out.clone()))
        .or_else(|| options.out.clone());

    match result.and_then(|config| experiments::run_experiment(cli.command.into(), config, &options)) {
        Ok(summary) => {
            let body = serde_json::json!({
                "command": summary.command.name(),
                "out": summary.out_dir,
                "files": summary.files,
                "failures": summary.failures,
            });
            println!("{}", serde_json::to_string_pretty(&body).expect("plain json"));
            if summary.failures > 0 {
                ExitCode::from(EXIT_RUNTIME as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            let body = experiments::write_error_report(&err, out_dir.as_deref());
            eprintln!("{}", serde_json::to_string_pretty(&body).expect("plain json"));
            ExitCode::from(experiments::exit_code(&err) as u8)
        }
    }
}
