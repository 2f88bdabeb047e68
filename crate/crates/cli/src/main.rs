//! `strobo`: scenario runner for the periodically kicked Schrödinger
//! equation.
//!
//! Exit codes: 0 success, 1 invalid config, 2 runtime failure, 3 refiner
//! non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Log};

#[derive(Parser)]
#[command(name = "strobo", version, about = "Stroboscopic soliton simulator")]
struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial states and write trajectories.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only check the config.
        #[arg(long)]
        validate: bool,
    },
    /// Solve for the stationary stroboscopic soliton numerically.
    Refine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `evolution.epsilon`.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Overrides `refine.tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Convert the `[physical]` section to the dimensionless strength.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and exit.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run several configs concurrently, each into `<out>/<config stem>`.
    Sweep {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let log = Log { quiet: cli.quiet };
    match cli.command {
        Command::Run { config, out, validate } => {
            let s = commands::load(&config)?;
            if validate {
                commands::validate(&s, log)
            } else {
                commands::run(&s, out.as_deref(), log)
            }
        }
        Command::Refine {
            config,
            out,
            epsilon,
            tol,
        } => {
            let mut s = commands::load(&config)?;
            if let Some(eps) = epsilon {
                s.evolution.epsilon = Some(eps);
            }
            if let Some(tol) = tol {
                s.refine.tol = tol;
            }
            commands::refine(&s, out.as_deref(), log)
        }
        Command::Estimate { config, out } => commands::estimate(&commands::load(&config)?, out.as_deref(), log),
        Command::Validate { config } => commands::validate(&commands::load(&config)?, log),
        Command::Sweep { config, out } => {
            let results = commands::sweep(&config, &out, log);
            let mut worst: Option<Failure> = None;
            for (path, outcome) in results {
                if let Err(e) = outcome {
                    eprintln!("{}: {e}", path.display());
                    if worst.as_ref().map_or(true, |w| e.exit_code() > w.exit_code()) {
                        worst = Some(e);
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sweep = matches!(cli.command, Command::Sweep { .. });
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !sweep {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
