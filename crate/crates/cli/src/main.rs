//! `chaos-bandit` command-line front end.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "chaos-bandit",
    version,
    about = "Chaos-signal multi-armed bandit benchmarks"
)]
struct Cli {
    /// Master seed; for `run` it overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every reward environment over a value grid with a given spread.
    Enumerate {
        #[arg(long)]
        k: usize,
        /// Required difference between the largest and smallest mean.
        #[arg(long)]
        gap: f64,
        /// Comma-separated candidate means (default 0.1,0.2,...,0.9).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Draw random reward environments without a spread constraint.
    Sample {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Run an experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Use 12000 measurements per environment and policy.
        #[arg(long)]
        full_scale: bool,
    },
    /// Evaluate the two-arm threshold dynamics.
    Theory {
        #[arg(long)]
        mu0: f64,
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        w1: f64,
        /// Write a trajectory of this many steps to theory.csv.
        #[arg(long)]
        n: Option<u64>,
        /// Monte-Carlo trials for the trajectory's empirical columns.
        #[arg(long, default_value_t = 0)]
        mc_trials: usize,
    },
    /// Generate a synthetic signal as one float per line.
    GenSignal {
        #[arg(long, value_enum)]
        kind: SignalKind,
        #[arg(long)]
        len: usize,
        /// Logistic-map starting point in (0, 1).
        #[arg(long)]
        x0: Option<f64>,
        /// Output file; defaults to signal.txt in --out-dir, else stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignalKind {
    Uniform,
    Logistic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let Cli {
        seed,
        jobs,
        out_dir,
        command,
    } = cli;
    let schedule = chaos_bandit::Schedule::from_jobs(jobs);
    match command {
        Command::Enumerate { k, gap, values } => {
            commands::enumerate(k, gap, values, out_dir.as_deref())
        }
        Command::Sample { k, count, values } => {
            commands::sample(k, count, values, seed.unwrap_or(0), out_dir.as_deref())
        }
        Command::Run { config, full_scale } => {
            let out_dir = out_dir.unwrap_or_else(|| PathBuf::from("results"));
            commands::run(&config, full_scale, seed, schedule, &out_dir)
        }
        Command::Theory {
            mu0,
            mu1,
            lambda,
            omega,
            alpha,
            w1,
            n,
            mc_trials,
        } => {
            let model = chaos_bandit::theory::TwoArmModel {
                mu0,
                mu1,
                lambda,
                omega,
                alpha,
                w1,
            };
            let traj = commands::Trajectory {
                n,
                mc_trials,
                seed: seed.unwrap_or(0),
                schedule,
            };
            commands::theory(&model, traj, out_dir.as_deref())
        }
        Command::GenSignal {
            kind,
            len,
            x0,
            output,
        } => {
            let output = output.or_else(|| out_dir.map(|d| d.join("signal.txt")));
            commands::gen_signal(kind, len, x0, seed.unwrap_or(0), output.as_deref())
        }
    }
}
