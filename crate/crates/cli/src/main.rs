use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bwrank::tolerance::{Tolerances, ANGLE_TOL, RANK_TOL};
use bwrank_cli::commands::{cmd_distance, cmd_geodesic, cmd_logcount, cmd_reproduce, cmd_verify};
use bwrank_cli::{seed_from_env, CliResult};
use clap::{Parser, Subcommand};

/// Fixed-rank covariance geometry under the Bures–Wasserstein metric.
#[derive(Parser)]
#[command(name = "bwrank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a geodesic from a JSON config and write CSV/SVG output.
    Geodesic { config: PathBuf },
    /// BW distance between two PSD matrix files, by formula and by Procrustes.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = RANK_TOL)]
        rank_tol: f64,
    },
    /// Count the logarithms between XXᵀ and YYᵀ and certify sampled rotations.
    Logcount {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = ANGLE_TOL)]
        angle_tol: f64,
    },
    /// Run a built-in example: ex1-n2k1, ex2-nk1, ex3-a or ex3-b.
    Reproduce {
        id: String,
        /// Output directory (default: reproduce-<id>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized invariant suite.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = ANGLE_TOL)]
        angle_tol: f64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    match cli.command {
        Command::Geodesic { config } => cmd_geodesic(&config, &mut out),
        Command::Distance { a, b, rank_tol } => cmd_distance(&a, &b, rank_tol, &mut out),
        Command::Logcount {
            x,
            y,
            samples,
            seed,
            rank_tol,
            angle_tol,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => seed_from_env(0)?,
            };
            cmd_logcount(
                &x,
                &y,
                samples,
                seed,
                Tolerances { rank_tol, angle_tol },
                &mut out,
                &mut err,
            )
        }
        Command::Reproduce { id, out: dir } => {
            let dir = dir.unwrap_or_else(|| PathBuf::from(format!("reproduce-{id}")));
            cmd_reproduce(&id, &dir, &mut out)
        }
        Command::Verify {
            seed,
            trials,
            dt,
            rank_tol,
            angle_tol,
        } => cmd_verify(seed, trials, dt, Tolerances { rank_tol, angle_tol }, &mut out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("bwrank: {e}");
            ExitCode::from(e.code)
        }
    }
}
