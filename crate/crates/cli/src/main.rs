//! `hn`: lemma sweeps, Robin-problem solves and convergence studies.
//!
//! Exit codes: 0 success, 1 mathematical failure (violation or
//! nonconvergence), 2 usage or validation error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hn", version, about = "Hessian-type equations: lemma sweeps and Robin solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the Gårding cones and check every ellipticity inequality.
    VerifyLemmas {
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..=6))]
        n_max: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "hn-out")]
        out: PathBuf,
    },
    /// Solve a problem file by continuation from the paraboloid.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "hn-out")]
        out: PathBuf,
        /// Residual ∞-norm target (default 1e-10·(1 + max ψ̃)).
        #[arg(long)]
        tol: Option<f64>,
        /// Override the grid points per axis.
        #[arg(long)]
        m: Option<usize>,
        /// Override the Robin coefficient.
        #[arg(long)]
        beta: Option<f64>,
        /// Also write the solution as an HNF1 binary dump.
        #[arg(long)]
        dump: bool,
    },
    /// Grid-convergence study of a manufactured solution.
    MmsStudy {
        /// paraboloid, perturbed-paraboloid or perturbed-paraboloid-2d.
        #[arg(long)]
        case: String,
        #[arg(long, value_delimiter = ',', default_value = "9,17,33")]
        grids: Vec<usize>,
        #[arg(long, default_value = "hn-out")]
        out: PathBuf,
    },
    /// Print sampled η vectors in Γ_k as CSV.
    SampleCone {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let status = match cli.command {
        Command::VerifyLemmas {
            n_max,
            samples,
            seed,
            out,
        } => commands::verify_lemmas(n_max as usize, samples, seed, &out),
        Command::Solve {
            problem,
            out,
            tol,
            m,
            beta,
            dump,
        } => commands::solve(&commands::SolveArgs {
            problem,
            out,
            tol,
            m,
            beta,
            dump,
        }),
        Command::MmsStudy { case, grids, out } => commands::mms_study(&case, &grids, &out),
        Command::SampleCone {
            n,
            k,
            count,
            seed,
            scale,
        } => commands::sample_cone(n, k, count, seed, scale),
    };
    ExitCode::from(status)
}
