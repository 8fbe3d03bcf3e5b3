//! `viscolab`: reproducible experiments with CSV artifacts.
//!
//! Exit codes: 0 when every embedded certification passes, 1 when one fails,
//! 2 for bad input, 3 for internal errors.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "viscolab", version, about = "Viscosity certification and regularity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: Args,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve `F_h u = F(D²u*)` for a quadratic fixture and certify it.
    Solve,
    /// Solve the obstacle problem and certify the manufactured inequality.
    Obstacle,
    /// Certify a grid function against bounds.
    Visc,
    /// Decay profile, chain inequality and blow-up sequence at the origin.
    Campanato,
    /// Mollified sandwich check and L^p Hessian stability sweep.
    Mollify,
    /// Limit stability experiment for a family of inequalities.
    Limit,
    /// Sampled ellipticity and homogeneity checks of an operator.
    Props,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Args {
    /// `trace`, `linear:a11,a12,a22`, `pucci+:l1,l2`, `pucci-:l1,l2`.
    #[arg(long, global = true)]
    pub op: Option<String>,
    /// Nodes per axis on [-1, 1]².
    #[arg(long, global = true, default_value_t = 65)]
    pub res: usize,
    /// `harmonic`, `quad`, `kink`, `radial-holder:γ`, `disc`.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    /// Grid-function file; a `manifest.txt` beside it supplies bounds and operator.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, global = true, default_value_t = 0.25)]
    pub lambda: f64,
    /// Mollification radius (mollify) or normalisation ε (campanato).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Decay levels (campanato, default 3) or k_max (limit, default 8).
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Multiplies every default certification tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    /// Explicit `lo,hi` bounds; `inf` and `-inf` allowed.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// `pointwise` or `touching` (visc).
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// `oscillating`, `dirichlet` or `constant` (limit).
    #[arg(long, global = true, default_value = "oscillating")]
    pub family: String,
    /// Exponent of the Hessian norm (mollify).
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,
    /// Radius of the ball for the Hessian norm (mollify).
    #[arg(long, global = true, default_value_t = 0.5)]
    pub radius: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = &cli.args;
    let run = commands::ensure_out(&args.out).and_then(|()| match cli.command {
        Command::Solve => commands::solve(args),
        Command::Obstacle => commands::obstacle(args),
        Command::Visc => commands::visc(args),
        Command::Campanato => commands::campanato(args),
        Command::Mollify => commands::mollify(args),
        Command::Limit => commands::limit(args),
        Command::Props => commands::props(args),
    });
    match run {
        Ok(v) if v.pass => {
            println!("pass: {}", v.report.display());
            ExitCode::SUCCESS
        }
        Ok(v) => {
            eprintln!("certification failed, see {}", v.report.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
