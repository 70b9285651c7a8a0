use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Print the gap and admissibility of the potential and window.
    Validate,
    /// Eigenvalues by every configured method plus the oracle.
    Eigenvalues,
    /// Transfer-matrix sweep over h and energies.
    Transfer,
    /// Least-squares fit of the correction matrices.
    Fit,
    /// Convergence of each method against the oracle.
    Study,
    /// Determinant, realness, oracle agreement and Wronskian checks.
    Check,
}

#[derive(Debug, Parser)]
#[command(name = "swkb", version, about = "Semiclassical spectra for x^gamma-singular potentials")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "SWKB_THREADS")]
    pub threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("swkb: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
