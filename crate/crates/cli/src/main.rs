use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbms_core::FbmsError;

mod commands;
mod config;
mod output;

use config::{CommonArgs, RunConfig};

#[derive(Parser)]
#[command(name = "fbms", version = VERSION, about = "Morse index and nullity of free boundary minimal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-boundary and Jacobi-Steklov spectra.
    Spectrum(CommonArgs),
    /// Index and nullity certificate.
    Index(CommonArgs),
    /// Errors of the lowest Jacobi-Steklov values over a list of resolutions.
    Converge(CommonArgs),
    /// Free boundary condition and Jacobi field residuals of the chart.
    GeometryCheck(CommonArgs),
}

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("FBMS_GIT_DESCRIBE"),
    ")"
);

fn exit_code(e: &FbmsError) -> u8 {
    match e {
        FbmsError::Validation(_)
        | FbmsError::DimensionMismatch { .. }
        | FbmsError::Precondition(_) => 2,
        FbmsError::Solver(_)
        | FbmsError::SingularChart { .. }
        | FbmsError::DegenerateCell { .. } => 3,
        FbmsError::Borderline(_) => 4,
    }
}

fn run(cmd: Command) -> Result<(), FbmsError> {
    match cmd {
        Command::Spectrum(a) => commands::spectrum(&RunConfig::from_args(&a)?),
        Command::Index(a) => commands::index(&RunConfig::from_args(&a)?),
        Command::Converge(a) => commands::converge(&RunConfig::for_converge(&a)?),
        Command::GeometryCheck(a) => commands::geometry_check(&RunConfig::from_args(&a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbms: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
