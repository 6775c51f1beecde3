//! `mma`: file-based pipeline driver for multi-mode antenna design.
//!
//! Stages hand off through JSON/CSV files so every step is reproducible and
//! diffable. Exit codes: 0 success, 2 invalid arguments or config, 3
//! numerical failure, 4 infeasible port optimization (report still written).

mod commands;
mod patterns_io;

use clap::{Parser, Subcommand};
use mma_core::error::Error;

#[derive(Parser)]
#[command(
    name = "mma",
    about = "Characteristic-mode analysis, port synthesis, array layout, and hybrid beamforming simulation for PEC plate antennas",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a triangulated plate mesh (JSON).
    Mesh(commands::MeshArgs),
    /// Characteristic-mode analysis: modal report JSON plus far-field CSVs.
    Cma(commands::CmaArgs),
    /// Synthesize decorrelated antenna ports under a correlation ceiling.
    Ports(commands::PortsArgs),
    /// Build an array layout, optionally comparing against a reference.
    Array(commands::ArrayArgs),
    /// Run a multicarrier beamforming campaign from a config file.
    Simulate(commands::SimulateArgs),
    /// Reproduce the multi-mode vs crossed-dipole array size comparison.
    ReproduceTable,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_)
        | Error::ResolutionTooCoarse { .. }
        | Error::InvalidMesh(_)
        | Error::UnsupportedShape(_)
        | Error::AsymmetricMesh(_)
        | Error::InvalidConfiguration(_)
        | Error::ConfigError { .. }
        | Error::Io(_) => 2,
        Error::ProblemTooLarge { .. }
        | Error::DegenerateOperator(_)
        | Error::NumericalFailure(_)
        | Error::DegenerateField(_)
        | Error::DegeneratePort(_)
        | Error::PrecoderSingular(_) => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mesh(args) => commands::run_mesh(args),
        Command::Cma(args) => commands::run_cma(args),
        Command::Ports(args) => commands::run_ports(args),
        Command::Array(args) => commands::run_array(args),
        Command::Simulate(args) => commands::run_simulate(args),
        Command::ReproduceTable => commands::run_reproduce_table(),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
