//! `sawtooth`: experiments on the quantum sawtooth map from the command line.

mod config;
mod devices;
mod diffusion;
mod localize;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::UsageError;

#[derive(Debug, Parser)]
#[command(name = "sawtooth", version, about = "Quantum sawtooth-map simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Momentum distributions after repeated kicks, noiseless or on a device model
    Localize(localize::LocalizeArgs),
    /// Check the gate circuit against the direct step unitary
    Verify(verify::VerifyArgs),
    /// Classical ensemble diffusion and fitted D
    Diffusion(diffusion::DiffusionArgs),
    /// Compare device models for the one-step circuit
    Devices(devices::DevicesArgs),
    /// Noisy peak height along one device-parameter axis
    Sweep(localize::SweepArgs),
    /// Export the step circuit, optionally routed onto a device
    Circuit(devices::CircuitArgs),
}

fn run(cli: &mut Cli, matches: &ArgMatches) -> anyhow::Result<bool> {
    if let (Command::Localize(a), Some(("localize", sub))) = (&mut cli.command, matches.subcommand()) {
        localize::apply_config(a, sub)?;
    }
    match &cli.command {
        Command::Localize(a) => localize::localize(a).map(|_| true),
        Command::Verify(a) => verify::verify(a),
        Command::Diffusion(a) => diffusion::diffusion(a).map(|_| true),
        Command::Devices(a) => devices::devices(a),
        Command::Sweep(a) => localize::sweep(a).map(|_| true),
        Command::Circuit(a) => devices::circuit(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let mut cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(&mut cli, &matches) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
