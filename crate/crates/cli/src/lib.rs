//! Command-line front end: configuration, manifests and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod pipeline;
pub mod scene;

use clap::{Parser, Subcommand};

use crate::commands::{EvaluateArgs, GeometryArgs, HrtfArgs};
use crate::config::RunArgs;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "arraybin", version, about = "Binaural rendering from distributed microphone arrays")]
pub struct Cli {
    /// Worker threads (default: all cores, or ARRAYBIN_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or check an array geometry file.
    Geometry(GeometryArgs),
    /// Simulate microphone observations of a scene.
    Simulate(RunArgs),
    /// Estimate expansion coefficients at the listener position.
    Estimate(RunArgs),
    /// Render binaural spectra (and an impulse response when a scene is given).
    Render(RunArgs),
    /// Design the per-microphone binaural FIR filter bank.
    Filters(RunArgs),
    /// Compute metric tables for one experiment.
    Evaluate(EvaluateArgs),
    /// Build an HRTF bundle from the synthetic head or a CSV table.
    Hrtf(HrtfArgs),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Geometry(a) => commands::cmd_geometry(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Estimate(a) => commands::cmd_estimate(a),
        Command::Render(a) => commands::cmd_render(a),
        Command::Filters(a) => commands::cmd_filters(a),
        Command::Evaluate(a) => commands::cmd_evaluate(a),
        Command::Hrtf(a) => commands::cmd_hrtf(a),
    }
}
