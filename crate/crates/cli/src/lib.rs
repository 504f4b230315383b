//! Scenario loading, subcommands and report writing for the `shiftcert` binary.

pub mod commands;
pub mod scenario;

use clap::{Args, Parser, Subcommand};
use commands::{CliError, Outcome, Overrides};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "shiftcert", version, about = "Certify non-cyclic vectors for weighted shifts at finite truncation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the truncation (series cutoff, or block power range).
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the ξ grid size.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// θ and 1/θ coefficients with reciprocal-identity residuals (CSV + JSON).
    Coeffs(Common),
    /// Governing condition and witness scan; exit 0 certified, 2 not certified, 3 inconclusive.
    Certify(Common),
    /// Block operator build with power, eigenvalue and resolvent probes.
    Blockprobe(Common),
    /// Dominated, summable or step weight construction.
    WeightsMake(Common),
    /// Carleson sum of the measure's support.
    Carleson(Common),
    /// Witness pairs over the ξ grid (CSV).
    WitnessScan(Common),
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (c, f): (&Common, fn(&scenario::Loaded, &std::path::Path) -> Result<Outcome, CliError>) = match &cli.command {
        Command::Coeffs(c) => (c, commands::cmd_coeffs),
        Command::Certify(c) => (c, commands::cmd_certify),
        Command::Blockprobe(c) => (c, commands::cmd_blockprobe),
        Command::WeightsMake(c) => (c, commands::cmd_weights_make),
        Command::Carleson(c) => (c, commands::cmd_carleson),
        Command::WitnessScan(c) => (c, commands::cmd_witness_scan),
    };
    let mut loaded = scenario::load(&c.scenario)?;
    commands::apply_overrides(&mut loaded, Overrides { n: c.n, grid: c.grid });
    f(&loaded, &c.out)
}
