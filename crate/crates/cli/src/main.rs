//! `rmp`: config-driven runner for the moment polytope pipeline.
//!
//! Exit codes: 0 when every enabled check passes, 1 when a check misses its
//! threshold, 2 on errors (bad config, I/O, a failed pipeline stage).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use commands::Outcome;
use config::ExperimentConfig;
use rmp_core::orbit::Mode;

#[derive(Parser)]
#[command(name = "rmp", version, about = "Moment polytopes of real loci of isospectral orbit products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `sampling.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `problem.mode`.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Real,
    Hermitian,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the chamber image of the moment map.
    Sample(Common),
    /// Convex hull of a sample.
    Hull(Common),
    /// Gradient flow of the moment map norm square from one sample.
    Flow {
        #[command(flatten)]
        common: Common,
        /// Sample index of the start point.
        #[arg(long, default_value_t = 0)]
        start: u64,
    },
    /// Nearest point of the polytope to ξ via the shifted flow.
    Project {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly decreasing, e.g. `3,-1` or `5/2,1/2`.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Generate the pair families.
    Pairs(Common),
    /// Full pipeline: pairs, inequality system and comparison with samples.
    Verify(Common),
    /// Summarize a `report.json` written by `verify`.
    Report {
        /// Directory holding `report.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    if let Some(m) = c.mode {
        cfg.problem.mode = match m {
            ModeArg::Real => Mode::Real,
            ModeArg::Hermitian => Mode::Hermitian,
        };
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Sample(c) => commands::sample(&load(&c)?),
        Command::Hull(c) => commands::hull(&load(&c)?),
        Command::Flow { common, start } => commands::flow(&load(&common)?, start),
        Command::Project { common, xi } => commands::project(&load(&common)?, &xi),
        Command::Pairs(c) => commands::pairs(&load(&c)?),
        Command::Verify(c) => commands::verify(&load(&c)?),
        Command::Report { out } => commands::report(&out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
