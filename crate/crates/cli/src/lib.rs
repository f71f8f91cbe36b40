//! The `parley` command-line pipeline.
//!
//! Each subcommand reads its inputs from the output directory (or from paths
//! in the config), writes CSV artifacts back into it, and records every file
//! in `manifest.json`.

pub mod artifacts;
pub mod commands;
pub mod output;
pub mod settings;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, bad arguments or missing inputs. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Anything that failed while doing the work. Exit code 2.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Query,
    Latent,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Query => "query",
            Source::Latent => "latent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and clean note files into the master corpus CSV.
    Prepare,
    /// Tag comments with predefined issues by embedding query expansion.
    Tag,
    /// Extract latent topics with NMF.
    Topics,
    /// Party positions, distance profiles, heatmaps and margins.
    Distances,
    /// Embedding-space diagnostics.
    Diagnose,
    /// Write the subset of the corpus matching the configured filter.
    Filter,
    /// Generate a synthetic corpus, embedding table and ground truth.
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Prepare => "prepare",
            Command::Tag => "tag",
            Command::Topics => "topics",
            Command::Distances => "distances",
            Command::Diagnose => "diagnose",
            Command::Filter => "filter",
            Command::Synth => "synth",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "parley", version, about = "Dialogue-note analytics pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; every setting has a default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PARLEY_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Which tagging feeds `distances`.
    #[arg(long, global = true, value_enum, default_value_t = Source::Query)]
    pub source: Source,
    /// Compare parties against this one instead of the average.
    #[arg(long, global = true)]
    pub baseline: Option<String>,
    #[arg(long, global = true)]
    pub emit_svg: bool,
}

/// Runs one subcommand and maps the outcome to an exit code.
pub fn run(cli: &Cli) -> u8 {
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    }
}
