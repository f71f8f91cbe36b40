//! One function per subcommand. Each reads its inputs, computes, and writes
//! its artifacts through an [`OutputDir`] so the manifest stays complete.

mod diagnose;
mod distances;
mod prepare;
mod synth;
mod tag;
mod topics;

use std::path::Path;

use parley::embed::{load_table, EmbeddingTable};
use parley::Comment;

use crate::artifacts::{self, CORPUS, FILTERED};
use crate::output::OutputDir;
use crate::settings::{require, Settings};
use crate::{Cli, CliError, Command, Result};

pub fn execute(cli: &Cli) -> Result<()> {
    let settings = Settings::resolve(cli)?;
    if cli.command == Command::Synth {
        return synth::run(&settings);
    }
    let mut out = OutputDir::open(
        &settings.out_dir,
        cli.command.name(),
        &settings.config_hash,
        settings.config_path.as_deref(),
        settings.config.seed,
    )?;
    match cli.command {
        Command::Prepare => prepare::run(&settings, &mut out)?,
        Command::Tag => tag::run(&settings, &mut out)?,
        Command::Topics => topics::run(&settings, &mut out)?,
        Command::Distances => distances::run(&settings, &mut out, cli.source)?,
        Command::Diagnose => diagnose::run(&settings, &mut out)?,
        Command::Filter => filter(&settings, &mut out)?,
        Command::Synth => unreachable!("handled above"),
    }
    out.finish()?;
    Ok(())
}

pub(crate) fn runtime(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(anyhow::anyhow!("{context}: {e}"))
}

pub(crate) fn invalid(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{context}: {e}"))
}

pub(crate) fn master_corpus(settings: &Settings) -> Result<Vec<Comment>> {
    artifacts::read_corpus(
        &settings.out_dir.join(CORPUS),
        "master corpus (run `parley prepare` first)",
    )
}

pub(crate) fn table(settings: &Settings) -> Result<EmbeddingTable> {
    let path = settings.embedding_table();
    require(
        &path,
        "embedding table (set paths.embedding_table or run `parley synth`)",
    )?;
    load(&path)
}

fn load(path: &Path) -> Result<EmbeddingTable> {
    load_table(path).map_err(|e| invalid(&path.display().to_string(), e))
}

fn filter(settings: &Settings, out: &mut OutputDir) -> Result<()> {
    let corpus = master_corpus(settings)?;
    let subset = parley::corpus::filter_comments(&corpus, &settings.config.filter_criteria());
    log::info!("filter kept {} of {} comments", subset.len(), corpus.len());
    out.write(FILTERED, &artifacts::corpus_bytes(&subset)?)?;
    Ok(())
}
