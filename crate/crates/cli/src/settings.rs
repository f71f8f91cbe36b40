//! Configuration loading and command-line overrides.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use parley::stopwords;
use parley::RunConfig;
use sha2::{Digest, Sha256};

use crate::{Cli, CliError, Result};

pub const SYNTH_DIR: &str = "synthetic";

/// Effective configuration for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// SHA-256 of the effective configuration after overrides.
    pub config_hash: String,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        if let Some(b) = &cli.baseline {
            config.positions.baseline = Some(b.clone());
        }
        if cli.emit_svg {
            config.flags.emit_svg = true;
        }
        let out_dir = cli
            .out
            .clone()
            .or_else(|| config.paths.output_dir.clone())
            .ok_or_else(|| {
                CliError::validation("no output directory: pass --out, set PARLEY_OUT or paths.output_dir")
            })?;
        config.paths.output_dir = Some(out_dir.clone());
        config.validate().map_err(|e| CliError::validation(e.to_string()))?;
        let config_hash = config_hash(&config);
        Ok(Self {
            config,
            config_path: cli.config.clone(),
            out_dir,
            config_hash,
        })
    }

    pub fn notes_dir(&self) -> PathBuf {
        self.config
            .paths
            .notes_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join(SYNTH_DIR).join("notes"))
    }

    pub fn embedding_table(&self) -> PathBuf {
        self.config
            .paths
            .embedding_table
            .clone()
            .unwrap_or_else(|| self.out_dir.join(SYNTH_DIR).join("embeddings.txt"))
    }

    pub fn stopwords(&self) -> Result<HashSet<String>> {
        match &self.config.paths.stopwords {
            None => Ok(stopwords::english()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::validation(format!("paths.stopwords: cannot read {}: {e}", p.display())))?;
                Ok(stopwords::from_text(&text))
            }
        }
    }
}

/// Fails with a validation error naming the missing input.
pub fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "missing {what}: {} not found",
            path.display()
        )))
    }
}
