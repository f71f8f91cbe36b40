//! Output directory: exclusive lock, artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub const LOCK_FILE: &str = ".parley.lock";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub sha256: String,
    pub bytes: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config_path: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub versions: BTreeMap<String, String>,
    pub runs: Vec<RunRecord>,
    /// Every file currently in the directory that a run wrote, by relative path.
    pub outputs: BTreeMap<String, OutputRecord>,
}

impl Manifest {
    fn new() -> Self {
        Self {
            tool: "parley".into(),
            versions: versions(),
            runs: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Option<Self>> {
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(path)?;
        let m = serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("corrupt manifest {}: {e}", path.display())))?;
        Ok(Some(m))
    }
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("parley-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("parley-core".to_string(), parley::VERSION.to_string()),
    ])
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Lock(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Runtime(anyhow::anyhow!(
                "{} is in use by another run (delete {} if it is stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        if let Err(e) = fs::remove_file(&self.0) {
            warn!("could not remove lock {}: {e}", self.0.display());
        }
    }
}

/// A locked output (sub)directory whose writes are recorded in its manifest.
pub struct OutputDir {
    root: PathBuf,
    command: String,
    config_hash: String,
    config_path: Option<String>,
    seed: u64,
    started_at: String,
    written: BTreeMap<String, OutputRecord>,
    _lock: Lock,
}

impl OutputDir {
    pub fn open(root: &Path, command: &str, config_hash: &str, config_path: Option<&Path>, seed: u64) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let lock = Lock::acquire(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            command: command.into(),
            config_hash: config_hash.into(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            started_at: now(),
            written: BTreeMap::new(),
            _lock: lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `relative` under the root and records it.
    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.insert(
            relative.replace('\\', "/"),
            OutputRecord {
                command: self.command.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
                bytes: bytes.len() as u64,
                config_hash: self.config_hash.clone(),
            },
        );
        Ok(path)
    }

    pub fn written(&self) -> impl Iterator<Item = &str> {
        self.written.keys().map(String::as_str)
    }

    /// Merges this run into the manifest and releases the lock.
    pub fn finish(self) -> Result<Manifest> {
        let path = self.root.join(MANIFEST_FILE);
        let mut manifest = Manifest::load(&path)?.unwrap_or_else(Manifest::new);
        manifest.versions = versions();
        manifest.runs.push(RunRecord {
            command: self.command.clone(),
            config_path: self.config_path.clone(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            started_at: self.started_at.clone(),
            finished_at: now(),
            outputs: self.written.keys().cloned().collect(),
        });
        manifest.outputs.extend(self.written.clone());
        let text = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}
