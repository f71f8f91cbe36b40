//! Run configuration shared by every pipeline stage.
//!
//! All fields have defaults, so an empty file is a valid configuration that
//! runs the whole pipeline on the bundled synthetic generator.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::GroupBy;
use crate::corpus::{FilterCriteria, NormalizationConfig};
use crate::embed::{NeighborQuery, PoolingOptions};
use crate::issues_latent::{NmfParams, VocabConfig};
use crate::issues_query::{IssueCatalog, IssueSpec};
use crate::positions::{ReferenceMode, UncertaintyParams};
use crate::stopwords;
use crate::synthkit::SynthSpec;

/// A rejected setting, named by its dotted path.
#[derive(Debug, Error, PartialEq)]
#[error("config `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Directory of `YYYY-MM-*.txt` note files. Defaults to `<out>/synthetic/notes`.
    pub notes_dir: Option<PathBuf>,
    /// Static embedding table. Defaults to `<out>/synthetic/embeddings.txt`.
    pub embedding_table: Option<PathBuf>,
    /// Precomputed document vectors (`id,v0,v1,…`); switches the position backend.
    pub doc_vectors: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// One stopword per line; replaces the built-in English list.
    pub stopwords: Option<PathBuf>,
    /// Two token files for the running-mean comparison; sampled from the table when absent.
    pub diag_streams: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub min_sim: f64,
    pub raise_to: f64,
    pub cap: usize,
    /// Keep only expansion terms that occur in the corpus.
    pub restrict_to_corpus: bool,
    /// Report every seed as its own issue.
    pub per_seed: bool,
}

impl Default for QueryConfig {
    fn default() -> Self {
        let q = NeighborQuery::default();
        Self {
            min_sim: q.min_sim,
            raise_to: q.raise_to,
            cap: q.cap,
            restrict_to_corpus: true,
            per_seed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    pub k: usize,
    pub alpha: f64,
    pub l1_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub membership_threshold: f64,
    pub max_features: usize,
    pub max_df: f64,
    pub n_keywords: usize,
    pub n_representatives: usize,
    pub allow_list: Option<Vec<String>>,
    pub deny_list: Option<Vec<String>>,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        let p = NmfParams::default();
        let v = VocabConfig::default();
        Self {
            k: p.k,
            alpha: p.alpha,
            l1_ratio: p.l1_ratio,
            tol: p.tol,
            max_iter: p.max_iter,
            membership_threshold: p.membership_threshold,
            max_features: v.max_features,
            max_df: v.max_df,
            n_keywords: 10,
            n_representatives: 10,
            allow_list: None,
            deny_list: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositionsConfig {
    /// Parties of interest; empty means every organisation in the corpus.
    pub parties: Vec<String>,
    /// Compare against this party instead of the average.
    pub baseline: Option<String>,
    pub group_by: GroupBy,
    /// Drop stopwords before pooling word vectors.
    pub remove_stopwords: bool,
}

impl Default for PositionsConfig {
    fn default() -> Self {
        Self {
            parties: Vec::new(),
            baseline: None,
            group_by: GroupBy::Year,
            remove_stopwords: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub fraction: f64,
    pub reps: usize,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        let u = UncertaintyParams::default();
        Self {
            fraction: u.fraction,
            reps: u.reps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagConfig {
    pub remove_stopwords: bool,
    /// Tokens per sampled stream when no stream files are given.
    pub stream_length: usize,
    pub zipf_exponent: f64,
    /// Also write every component trajectory, not just max/min.
    pub all_components: bool,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self {
            remove_stopwords: false,
            stream_length: 5000,
            zipf_exponent: 1.0,
            all_components: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthTableConfig {
    pub dimension: usize,
    pub noise: f64,
}

impl Default for SynthTableConfig {
    fn default() -> Self {
        Self {
            dimension: 50,
            noise: 0.3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlagsConfig {
    pub exclude_multi_party: bool,
    pub emit_svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Drives the generator and the resampling in uncertainty estimates.
    pub seed: u64,
    pub paths: PathsConfig,
    pub normalization: NormalizationConfig,
    /// Issue catalog; when empty, one issue per synthetic topic seeded by its first word.
    pub issues: Vec<IssueSpec>,
    pub query: QueryConfig,
    pub topics: TopicsConfig,
    pub positions: PositionsConfig,
    pub uncertainty: UncertaintyConfig,
    pub diag: DiagConfig,
    pub filter: FilterCriteria,
    pub flags: FlagsConfig,
    pub synth: SynthSpec,
    pub synth_table: SynthTableConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            paths: PathsConfig::default(),
            normalization: NormalizationConfig::default(),
            issues: Vec::new(),
            query: QueryConfig::default(),
            topics: TopicsConfig::default(),
            positions: PositionsConfig::default(),
            uncertainty: UncertaintyConfig::default(),
            diag: DiagConfig::default(),
            filter: FilterCriteria::default(),
            flags: FlagsConfig::default(),
            synth: SynthSpec::default(),
            synth_table: SynthTableConfig::default(),
        }
    }
}

fn in_unit(field: &str, x: f64, lo_open: bool) -> Result<(), ConfigError> {
    let ok = x <= 1.0 && if lo_open { x > 0.0 } else { x >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{x} out of range")))
    }
}

impl RunConfig {
    /// Checks every range before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.normalization
            .validate()
            .map_err(|e| ConfigError::new("normalization", e))?;
        self.neighbor_query()
            .validate()
            .map_err(|e| ConfigError::new("query", e))?;
        if !self.issues.is_empty() {
            self.catalog().validate().map_err(|e| ConfigError::new("issues", e))?;
        }
        let t = &self.topics;
        if t.k < 2 {
            return Err(ConfigError::new("topics.k", "must be ≥ 2"));
        }
        if !(t.alpha >= 0.0 && t.alpha.is_finite()) {
            return Err(ConfigError::new("topics.alpha", "must be ≥ 0"));
        }
        in_unit("topics.l1_ratio", t.l1_ratio, false)?;
        if t.tol.is_nan() || t.tol <= 0.0 {
            return Err(ConfigError::new("topics.tol", "must be > 0"));
        }
        if t.max_iter == 0 {
            return Err(ConfigError::new("topics.max_iter", "must be ≥ 1"));
        }
        in_unit("topics.membership_threshold", t.membership_threshold, true)?;
        if t.max_features == 0 {
            return Err(ConfigError::new("topics.max_features", "must be ≥ 1"));
        }
        in_unit("topics.max_df", t.max_df, true)?;
        if t.n_keywords == 0 {
            return Err(ConfigError::new("topics.n_keywords", "must be ≥ 1"));
        }
        if t.n_representatives == 0 {
            return Err(ConfigError::new("topics.n_representatives", "must be ≥ 1"));
        }
        self.uncertainty_params()
            .validate()
            .map_err(|e| ConfigError::new("uncertainty", e))?;
        if self.diag.stream_length == 0 {
            return Err(ConfigError::new("diag.stream_length", "must be ≥ 1"));
        }
        if self.diag.zipf_exponent.is_nan() || self.diag.zipf_exponent < 0.0 {
            return Err(ConfigError::new("diag.zipf_exponent", "must be ≥ 0"));
        }
        if !self.paths.diag_streams.is_empty() && self.paths.diag_streams.len() != 2 {
            return Err(ConfigError::new("paths.diag_streams", "give exactly two files"));
        }
        self.synth_spec().validate().map_err(|e| ConfigError::new("synth", e))?;
        if self.synth_table.dimension < 2 {
            return Err(ConfigError::new("synth_table.dimension", "must be ≥ 2"));
        }
        if self.synth_table.noise.is_nan() || self.synth_table.noise < 0.0 {
            return Err(ConfigError::new("synth_table.noise", "must be ≥ 0"));
        }
        Ok(())
    }

    pub fn neighbor_query(&self) -> NeighborQuery {
        NeighborQuery {
            min_sim: self.query.min_sim,
            raise_to: self.query.raise_to,
            cap: self.query.cap,
        }
    }

    /// The configured catalog, or one issue per synthetic topic.
    pub fn catalog(&self) -> IssueCatalog {
        let issues = if self.issues.is_empty() {
            self.synth
                .topics
                .iter()
                .map(|t| IssueSpec {
                    name: t.label.clone(),
                    seeds: t.words.iter().take(1).cloned().collect(),
                })
                .collect()
        } else {
            self.issues.clone()
        };
        IssueCatalog { issues }
    }

    pub fn nmf_params(&self) -> NmfParams {
        let t = &self.topics;
        NmfParams {
            k: t.k,
            alpha: t.alpha,
            l1_ratio: t.l1_ratio,
            tol: t.tol,
            max_iter: t.max_iter,
            membership_threshold: t.membership_threshold,
        }
    }

    pub fn vocab_config(&self, stopwords: HashSet<String>) -> VocabConfig {
        let set = |l: &Option<Vec<String>>| l.as_ref().map(|v| v.iter().cloned().collect());
        VocabConfig {
            max_features: self.topics.max_features,
            max_df: self.topics.max_df,
            stopwords,
            allow_list: set(&self.topics.allow_list),
            deny_list: set(&self.topics.deny_list),
        }
    }

    pub fn pooling(&self, stopwords: HashSet<String>) -> PoolingOptions {
        if self.positions.remove_stopwords {
            PoolingOptions {
                remove_stopwords: true,
                stopwords,
            }
        } else {
            PoolingOptions::keep_all()
        }
    }

    pub fn reference_mode(&self) -> ReferenceMode {
        match &self.positions.baseline {
            Some(p) => ReferenceMode::Baseline(p.clone()),
            None => ReferenceMode::Average,
        }
    }

    pub fn uncertainty_params(&self) -> UncertaintyParams {
        UncertaintyParams {
            fraction: self.uncertainty.fraction,
            reps: self.uncertainty.reps,
            seed: self.seed,
        }
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            seed: self.seed,
            ..self.synth.clone()
        }
    }

    pub fn filter_criteria(&self) -> FilterCriteria {
        FilterCriteria {
            exclude_multi_party: self.filter.exclude_multi_party || self.flags.exclude_multi_party,
            ..self.filter.clone()
        }
    }

    pub fn default_stopwords() -> HashSet<String> {
        stopwords::english()
    }
}
