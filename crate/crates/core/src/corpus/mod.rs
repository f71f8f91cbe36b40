//! Comment records, text normalization and the master CSV.

mod clean;
mod csv_io;
mod notes;

use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{clean_text, NormalizationConfig};
pub use csv_io::{export_csv, import_csv, read_csv, write_csv, write_csv_extended, CSV_HEADER};
pub use notes::{parse_notes, parse_sessions, ParseIssue, ParsedNotes};

/// Stable identifier of a comment, assigned in parse order.
pub type CommentId = u64;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid session metadata: {0}")]
    InvalidMeta(String),
    #[error("invalid normalization config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: continuation before any turn header")]
    MalformedTurn { line: usize },
    #[error("field `{field}` of comment {id} cannot be stored: {reason}")]
    InvalidField {
        id: CommentId,
        field: &'static str,
        reason: String,
    },
    #[error("csv row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SessionMeta {
    pub source_file: String,
    pub year: i32,
    pub month: u32,
}

impl SessionMeta {
    pub fn new(source_file: impl Into<String>, year: i32, month: u32) -> Result<Self, CorpusError> {
        let source_file = source_file.into();
        if source_file.is_empty() {
            return Err(CorpusError::InvalidMeta("empty source file name".into()));
        }
        if !(1000..=9999).contains(&year) {
            return Err(CorpusError::InvalidMeta(format!("year {year} is not 4-digit")));
        }
        if !(1..=12).contains(&month) {
            return Err(CorpusError::InvalidMeta(format!("month {month} out of range")));
        }
        Ok(Self {
            source_file,
            year,
            month,
        })
    }

    /// Derives metadata from the `YYYY-MM-*.txt` naming convention.
    pub fn from_filename(path: &Path) -> Result<Self, CorpusError> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CorpusError::InvalidMeta(format!("{}: no file name", path.display())))?;
        let bad = || CorpusError::InvalidMeta(format!("{name}: expected YYYY-MM-*.txt"));
        let mut parts = name.splitn(3, '-');
        let year = parts.next().filter(|y| y.len() == 4).ok_or_else(bad)?;
        let month = parts.next().filter(|m| m.len() == 2).ok_or_else(bad)?;
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = month.parse().map_err(|_| bad())?;
        Self::new(name, year, month)
    }
}

/// One participant utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: CommentId,
    pub text: String,
    pub meta: SessionMeta,
    pub participant: String,
    pub organisation: String,
    /// Non-empty only for shared statements; contains `organisation`.
    pub multi_organisations: Vec<String>,
}

impl Comment {
    pub fn is_shared(&self) -> bool {
        !self.multi_organisations.is_empty()
    }

    /// Organisations this comment speaks for.
    pub fn parties(&self) -> impl Iterator<Item = &str> {
        let single = if self.multi_organisations.is_empty() {
            Some(self.organisation.as_str())
        } else {
            None
        };
        single
            .into_iter()
            .chain(self.multi_organisations.iter().map(String::as_str))
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }

    pub fn word_count(&self) -> usize {
        token_spans(&self.text).count()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn token_spans(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !is_word_char(c))
        .filter(|t| t.chars().nth(1).is_some())
}

/// Lowercased runs of letters, digits or `_` of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text).map(str::to_lowercase).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterCriteria {
    pub participants: Option<BTreeSet<String>>,
    pub organisations: Option<BTreeSet<String>>,
    pub years: Option<RangeInclusive<i32>>,
    pub months: Option<RangeInclusive<u32>>,
    #[serde(default)]
    pub exclude_multi_party: bool,
}

impl FilterCriteria {
    pub fn matches(&self, c: &Comment) -> bool {
        if self.exclude_multi_party && c.is_shared() {
            return false;
        }
        if let Some(ps) = &self.participants {
            if !ps.contains(&c.participant) {
                return false;
            }
        }
        if let Some(orgs) = &self.organisations {
            if !c.parties().any(|p| orgs.contains(p)) {
                return false;
            }
        }
        if let Some(ys) = &self.years {
            if !ys.contains(&c.meta.year) {
                return false;
            }
        }
        if let Some(ms) = &self.months {
            if !ms.contains(&c.meta.month) {
                return false;
            }
        }
        true
    }
}

/// Order-preserving subset of `corpus` matching every given criterion.
pub fn filter_comments(corpus: &[Comment], criteria: &FilterCriteria) -> Vec<Comment> {
    corpus.iter().filter(|c| criteria.matches(c)).cloned().collect()
}
