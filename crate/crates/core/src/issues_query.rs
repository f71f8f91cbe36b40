//! Predefined-issue tagging by embedding query expansion.
//!
//! Each issue starts from a handful of seed keywords. Every seed is expanded
//! with its embedding neighbors (cosine ≥ 0.4, raised to 0.6 when a seed has
//! more than 1000 neighbors), optionally restricted to words that occur in the
//! corpus. A comment is tagged with every issue whose seed ∪ expansion set
//! shares at least one token with it.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{activity, ActivityRow, GroupBy, Tagging};
use crate::corpus::{tokenize, Comment, CommentId};
use crate::embed::{EmbedError, EmbeddingTable, NeighborQuery};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("issue catalog is empty")]
    EmptyCatalog,
    #[error("issue `{0}` appears more than once")]
    DuplicateIssue(String),
    #[error("issue `{0}` has no seed keywords")]
    NoSeeds(String),
    #[error("seed `{seed}` of issue `{issue}` is not a single token")]
    InvalidSeed { issue: String, seed: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueSpec {
    pub name: String,
    pub seeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueCatalog {
    pub issues: Vec<IssueSpec>,
}

impl IssueCatalog {
    pub fn new(issues: Vec<IssueSpec>) -> Result<Self, QueryError> {
        let cat = Self { issues };
        cat.validate()?;
        Ok(cat)
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.issues.is_empty() {
            return Err(QueryError::EmptyCatalog);
        }
        let mut seen = HashSet::new();
        for issue in &self.issues {
            if !seen.insert(issue.name.as_str()) {
                return Err(QueryError::DuplicateIssue(issue.name.clone()));
            }
            if issue.seeds.is_empty() {
                return Err(QueryError::NoSeeds(issue.name.clone()));
            }
            for s in &issue.seeds {
                if tokenize(s) != [s.to_lowercase()] {
                    return Err(QueryError::InvalidSeed {
                        issue: issue.name.clone(),
                        seed: s.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandedTerm {
    pub term: String,
    pub similarity: f64,
    pub source_seed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandedIssue {
    pub name: String,
    /// Lowercased seeds, all kept for literal matching.
    pub seeds: Vec<String>,
    pub expanded: Vec<ExpandedTerm>,
    /// Seeds missing from the embedding table.
    pub oov_seeds: Vec<String>,
    /// Seeds whose neighbor count exceeded the cap.
    pub raised_seeds: Vec<String>,
}

impl ExpandedIssue {
    pub fn terms(&self) -> BTreeSet<&str> {
        self.seeds
            .iter()
            .map(String::as_str)
            .chain(self.expanded.iter().map(|e| e.term.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandedCatalog {
    pub issues: Vec<ExpandedIssue>,
}

impl ExpandedCatalog {
    /// One pseudo-issue per seed, named `issue [seed]`. Used to inspect how
    /// individual search terms behave.
    pub fn split_per_seed(&self) -> ExpandedCatalog {
        let mut issues = Vec::new();
        for issue in &self.issues {
            for seed in &issue.seeds {
                issues.push(ExpandedIssue {
                    name: format!("{} [{}]", issue.name, seed),
                    seeds: vec![seed.clone()],
                    expanded: issue
                        .expanded
                        .iter()
                        .filter(|e| &e.source_seed == seed)
                        .cloned()
                        .collect(),
                    oov_seeds: issue.oov_seeds.iter().filter(|s| *s == seed).cloned().collect(),
                    raised_seeds: issue.raised_seeds.iter().filter(|s| *s == seed).cloned().collect(),
                });
            }
        }
        ExpandedCatalog { issues }
    }
}

/// Words occurring in a corpus, for restricting expansions.
pub fn corpus_vocabulary(corpus: &[Comment]) -> HashSet<String> {
    corpus.iter().flat_map(|c| tokenize(&c.text)).collect()
}

/// Expands every seed with its embedding neighbors.
///
/// The dynamic threshold is decided on the table-wide neighbor count; the
/// optional `vocabulary` restriction is applied afterwards. A term reached
/// from several seeds keeps its highest similarity.
pub fn expand_catalog(
    catalog: &IssueCatalog,
    table: &EmbeddingTable,
    query: &NeighborQuery,
    vocabulary: Option<&HashSet<String>>,
) -> Result<ExpandedCatalog, QueryError> {
    catalog.validate()?;
    query.validate()?;
    let mut issues = Vec::with_capacity(catalog.issues.len());
    for spec in &catalog.issues {
        let seeds: Vec<String> = spec.seeds.iter().map(|s| s.to_lowercase()).collect();
        let seed_set: HashSet<&str> = seeds.iter().map(String::as_str).collect();
        let mut best: BTreeMap<String, ExpandedTerm> = BTreeMap::new();
        let mut oov = Vec::new();
        let mut raised = Vec::new();
        for seed in &seeds {
            let found = match table.neighbors(seed, query) {
                Ok(n) => n,
                Err(EmbedError::UnknownTerm(_)) | Err(EmbedError::ZeroVector) => {
                    warn!(
                        "seed `{seed}` of issue `{}` is not in the embedding table; matching it literally",
                        spec.name
                    );
                    oov.push(seed.clone());
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            if found.raised {
                raised.push(seed.clone());
            }
            for (term, sim) in found.hits {
                if seed_set.contains(term.as_str()) {
                    continue;
                }
                if vocabulary.is_some_and(|v| !v.contains(&term)) {
                    continue;
                }
                let better = best.get(&term).is_none_or(|e| sim > e.similarity);
                if better {
                    best.insert(
                        term.clone(),
                        ExpandedTerm {
                            term,
                            similarity: sim,
                            source_seed: seed.clone(),
                        },
                    );
                }
            }
        }
        let mut expanded: Vec<ExpandedTerm> = best.into_values().collect();
        expanded.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.term.cmp(&b.term)));
        issues.push(ExpandedIssue {
            name: spec.name.clone(),
            seeds,
            expanded,
            oov_seeds: oov,
            raised_seeds: raised,
        });
    }
    Ok(ExpandedCatalog { issues })
}

/// Corpus with multi-label issue tags and the terms that triggered them.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedCorpus {
    pub corpus: Vec<Comment>,
    pub tagging: Tagging,
    pub evidence: BTreeMap<CommentId, BTreeMap<String, Vec<String>>>,
}

impl TaggedCorpus {
    pub fn tags(&self, id: CommentId) -> BTreeSet<&str> {
        self.tagging.labels(id).collect()
    }
}

pub fn tag_corpus(corpus: &[Comment], expanded: &ExpandedCatalog) -> TaggedCorpus {
    let term_sets: Vec<(&str, BTreeSet<&str>)> = expanded.issues.iter().map(|i| (i.name.as_str(), i.terms())).collect();
    let mut by_comment = BTreeMap::new();
    let mut evidence = BTreeMap::new();
    for c in corpus {
        let tokens: BTreeSet<String> = tokenize(&c.text).into_iter().collect();
        let mut tags = BTreeSet::new();
        let mut ev = BTreeMap::new();
        for (name, terms) in &term_sets {
            let hits: Vec<String> = tokens.iter().filter(|t| terms.contains(t.as_str())).cloned().collect();
            if !hits.is_empty() {
                tags.insert(name.to_string());
                ev.insert(name.to_string(), hits);
            }
        }
        by_comment.insert(c.id, tags);
        evidence.insert(c.id, ev);
    }
    TaggedCorpus {
        corpus: corpus.to_vec(),
        tagging: Tagging {
            issues: expanded.issues.iter().map(|i| i.name.clone()).collect(),
            by_comment,
        },
        evidence,
    }
}

pub fn issue_activity(tagged: &TaggedCorpus, group_by: GroupBy) -> Vec<ActivityRow> {
    activity(&tagged.corpus, &tagged.tagging, group_by)
}
