use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;

use crate::corpus::{tokenize, Comment, CommentId};
use crate::stopwords;

use super::{CsrMatrix, LatentError};

#[derive(Debug, Clone, PartialEq)]
pub struct VocabConfig {
    pub max_features: usize,
    /// Terms in more than `max_df · n_docs` documents are dropped.
    pub max_df: f64,
    pub stopwords: HashSet<String>,
    /// When set, only these terms are kept (e.g. a noun lexicon).
    pub allow_list: Option<HashSet<String>>,
    pub deny_list: Option<HashSet<String>>,
}

impl Default for VocabConfig {
    fn default() -> Self {
        Self {
            max_features: 10_000,
            max_df: 0.9,
            stopwords: stopwords::english(),
            allow_list: None,
            deny_list: None,
        }
    }
}

impl VocabConfig {
    pub fn validate(&self) -> Result<(), LatentError> {
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return Err(LatentError::InvalidParams(format!(
                "max_df {} not in (0, 1]",
                self.max_df
            )));
        }
        if self.max_features == 0 {
            return Err(LatentError::InvalidParams("max_features must be ≥ 1".into()));
        }
        Ok(())
    }

    fn keeps(&self, term: &str) -> bool {
        !self.stopwords.contains(term)
            && !self.deny_list.as_ref().is_some_and(|d| d.contains(term))
            && self.allow_list.as_ref().is_none_or(|a| a.contains(term))
    }
}

/// Row-normalized TF-IDF weights, one row per comment.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub doc_ids: Vec<CommentId>,
    /// Sorted vocabulary; column `j` is `vocab[j]`.
    pub vocab: Vec<String>,
    pub idf: Vec<f64>,
    pub matrix: CsrMatrix,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.vocab.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

/// Builds the document-term matrix.
///
/// `weight(d, t) = tf(d, t) · (ln((1 + n) / (1 + df(t))) + 1)` with raw counts
/// as tf, then each row is scaled to unit L2 norm. When more than
/// `max_features` terms survive filtering, the most frequent ones are kept
/// (ties by term).
pub fn build_tfidf(corpus: &[Comment], cfg: &VocabConfig) -> Result<DocTermMatrix, LatentError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(LatentError::EmptyCorpus);
    }
    let n_docs = corpus.len();
    let counts: Vec<BTreeMap<String, usize>> = corpus
        .iter()
        .map(|c| {
            let mut m = BTreeMap::new();
            for t in tokenize(&c.text).into_iter().filter(|t| cfg.keeps(t)) {
                *m.entry(t).or_insert(0) += 1;
            }
            m
        })
        .collect();

    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut total: HashMap<&str, usize> = HashMap::new();
    for doc in &counts {
        for (t, &n) in doc {
            *df.entry(t).or_default() += 1;
            *total.entry(t).or_default() += n;
        }
    }
    let max_doc_count = cfg.max_df * n_docs as f64;
    let mut kept: Vec<&str> = df
        .iter()
        .filter(|(_, &d)| d as f64 <= max_doc_count)
        .map(|(&t, _)| t)
        .collect();
    if kept.len() > cfg.max_features {
        kept.sort_by(|a, b| total[b].cmp(&total[a]).then_with(|| a.cmp(b)));
        kept.truncate(cfg.max_features);
    }
    if kept.is_empty() {
        return Err(LatentError::EmptyVocabulary);
    }
    kept.sort_unstable();
    let column: HashMap<&str, usize> = kept.iter().enumerate().map(|(j, &t)| (t, j)).collect();
    let idf: Vec<f64> = kept
        .iter()
        .map(|t| ((1.0 + n_docs as f64) / (1.0 + df[t] as f64)).ln() + 1.0)
        .collect();

    let mut zero_rows = 0;
    let rows: Vec<Vec<(usize, f64)>> = counts
        .iter()
        .map(|doc| {
            let mut row: Vec<(usize, f64)> = doc
                .iter()
                .filter_map(|(t, &n)| column.get(t.as_str()).map(|&j| (j, n as f64 * idf[j])))
                .collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|(_, v)| *v /= norm);
            } else {
                zero_rows += 1;
            }
            row
        })
        .collect();
    if zero_rows > 0 {
        warn!("{zero_rows} comment(s) have no vocabulary terms; their TF-IDF rows are zero");
    }
    Ok(DocTermMatrix {
        doc_ids: corpus.iter().map(|c| c.id).collect(),
        vocab: kept.into_iter().map(str::to_string).collect(),
        idf,
        matrix: CsrMatrix::from_rows(column.len(), rows),
    })
}
