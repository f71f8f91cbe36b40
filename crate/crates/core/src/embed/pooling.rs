use std::collections::HashSet;

use crate::corpus::{tokenize, Comment};
use crate::stopwords;

use super::{DocVectorStore, EmbedError, EmbeddingTable};

#[derive(Debug, Clone, PartialEq)]
pub struct PoolingOptions {
    pub remove_stopwords: bool,
    pub stopwords: HashSet<String>,
}

impl Default for PoolingOptions {
    fn default() -> Self {
        Self {
            remove_stopwords: true,
            stopwords: stopwords::english(),
        }
    }
}

impl PoolingOptions {
    pub fn keep_all() -> Self {
        Self {
            remove_stopwords: false,
            stopwords: HashSet::new(),
        }
    }

    fn skips(&self, token: &str) -> bool {
        self.remove_stopwords && self.stopwords.contains(token)
    }
}

/// Running weighted mean of vectors.
///
/// Updates are incremental (`m += (v - m) · w / W`), so averaging copies of one
/// vector returns that vector bit for bit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanAccumulator {
    mean: Vec<f64>,
    weight: f64,
    count: usize,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: &[f64]) {
        self.push_weighted(v, 1.0);
    }

    pub fn push_weighted(&mut self, v: &[f64], w: f64) {
        if w <= 0.0 {
            return;
        }
        if self.weight == 0.0 {
            self.mean = v.to_vec();
        } else {
            let total = self.weight + w;
            let f = w / total;
            for (m, x) in self.mean.iter_mut().zip(v) {
                *m += (x - *m) * f;
            }
        }
        self.weight += w;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.weight > 0.0 {
            let count = self.count + other.count;
            self.push_weighted(&other.mean, other.weight);
            self.count = count;
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Number of vectors pushed.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<&[f64]> {
        (self.weight > 0.0).then_some(self.mean.as_slice())
    }

    pub fn into_mean(self) -> Option<Vec<f64>> {
        (self.weight > 0.0).then_some(self.mean)
    }
}

fn accumulate_tokens<'a, I>(table: &EmbeddingTable, tokens: I, opts: &PoolingOptions, acc: &mut MeanAccumulator)
where
    I: IntoIterator<Item = &'a str>,
{
    for t in tokens {
        if opts.skips(t) {
            continue;
        }
        if let Some(v) = table.get(t) {
            acc.push(v);
        }
    }
}

/// Mean of the vectors of in-vocabulary, non-stopword tokens; `None` when
/// nothing survives.
pub fn pool_text<S: AsRef<str>>(table: &EmbeddingTable, tokens: &[S], opts: &PoolingOptions) -> Option<Vec<f64>> {
    let mut acc = MeanAccumulator::new();
    accumulate_tokens(table, tokens.iter().map(AsRef::as_ref), opts, &mut acc);
    acc.into_mean()
}

/// Source of document vectors for position computations.
#[derive(Debug, Clone, Copy)]
pub enum DocBackend<'a> {
    /// Mean of word vectors over every surviving token.
    StaticPooling {
        table: &'a EmbeddingTable,
        opts: &'a PoolingOptions,
    },
    /// Externally computed comment vectors, weighted by comment token count.
    Precomputed { store: &'a DocVectorStore },
}

impl DocBackend<'_> {
    /// Adds one comment's contribution to `acc`; returns the weight it added.
    pub fn accumulate(&self, comment: &Comment, acc: &mut MeanAccumulator) -> Result<f64, EmbedError> {
        let before = acc.weight();
        match self {
            DocBackend::StaticPooling { table, opts } => {
                let tokens = tokenize(&comment.text);
                accumulate_tokens(table, tokens.iter().map(String::as_str), opts, acc);
            }
            DocBackend::Precomputed { store } => {
                let v = store.get(comment.id)?;
                acc.push_weighted(v, comment.word_count() as f64);
            }
        }
        Ok(acc.weight() - before)
    }

    pub fn dimension(&self) -> usize {
        match self {
            DocBackend::StaticPooling { table, .. } => table.dimension(),
            DocBackend::Precomputed { store } => store.dimension(),
        }
    }
}
