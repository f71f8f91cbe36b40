//! Latent issues: NMF over a TF-IDF document-term matrix.
//!
//! The pipeline is [`build_tfidf`] → [`nndsvd_init`] → [`fit_nmf`] (cyclic
//! HALS coordinate descent on the elastic-net regularized Frobenius
//! objective), followed by keyword, assignment and overlap summaries.

mod nmf;
mod sparse;
mod svd;
mod tfidf;
mod topics;

use thiserror::Error;

pub use nmf::{fit_nmf, fit_nmf_observed, nndsvd_init, objective, NmfFit, NmfParams, TopicModel};
pub use sparse::CsrMatrix;
pub use svd::{truncated_svd, TruncatedSvd};
pub use tfidf::{build_tfidf, DocTermMatrix, VocabConfig};
pub use topics::{
    assign_topics, latent_activity, representative_comments, topic_keywords, topic_label, topic_overlap, topic_tagging,
    Assignments,
};

#[derive(Debug, Error)]
pub enum LatentError {
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("rank {k} exceeds min(n_docs, n_terms) = {max}")]
    RankTooLarge { k: usize, max: usize },
}
