//! Static word embeddings, document pooling and precomputed document vectors.

mod docvec;
mod pooling;
mod table;

use thiserror::Error;

pub use docvec::{load_doc_vectors, read_doc_vectors, DocVectorStore};
pub use pooling::{pool_text, DocBackend, MeanAccumulator, PoolingOptions};
pub use table::{load_table, read_table, write_table, EmbeddingTable, NeighborQuery, Neighbors};

use crate::corpus::CommentId;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("line {0}: malformed entry")]
    ParseError(usize),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("embedding table is empty or all vectors are zero")]
    Degenerate,
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("no vector stored for comment {0}")]
    MissingVector(CommentId),
    #[error("invalid neighbor query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity, computed as `u·v / sqrt(|u|²|v|²)` so that a vector
/// compared with itself gives exactly 1.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::LengthMismatch(u.len(), v.len()));
    }
    let nu = dot(u, u);
    let nv = dot(v, v);
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    Ok(cosine_with_norms(dot(u, v), nu, nv))
}

pub(crate) fn cosine_with_norms(uv: f64, nu2: f64, nv2: f64) -> f64 {
    (uv / (nu2 * nv2).sqrt()).clamp(-1.0, 1.0)
}
