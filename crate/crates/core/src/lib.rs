//! Analytics for multi-party dialogue notes.
//!
//! The crate turns structured session notes into [`corpus::Comment`] records and
//! runs three analyses over them:
//!
//! * predefined-issue tagging by embedding query expansion ([`issues_query`]),
//! * latent-issue extraction with regularized NMF over TF-IDF ([`issues_latent`]),
//! * party-position distances over pooled document vectors ([`positions`]),
//!
//! plus embedding-space diagnostics ([`diag`]) and a synthetic corpus
//! generator with planted structure ([`synthkit`]).

pub mod activity;
pub mod config;
pub mod corpus;
pub mod diag;
pub mod embed;
pub mod issues_latent;
pub mod issues_query;
pub mod positions;
pub mod stopwords;
pub mod synthkit;

pub use activity::{ActivityRow, GroupBy, Period, Tagging};
pub use config::RunConfig;
pub use corpus::{Comment, CommentId, NormalizationConfig, SessionMeta};
pub use embed::{cosine, DocBackend, DocVectorStore, EmbeddingTable, PoolingOptions};
pub use issues_latent::{DocTermMatrix, NmfParams, TopicModel, VocabConfig};
pub use issues_query::{ExpandedCatalog, IssueCatalog, TaggedCorpus};
pub use positions::{DistanceProfile, HeatmapReport, PartyPosition, UncertaintyMargin};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
