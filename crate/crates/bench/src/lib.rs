//! Shared inputs for the benchmarks.

use std::path::Path;

use parley::embed::{load_table, EmbeddingTable};
use parley::synthkit::{generate, synthetic_table, SynthSpec};
use parley::Comment;

/// The default synthetic corpus (14 sessions, about 168k words) and its table.
pub fn synthetic() -> (Vec<Comment>, EmbeddingTable) {
    let spec = SynthSpec::default();
    let corpus = generate(&spec).expect("default spec is valid").comments;
    let table = synthetic_table(&spec, 50, 0.3).expect("default spec is valid");
    (corpus, table)
}

/// The 1,000-term published-embedding slice used by the core tests.
pub fn glove() -> EmbeddingTable {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/glove6b100d_top1000.txt");
    load_table(&path).expect("fixture present")
}
