use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use parley::activity::Period;
use parley::diag::{anisotropy, running_mean_similarity, sample_stream};
use parley::embed::{DocBackend, NeighborQuery, PoolingOptions};
use parley::issues_latent::{build_tfidf, fit_nmf, NmfParams, VocabConfig};
use parley::issues_query::{expand_catalog, tag_corpus, IssueCatalog, IssueSpec};
use parley::positions::{estimate_uncertainty, positions_for, UncertaintyParams};
use parley_bench::{glove, synthetic};

fn latent(c: &mut Criterion) {
    let (corpus, _) = synthetic();
    let vocab = VocabConfig::default();
    c.bench_function("tfidf/default_corpus", |b| {
        b.iter(|| build_tfidf(&corpus, &vocab).unwrap())
    });
    let dtm = build_tfidf(&corpus, &vocab).unwrap();
    let mut g = c.benchmark_group("nmf");
    g.sample_size(10);
    g.bench_function("k10/default_corpus", |b| {
        b.iter(|| fit_nmf(&dtm, &NmfParams::default()).unwrap())
    });
    g.finish();
}

fn query(c: &mut Criterion) {
    let table = glove();
    let q = NeighborQuery::default();
    c.bench_function("neighbors/glove1000", |b| {
        b.iter(|| table.neighbors("peace", &q).unwrap())
    });
    let (corpus, synth) = synthetic();
    let catalog = IssueCatalog::new(vec![
        IssueSpec {
            name: "security".into(),
            seeds: vec!["ceasefire".into(), "militia".into()],
        },
        IssueSpec {
            name: "economy".into(),
            seeds: vec!["currency".into()],
        },
    ])
    .unwrap();
    c.bench_function("tag/default_corpus", |b| {
        b.iter_batched(
            || expand_catalog(&catalog, &synth, &q, None).unwrap(),
            |expanded| tag_corpus(&corpus, &expanded),
            BatchSize::LargeInput,
        )
    });
}

fn positions(c: &mut Criterion) {
    let (corpus, table) = synthetic();
    let opts = PoolingOptions::default();
    let backend = DocBackend::StaticPooling {
        table: &table,
        opts: &opts,
    };
    let tagging = parley::Tagging {
        issues: vec!["all".into()],
        by_comment: corpus.iter().map(|c| (c.id, ["all".to_string()].into())).collect(),
    };
    let parties: Vec<String> = ["North", "South", "Coast", "Civic"].map(String::from).to_vec();
    let issues = vec!["all".to_string()];
    c.bench_function("positions/4_parties", |b| {
        b.iter(|| positions_for(&corpus, &tagging, &backend, &parties, &issues, Period::All).unwrap())
    });
    let params = UncertaintyParams::default();
    let mut g = c.benchmark_group("uncertainty");
    g.sample_size(10);
    g.bench_function("20_reps", |b| {
        b.iter(|| estimate_uncertainty(&corpus, &tagging, &backend, "North", "all", Period::All, &params).unwrap())
    });
    g.finish();
}

fn diagnostics(c: &mut Criterion) {
    let table = glove();
    c.bench_function("anisotropy/glove1000", |b| b.iter(|| anisotropy(&table)));
    let s1 = sample_stream(&table, 5000, 1.0, 1);
    let s2 = sample_stream(&table, 5000, 1.0, 2);
    c.bench_function("running_mean_similarity/5000", |b| {
        b.iter(|| running_mean_similarity(&table, &s1, &s2).unwrap())
    });
}

criterion_group!(benches, latent, query, positions, diagnostics);
criterion_main!(benches);
