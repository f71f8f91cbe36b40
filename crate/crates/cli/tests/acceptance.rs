//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parley::activity::{Period, Tagging};
use parley::corpus::{parse_sessions, read_csv, write_csv, Comment, NormalizationConfig, SessionMeta};
use parley::diag::{anisotropy, running_mean, running_mean_similarity, sample_stream, trend_slope};
use parley::embed::{cosine, load_table, DocBackend, EmbeddingTable, NeighborQuery, PoolingOptions};
use parley::issues_latent::{
    assign_topics, build_tfidf, fit_nmf, fit_nmf_observed, nndsvd_init, objective, topic_keywords, CsrMatrix,
    NmfParams, VocabConfig,
};
use parley::issues_query::{
    expand_catalog, tag_corpus, ExpandedCatalog, ExpandedIssue, ExpandedTerm, IssueCatalog, IssueSpec,
};
use parley::positions::{
    distance_profile, estimate_uncertainty, pairwise_heatmap, party_position, reference_position, PartyPosition,
    ReferenceMode, UncertaintyParams,
};
use parley::synthkit::{generate, render_sessions, synthetic_table, SynthParty, SynthSession, SynthSpec, SynthTopic};
use parley::RunConfig;
use parley_cli::{run, Cli};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn glove() -> EmbeddingTable {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/glove6b100d_top1000.txt");
    load_table(&path).expect("embedding fixture")
}

fn meta(year: i32, month: u32) -> SessionMeta {
    SessionMeta::new(format!("{year}-{month:02}-s.txt"), year, month).unwrap()
}

fn comment(id: u64, text: &str, party: &str, year: i32, month: u32) -> Comment {
    Comment {
        id,
        text: text.into(),
        meta: meta(year, month),
        participant: format!("{party}-speaker"),
        organisation: party.into(),
        multi_organisations: vec![],
    }
}

fn tag_all(corpus: &[Comment], issue: &str) -> Tagging {
    Tagging {
        issues: vec![issue.into()],
        by_comment: corpus
            .iter()
            .map(|c| (c.id, BTreeSet::from([issue.to_string()])))
            .collect(),
    }
}

fn position(party: &str, v: Vec<f64>) -> PartyPosition {
    PartyPosition {
        party: party.into(),
        issue: "I".into(),
        period: Period::All,
        vector: Some(v),
        word_count: 1,
        comment_count: 1,
    }
}

fn two_pools(seed: u64, n_comments: usize, bias_a: f64) -> SynthSpec {
    let pool = |p: &str| {
        (0..20)
            .map(|i| format!("{p}{}", (b'a' + i) as char))
            .collect::<Vec<_>>()
    };
    let row = |w: f64| BTreeMap::from([("t0".to_string(), w), ("t1".to_string(), 1.0 - w)]);
    SynthSpec {
        seed,
        parties: vec![
            SynthParty {
                participant: "Ann".into(),
                organisation: "A".into(),
            },
            SynthParty {
                participant: "Ben".into(),
                organisation: "B".into(),
            },
        ],
        sessions: vec![SynthSession {
            year: 2019,
            month: 1,
            n_comments,
        }],
        topics: vec![
            SynthTopic {
                label: "t0".into(),
                words: pool("harbour"),
            },
            SynthTopic {
                label: "t1".into(),
                words: pool("ledger"),
            },
        ],
        party_topic_bias: BTreeMap::from([("A".to_string(), row(bias_a)), ("B".to_string(), row(0.5))]),
        comment_length_range: (8, 25),
        common_words: vec![],
        common_rate: 0.0,
        shared_fraction: 0.0,
    }
}

fn parameter_conformance() -> Outcome {
    let c = RunConfig::default();
    let from_empty: RunConfig = toml::from_str("").map_err(|e| e.to_string())?;
    ensure!(from_empty == c, "an empty config file does not yield the defaults");
    let q = c.neighbor_query();
    ensure!(q.min_sim == 0.4 && q.raise_to == 0.6 && q.cap == 1000, "query {q:?}");
    let t = &c.topics;
    ensure!(
        t.alpha == 0.1 && t.l1_ratio == 0.5 && t.tol == 1e-4,
        "penalty/tol {t:?}"
    );
    ensure!(
        t.max_iter == 200 && t.max_features == 10_000 && t.max_df == 0.9,
        "limits {t:?}"
    );
    ensure!(t.membership_threshold == 0.1, "membership {}", t.membership_threshold);
    ensure!(
        t.n_keywords == 10 && t.n_representatives == 10,
        "keywords/representatives {t:?}"
    );
    let u = c.uncertainty_params();
    ensure!(u.fraction == 0.10 && u.reps == 20, "uncertainty {u:?}");
    let p = c.nmf_params();
    ensure!(
        p.alpha == 0.1 && p.l1_ratio == 0.5 && p.membership_threshold == 0.1,
        "nmf params {p:?}"
    );
    Ok("query 0.4/0.6/1000, NMF 0.1/0.5/1e-4/10000/0.9/0.1, 10+10, fraction 0.10".into())
}

fn tfidf_oracle() -> Outcome {
    let docs = ["peace peace war", "war talks", "talks"];
    let corpus: Vec<Comment> = docs
        .iter()
        .enumerate()
        .map(|(i, t)| comment(i as u64, t, "A", 2019, 1))
        .collect();
    let dtm = build_tfidf(&corpus, &VocabConfig::default()).map_err(|e| e.to_string())?;
    // Independent oracle: smoothed idf, raw counts, unit rows.
    let n = docs.len() as f64;
    let idf = |df: f64| ((1.0 + n) / (1.0 + df)).ln() + 1.0;
    let vocab = ["peace", "talks", "war"];
    let df = [1.0, 2.0, 2.0];
    let counts = [[2.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0]];
    ensure!(dtm.vocab == vocab, "vocab {:?}", dtm.vocab);
    let mut worst = 0.0f64;
    for (d, row) in counts.iter().enumerate() {
        let raw: Vec<f64> = row.iter().zip(df).map(|(c, f)| c * idf(f)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (j, x) in raw.iter().enumerate() {
            worst = worst.max((dtm.matrix.get(d, j) - x / norm).abs());
        }
    }
    ensure!(worst <= 1e-5, "max cell error {worst}");
    let col = |t: &str| dtm.column(t).unwrap();
    let published = [
        ((dtm.idf[col("peace")]), 1.69315),
        ((dtm.idf[col("war")]), 1.28768),
        ((dtm.idf[col("talks")]), 1.28768),
        ((dtm.matrix.get(0, col("peace"))), 0.93470),
        ((dtm.matrix.get(0, col("war"))), 0.35544),
        ((dtm.matrix.get(0, col("talks"))), 0.0),
    ];
    for (got, want) in published {
        ensure!((got - want).abs() <= 1e-5, "{got} vs {want}");
    }
    Ok(format!("max cell error {worst:.1e}"))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| {
        if rng.random::<f64>() < density {
            rng.random::<f64>()
        } else {
            0.0
        }
    })
}

fn nmf_correctness() -> Outcome {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (rng.random_range(5..30), rng.random_range(5..30));
        let x = CsrMatrix::from_dense(&random_matrix(&mut rng, n, m, 0.4));
        let k = rng.random_range(2..=n.min(m).min(6));
        let params = NmfParams {
            k,
            alpha: [0.0, 0.01, 0.1][seed as usize % 3],
            l1_ratio: rng.random::<f64>(),
            tol: 1e-12,
            max_iter: 60,
            ..Default::default()
        };
        let (w0, h0) = nndsvd_init(&x, k).map_err(|e| e.to_string())?;
        ensure!(
            w0.iter().chain(h0.iter()).all(|&v| v >= 0.0),
            "seed {seed}: negative init"
        );
        let mut last = objective(&x, &w0, &h0, params.alpha, params.l1_ratio);
        let mut violation = None;
        fit_nmf_observed(&x, &params, w0, h0, |it, w, h| {
            let f = objective(&x, w, h, params.alpha, params.l1_ratio);
            if violation.is_none() && (w.iter().chain(h.iter()).any(|&v| v < 0.0) || f > last + 1e-10) {
                violation = Some(format!("seed {seed} sweep {it}: objective {f} after {last}"));
            }
            last = f;
        })
        .map_err(|e| e.to_string())?;
        if let Some(v) = violation {
            return Err(v);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let planted = random_matrix(&mut rng, 30, 3, 1.0).dot(&random_matrix(&mut rng, 3, 20, 0.6));
    let x = CsrMatrix::from_dense(&planted);
    let params = NmfParams {
        k: 3,
        alpha: 0.0,
        tol: 1e-16,
        max_iter: 20_000,
        ..Default::default()
    };
    let (w0, h0) = nndsvd_init(&x, 3).map_err(|e| e.to_string())?;
    let fit = fit_nmf_observed(&x, &params, w0, h0, |_, _, _| {}).map_err(|e| e.to_string())?;
    let rel = (&fit.w.dot(&fit.h) - &planted).mapv(|v| v * v).sum().sqrt() / planted.mapv(|v| v * v).sum().sqrt();
    ensure!(rel <= 1e-6, "planted relative error {rel}");

    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let u: Vec<f64> = (0..rng.random_range(2..12))
            .map(|_| rng.random_range(0.0..3.0))
            .collect();
        let v: Vec<f64> = (0..rng.random_range(2..12))
            .map(|_| rng.random_range(0.0..3.0))
            .collect();
        let a = Array2::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j]);
        let (w, h) = nndsvd_init(&CsrMatrix::from_dense(&a), 1).map_err(|e| e.to_string())?;
        worst = worst.max((&w.dot(&h) - &a).iter().fold(0.0f64, |m, d| m.max(d.abs())));
    }
    let (w, h) =
        nndsvd_init(&CsrMatrix::from_dense(&ndarray::array![[2.0, 4.0], [1.0, 2.0]]), 1).map_err(|e| e.to_string())?;
    worst = worst.max(
        (&w.dot(&h) - &ndarray::array![[2.0, 4.0], [1.0, 2.0]])
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs())),
    );
    ensure!(worst <= 1e-8, "rank-1 NNDSVD error {worst}");
    Ok(format!(
        "50 monotone runs, planted error {rel:.1e}, rank-1 error {worst:.1e}"
    ))
}

fn planted_topic_recovery() -> Outcome {
    let spec = two_pools(11, 400, 0.5);
    let out = generate(&spec).map_err(|e| e.to_string())?;
    let dtm = build_tfidf(&out.comments, &VocabConfig::default()).map_err(|e| e.to_string())?;
    let params = NmfParams {
        k: 2,
        ..Default::default()
    };
    let model = fit_nmf(&dtm, &params).map_err(|e| e.to_string())?;
    let kw = topic_keywords(&model, 10);
    let overlap = |topic: usize, pool: usize| {
        kw[topic]
            .iter()
            .filter(|(t, _)| spec.topics[pool].words.contains(t))
            .count() as f64
            / kw[topic].len() as f64
    };
    let straight = overlap(0, 0).min(overlap(1, 1));
    let swapped = overlap(0, 1).min(overlap(1, 0));
    let (best, matching) = if straight >= swapped {
        (straight, [0, 1])
    } else {
        (swapped, [1, 0])
    };
    ensure!(best >= 0.8, "keyword overlap {best}");
    let assignments = assign_topics(&model, 0.1);
    let correct = out
        .comments
        .iter()
        .filter(|c| {
            let truth = out.truth.topic_of(c.id).unwrap();
            let recovered = matching.iter().position(|&p| p == truth).unwrap();
            assignments.get(&c.id).is_some_and(|s| s.contains(&recovered))
        })
        .count();
    let share = correct as f64 / out.comments.len() as f64;
    ensure!(share >= 0.95, "assigned correctly {share}");
    Ok(format!(
        "keyword overlap {:.0}%, correct assignment {:.1}%",
        best * 100.0,
        share * 100.0
    ))
}

#[allow(clippy::approx_constant)]
fn query_expansion() -> Outcome {
    let toy = EmbeddingTable::from_entries([
        ("king", vec![1.0, 0.0]),
        ("queen", vec![0.9, 0.1]),
        ("car", vec![0.0, 1.0]),
    ])
    .map_err(|e| e.to_string())?;
    let hits = toy
        .neighbors("king", &NeighborQuery::default())
        .map_err(|e| e.to_string())?;
    let oracle = 0.9 / 0.82f64.sqrt();
    ensure!(
        hits.hits.len() == 1 && hits.hits[0].0 == "queen",
        "hits {:?}",
        hits.hits
    );
    ensure!(
        (hits.hits[0].1 - oracle).abs() <= 1e-8,
        "cos {} vs {oracle}",
        hits.hits[0].1
    );
    let c = cosine(&[1.0, 0.0], &[1.0, 1.0]).map_err(|e| e.to_string())?;
    ensure!((c - 0.70710678).abs() <= 1e-8, "cos45 {c}");

    // The raise fires exactly when the count at min_sim exceeds the cap.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(3..30);
        let entries: Vec<(String, Vec<f64>)> = (0..n)
            .map(|i| (format!("w{i}"), (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let table = EmbeddingTable::from_entries(entries).map_err(|e| e.to_string())?;
        let cap = rng.random_range(0..n);
        let q = NeighborQuery {
            min_sim: 0.4,
            raise_to: 0.6,
            cap,
        };
        let Ok(nb) = table.neighbors("w0", &q) else { continue };
        let w0 = table.get("w0").unwrap();
        let base = table
            .iter()
            .filter(|(t, v)| *t != "w0" && cosine(w0, v).is_ok_and(|s| s >= 0.4))
            .count();
        ensure!(
            nb.raised == (base > cap),
            "raise {} with {base} neighbors, cap {cap}",
            nb.raised
        );
        let floor = if base > cap { 0.6 } else { 0.4 };
        ensure!(nb.hits.iter().all(|(_, s)| *s >= floor), "hit below threshold {floor}");
    }

    let corpus = vec![
        comment(0, "the king decided", "A", 2019, 1),
        comment(1, "kingdom talks on budget", "A", 2019, 1),
        comment(2, "the queen and the budget", "B", 2019, 1),
        comment(3, "nothing relevant", "B", 2019, 1),
    ];
    let catalog = IssueCatalog::new(vec![
        IssueSpec {
            name: "Royalty".into(),
            seeds: vec!["king".into()],
        },
        IssueSpec {
            name: "Money".into(),
            seeds: vec!["budget".into()],
        },
    ])
    .map_err(|e| e.to_string())?;
    let expanded = expand_catalog(&catalog, &toy, &NeighborQuery::default(), None).map_err(|e| e.to_string())?;
    let tagged = tag_corpus(&corpus, &expanded);
    ensure!(
        tagged.tags(0) == BTreeSet::from(["Royalty"]),
        "comment 0 {:?}",
        tagged.tags(0)
    );
    ensure!(
        tagged.tags(1) == BTreeSet::from(["Money"]),
        "`kingdom` matched `king`: {:?}",
        tagged.tags(1)
    );
    ensure!(
        tagged.tags(2) == BTreeSet::from(["Money", "Royalty"]),
        "multi-label {:?}",
        tagged.tags(2)
    );
    ensure!(tagged.tags(3).is_empty(), "comment 3 {:?}", tagged.tags(3));

    // Growing an expansion never removes a tag.
    let vocab: Vec<String> = (0..12).map(|i| format!("t{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for round in 0..200 {
        let corpus: Vec<Comment> = (0..20)
            .map(|id| {
                let words: Vec<&str> = (0..4)
                    .map(|_| vocab[rng.random_range(0..vocab.len())].as_str())
                    .collect();
                comment(id, &words.join(" "), "A", 2019, 1)
            })
            .collect();
        let issue = |terms: &[String]| ExpandedCatalog {
            issues: vec![ExpandedIssue {
                name: "I".into(),
                seeds: vec!["t0".into()],
                expanded: terms
                    .iter()
                    .map(|t| ExpandedTerm {
                        term: t.clone(),
                        similarity: 0.5,
                        source_seed: "t0".into(),
                    })
                    .collect(),
                oov_seeds: vec![],
                raised_seeds: vec![],
            }],
        };
        let small: Vec<String> = vocab[1..].iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
        let mut large = small.clone();
        large.extend(
            vocab[1..]
                .iter()
                .filter(|t| !small.contains(t) && rng.random_bool(0.5))
                .cloned(),
        );
        let a = tag_corpus(&corpus, &issue(&small));
        let b = tag_corpus(&corpus, &issue(&large));
        for c in &corpus {
            ensure!(
                a.tags(c.id).is_subset(&b.tags(c.id)),
                "round {round}: tag lost on comment {}",
                c.id
            );
        }
    }
    Ok(format!(
        "queen {:.8}, raise rule on 200 tables, monotone on 200 rounds",
        hits.hits[0].1
    ))
}

fn distance_suite() -> Outcome {
    let a = position("A", vec![0.3, -1.2, 2.5]);
    let b = position("B", vec![1.0, 0.4, -0.7]);
    let reference =
        reference_position(&[&a, &b], "I", &ReferenceMode::Baseline("A".into())).map_err(|e| e.to_string())?;
    let refs = BTreeMap::from([("I".to_string(), Some(reference))]);
    let profile = distance_profile(&[a.clone(), b.clone()], &refs, &ReferenceMode::Baseline("A".into()));
    ensure!(
        profile.rows[0].similarity == Some(1.0),
        "baseline self-similarity {:?}",
        profile.rows[0].similarity
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.random_range(2..8);
        let ps: Vec<PartyPosition> = (0..n)
            .map(|i| position(&format!("P{i}"), (0..5).map(|_| rng.random_range(-2.0..2.0)).collect()))
            .collect();
        let refs: Vec<&PartyPosition> = ps.iter().collect();
        let h = pairwise_heatmap(&refs, "I").map_err(|e| e.to_string())?;
        for i in 0..n {
            ensure!(h.matrix[i][i] == Some(1.0), "diagonal {:?}", h.matrix[i][i]);
            for j in 0..n {
                ensure!(h.matrix[i][j] == h.matrix[j][i], "asymmetric at ({i},{j})");
            }
        }
    }

    let clusters = [
        position("A1", vec![1.0, 0.0]),
        position("A2", vec![1.0, 0.0]),
        position("B1", vec![0.0, 1.0]),
        position("B2", vec![0.0, 1.0]),
    ];
    let h = pairwise_heatmap(&clusters.iter().collect::<Vec<_>>(), "I").map_err(|e| e.to_string())?;
    for i in 0..4 {
        for j in 0..4 {
            let want = if (i < 2) == (j < 2) { 1 } else { 4 };
            ensure!(h.levels[i][j] == Some(want), "level ({i},{j}) = {:?}", h.levels[i][j]);
        }
    }

    let spec = {
        let mut s = two_pools(5, 0, 0.7);
        s.sessions = (1..=4)
            .map(|month| SynthSession {
                year: 2019,
                month,
                n_comments: 30 + 10 * month as usize,
            })
            .collect();
        s
    };
    let out = generate(&spec).map_err(|e| e.to_string())?;
    let table = synthetic_table(&spec, 16, 0.4).map_err(|e| e.to_string())?;
    let opts = PoolingOptions::default();
    let tags = tag_all(&out.comments, "all");
    let pos = |t: &EmbeddingTable, party: &str| {
        let backend = DocBackend::StaticPooling { table: t, opts: &opts };
        party_position(&out.comments, &tags, &backend, party, "all", Period::All).map(|p| p.vector.unwrap())
    };
    let scaled = table.scaled(7.5);
    let before = cosine(
        &pos(&table, "A").map_err(|e| e.to_string())?,
        &pos(&table, "B").map_err(|e| e.to_string())?,
    );
    let after = cosine(
        &pos(&scaled, "A").map_err(|e| e.to_string())?,
        &pos(&scaled, "B").map_err(|e| e.to_string())?,
    );
    let scale_worst = (before.map_err(|e| e.to_string())? - after.map_err(|e| e.to_string())?).abs();
    ensure!(scale_worst <= 1e-12, "scaling changed similarity by {scale_worst}");

    let backend = DocBackend::StaticPooling {
        table: &table,
        opts: &opts,
    };
    let year =
        party_position(&out.comments, &tags, &backend, "A", "all", Period::Year(2019)).map_err(|e| e.to_string())?;
    let mut acc = [0.0; 16];
    let mut total = 0usize;
    for month in 1..=4 {
        let p = party_position(
            &out.comments,
            &tags,
            &backend,
            "A",
            "all",
            Period::YearMonth(2019, month),
        )
        .map_err(|e| e.to_string())?;
        for (a, v) in acc.iter_mut().zip(p.vector.unwrap()) {
            *a += v * p.word_count as f64;
        }
        total += p.word_count;
    }
    ensure!(total == year.word_count, "token totals {total} vs {}", year.word_count);
    let mean_worst = acc
        .iter()
        .zip(year.vector.unwrap())
        .fold(0.0f64, |m, (a, y)| m.max((a / total as f64 - y).abs()));
    ensure!(mean_worst <= 1e-10, "yearly vs monthly {mean_worst}");
    Ok(format!(
        "scale error {scale_worst:.1e}, weighted-mean error {mean_worst:.1e}"
    ))
}

fn uncertainty() -> Outcome {
    let table = EmbeddingTable::from_entries([("peace", vec![0.2, 0.9, -0.4]), ("war", vec![1.0, 0.0, 0.3])])
        .map_err(|e| e.to_string())?;
    let opts = PoolingOptions::keep_all();
    let backend = DocBackend::StaticPooling {
        table: &table,
        opts: &opts,
    };
    let corpus: Vec<Comment> = (0..30)
        .map(|i| comment(i, &vec!["peace"; 1 + i as usize % 4].join(" "), "A", 2019, 1))
        .collect();
    let tags = tag_all(&corpus, "I");
    let params = UncertaintyParams {
        seed: 4,
        ..Default::default()
    };
    let m =
        estimate_uncertainty(&corpus, &tags, &backend, "A", "I", Period::All, &params).map_err(|e| e.to_string())?;
    ensure!(m.margin == 0.0, "single-token party margin {}", m.margin);

    let margins: Vec<f64> = [10, 100, 1000]
        .iter()
        .map(|&n| {
            let mut spec = two_pools(8, 2 * n, 0.5);
            spec.comment_length_range = (5, 15);
            let out = generate(&spec).unwrap();
            let table = synthetic_table(&spec, 16, 0.4).unwrap();
            let opts = PoolingOptions::default();
            let backend = DocBackend::StaticPooling {
                table: &table,
                opts: &opts,
            };
            let tags = tag_all(&out.comments, "all");
            let params = UncertaintyParams {
                seed: 1,
                ..Default::default()
            };
            let first = estimate_uncertainty(&out.comments, &tags, &backend, "A", "all", Period::All, &params).unwrap();
            let again = estimate_uncertainty(&out.comments, &tags, &backend, "A", "all", Period::All, &params).unwrap();
            assert_eq!(first, again, "same seed, different margin");
            first.margin
        })
        .collect();
    ensure!(margins[0] > 0.0, "margin at the smallest size is 0");
    ensure!(
        margins[0] > margins[1] && margins[1] > margins[2],
        "margins {margins:?}"
    );
    Ok(format!(
        "margins {:.2e} > {:.2e} > {:.2e}",
        margins[0], margins[1], margins[2]
    ))
}

fn embedding_diagnostics() -> Outcome {
    let table = glove();
    let h = anisotropy(&table);
    ensure!(
        h.total() == table.len(),
        "counts {} vs vocabulary {}",
        h.total(),
        table.len()
    );
    ensure!(table.len() == 1000, "fixture has {} terms", table.len());
    let (chi2, p) = h.chi_square_uniform();
    ensure!(p < 0.01, "uniformity not rejected: p = {p}");
    let s1 = sample_stream(&table, 5000, 1.0, 1);
    let s2 = sample_stream(&table, 5000, 1.0, 2);
    let series = running_mean(&table, &s1).map_err(|e| e.to_string())?;
    ensure!(series.len() == 5000, "stream length {}", series.len());
    let sim = running_mean_similarity(&table, &s1, &s2).map_err(|e| e.to_string())?;
    let last = *sim.last().unwrap();
    let slope = trend_slope(&sim, 500);
    ensure!(last > 0.95, "final cosine {last}");
    ensure!(slope >= 0.0, "trend after n = 500 is {slope}");
    Ok(format!(
        "chi2 {chi2:.0} (p {p:.1e}), final cosine {last:.4}, slope {slope:.1e}"
    ))
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn pipeline(out: &Path) -> Result<(), String> {
    let steps: [&[&str]; 7] = [
        &["synth"],
        &["prepare"],
        &["tag"],
        &["topics"],
        &["distances", "--source", "query"],
        &["distances", "--source", "latent"],
        &["diagnose"],
    ];
    for step in steps {
        let mut args = vec!["parley", "--out", out.to_str().unwrap(), "--seed", "7"];
        args.extend_from_slice(step);
        let cli = Cli::try_parse_from(&args).map_err(|e| e.to_string())?;
        let code = run(&cli);
        ensure!(code == 0, "`{}` exited {code}", step.join(" "));
    }
    Ok(())
}

fn pipeline_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path())?;
    pipeline(b.path())?;
    let fa = files_under(a.path());
    let fb = files_under(b.path());
    let names = |f: &BTreeMap<PathBuf, Vec<u8>>| f.keys().cloned().collect::<BTreeSet<_>>();
    ensure!(names(&fa) == names(&fb), "runs wrote different file sets");
    let csvs: Vec<&PathBuf> = fa
        .keys()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    ensure!(csvs.len() >= 20, "only {} CSV artifacts", csvs.len());
    for p in &csvs {
        ensure!(fa[*p] == fb[*p], "{} differs between runs", p.display());
    }
    let corpus_bytes = &fa[Path::new("corpus.csv")];
    let corpus = read_csv(corpus_bytes.as_slice()).map_err(|e| e.to_string())?;
    let mut again = Vec::new();
    write_csv(&corpus, &mut again).map_err(|e| e.to_string())?;
    ensure!(&again == corpus_bytes, "master CSV does not round-trip byte for byte");
    let reread = read_csv(again.as_slice()).map_err(|e| e.to_string())?;
    ensure!(reread == corpus, "master CSV does not round-trip field for field");
    Ok(format!(
        "{} CSV artifacts identical, {} comments round-trip",
        csvs.len(),
        corpus.len()
    ))
}

fn corpus_shape() -> Outcome {
    let spec = RunConfig::default().synth_spec();
    let years: Vec<i32> = spec.sessions.iter().map(|s| s.year).collect();
    let n2018 = years.iter().filter(|&&y| y == 2018).count();
    let n2019 = years.iter().filter(|&&y| y == 2019).count();
    ensure!(n2018 == 6 && n2019 == 8, "sessions {n2018} + {n2019}");
    let out = generate(&spec).map_err(|e| e.to_string())?;
    // Count through the same render and parse path the CLI uses.
    let files = render_sessions(&out.comments);
    let metas: Vec<SessionMeta> = files
        .iter()
        .map(|(name, _)| SessionMeta::from_filename(Path::new(name)).unwrap())
        .collect();
    let parsed = parse_sessions(
        files.iter().zip(&metas).map(|((_, text), m)| (text.as_str(), m)),
        &NormalizationConfig::default(),
    );
    ensure!(
        parsed.comments.len() == out.comments.len(),
        "parsed {} of {}",
        parsed.comments.len(),
        out.comments.len()
    );
    let mut per_session: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &parsed.comments {
        *per_session.entry(c.meta.source_file.as_str()).or_default() += c.word_count();
    }
    let total: usize = per_session.values().sum();
    let target = 14.0 * 12_000.0;
    let rel = (total as f64 - target).abs() / target;
    ensure!(rel <= 0.05, "total {total} words is {:.1}% from {target}", rel * 100.0);
    let lo = per_session.values().min().unwrap();
    let hi = per_session.values().max().unwrap();
    Ok(format!(
        "{total} words ({:+.1}%), sessions {lo}..{hi}",
        (total as f64 / target - 1.0) * 100.0
    ))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 10] = [
        ("parameter conformance", parameter_conformance),
        ("tf-idf oracle", tfidf_oracle),
        ("nmf correctness", nmf_correctness),
        ("planted-topic recovery", planted_topic_recovery),
        ("query expansion", query_expansion),
        ("distance suite", distance_suite),
        ("uncertainty", uncertainty),
        ("embedding diagnostics", embedding_diagnostics),
        ("pipeline determinism", pipeline_determinism),
        ("corpus shape", corpus_shape),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
