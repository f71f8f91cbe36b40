//! CSV layouts of every artifact the pipeline reads or writes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use parley::activity::{ActivityRow, Tagging};
use parley::corpus::{read_csv, write_csv, write_csv_extended, Comment, CSV_HEADER};
use parley::diag::{AnisotropyHistogram, RunningMeanSeries};
use parley::issues_latent::{topic_label, Assignments, TopicModel};
use parley::issues_query::{ExpandedCatalog, TaggedCorpus};
use parley::positions::{DistanceProfile, HeatmapReport};

use crate::{CliError, Result};

pub const CORPUS: &str = "corpus.csv";
pub const FILTERED: &str = "filtered.csv";
pub const TAGGED: &str = "tagged.csv";
pub const EXPANSION: &str = "expansion.csv";
pub const ACTIVITY: &str = "activity.csv";
pub const KEYWORDS: &str = "topics_keywords.csv";
pub const ASSIGNMENTS: &str = "topic_assignments.csv";
pub const REPRESENTATIVES: &str = "representatives.csv";
pub const OVERLAP: &str = "overlap.csv";
pub const LATENT_ACTIVITY: &str = "latent_activity.csv";
pub const NMF_TRACE: &str = "nmf_trace.csv";
pub const PROFILE: &str = "profile.csv";
pub const PARTY_ACTIVITY: &str = "party_activity.csv";
pub const ANISOTROPY: &str = "anisotropy.csv";
pub const ANISOTROPY_TEST: &str = "anisotropy_test.csv";
pub const RUNNING_MEAN: &str = "running_mean.csv";
pub const RUNNING_SIM: &str = "running_sim.csv";
pub const GROUND_TRUTH: &str = "ground_truth.csv";

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(anyhow::anyhow!("{e}"))
}

pub fn csv_bytes<H, R>(header: &[H], rows: R) -> Result<Vec<u8>>
where
    H: AsRef<[u8]>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(runtime)
}

pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// File-name-safe form of an issue name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "issue".into()
    } else {
        trimmed.into()
    }
}

pub fn corpus_bytes(corpus: &[Comment]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(corpus, &mut buf).map_err(runtime)?;
    Ok(buf)
}

fn read_file(path: &Path, what: &str) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::validation(format!("missing {what}: {} not found", path.display()))
        } else {
            e.into()
        }
    })
}

pub fn read_corpus(path: &Path, what: &str) -> Result<Vec<Comment>> {
    let bytes = read_file(path, what)?;
    read_csv(bytes.as_slice()).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn evidence_cell(ev: Option<&BTreeMap<String, Vec<String>>>) -> String {
    ev.map(|m| {
        m.iter()
            .map(|(issue, terms)| format!("{issue}:{}", terms.join(" ")))
            .collect::<Vec<_>>()
            .join("; ")
    })
    .unwrap_or_default()
}

pub fn tagged_bytes(tagged: &TaggedCorpus) -> Result<Vec<u8>> {
    let issues = &tagged.tagging.issues;
    let mut header: Vec<&str> = issues.iter().map(String::as_str).collect();
    header.push("evidence");
    let mut buf = Vec::new();
    write_csv_extended(
        &tagged.corpus,
        &header,
        |c| {
            let mut cols: Vec<String> = issues
                .iter()
                .map(|i| if tagged.tagging.has(c.id, i) { "1" } else { "0" }.to_string())
                .collect();
            cols.push(evidence_cell(tagged.evidence.get(&c.id)));
            cols
        },
        &mut buf,
    )
    .map_err(runtime)?;
    Ok(buf)
}

/// Corpus plus 0/1 issue columns from `tagged.csv`.
pub fn read_tagged(path: &Path) -> Result<(Vec<Comment>, Tagging)> {
    let bytes = read_file(path, "query tagging (run `parley tag` first)")?;
    let corpus = read_csv(bytes.as_slice()).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let headers = r.headers()?.clone();
    let n = headers.len();
    if n < CSV_HEADER.len() + 1 || &headers[n - 1] != "evidence" {
        return Err(CliError::validation(format!("{}: not a tagged corpus", path.display())));
    }
    let issues: Vec<String> = headers
        .iter()
        .skip(CSV_HEADER.len())
        .take(n - CSV_HEADER.len() - 1)
        .map(str::to_string)
        .collect();
    let mut by_comment = BTreeMap::new();
    for (rec, c) in r.records().zip(&corpus) {
        let rec = rec?;
        let tags: BTreeSet<String> = issues
            .iter()
            .enumerate()
            .filter(|(j, _)| &rec[CSV_HEADER.len() + j] == "1")
            .map(|(_, i)| i.clone())
            .collect();
        by_comment.insert(c.id, tags);
    }
    Ok((corpus, Tagging { issues, by_comment }))
}

pub fn expansion_bytes(expanded: &ExpandedCatalog) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for issue in &expanded.issues {
        for seed in &issue.seeds {
            let sim = if issue.oov_seeds.contains(seed) {
                String::new()
            } else {
                "1".into()
            };
            rows.push(vec![issue.name.clone(), seed.clone(), seed.clone(), sim]);
        }
        for t in &issue.expanded {
            rows.push(vec![
                issue.name.clone(),
                t.source_seed.clone(),
                t.term.clone(),
                num(t.similarity),
            ]);
        }
    }
    csv_bytes(&["issue", "seed", "term", "similarity"], rows)
}

pub fn activity_bytes(key: &str, rows: &[ActivityRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &[key, "period", "words"],
        rows.iter()
            .map(|r| vec![r.issue.clone(), r.period.to_string(), r.words.to_string()]),
    )
}

pub fn keywords_bytes(keywords: &[Vec<(String, f64)>]) -> Result<Vec<u8>> {
    let rows = keywords.iter().enumerate().flat_map(|(k, kw)| {
        kw.iter()
            .enumerate()
            .map(move |(r, (t, w))| vec![k.to_string(), (r + 1).to_string(), t.clone(), num(*w)])
    });
    csv_bytes(&["topic", "rank", "term", "weight"], rows)
}

pub fn assignments_bytes(corpus: &[Comment], assignments: &Assignments) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv_extended(
        corpus,
        &["topics"],
        |c| {
            let cell = assignments
                .get(&c.id)
                .map(|ts| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("|"))
                .unwrap_or_default();
            vec![cell]
        },
        &mut buf,
    )
    .map_err(runtime)?;
    Ok(buf)
}

/// Corpus plus topic memberships from `topic_assignments.csv`.
pub fn read_assignments(path: &Path, k: usize) -> Result<(Vec<Comment>, Tagging)> {
    let bytes = read_file(path, "topic assignments (run `parley topics` first)")?;
    let corpus = read_csv(bytes.as_slice()).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let headers = r.headers()?.clone();
    if headers.len() != CSV_HEADER.len() + 1 || &headers[CSV_HEADER.len()] != "topics" {
        return Err(CliError::validation(format!(
            "{}: not a topic assignment file",
            path.display()
        )));
    }
    let mut by_comment = BTreeMap::new();
    for (rec, c) in r.records().zip(&corpus) {
        let rec = rec?;
        let cell = &rec[CSV_HEADER.len()];
        let mut tags = BTreeSet::new();
        for part in cell.split('|').filter(|p| !p.is_empty()) {
            let t: usize = part
                .parse()
                .map_err(|_| CliError::validation(format!("{}: bad topic index `{part}`", path.display())))?;
            tags.insert(topic_label(t));
        }
        by_comment.insert(c.id, tags);
    }
    Ok((
        corpus,
        Tagging {
            issues: (0..k).map(topic_label).collect(),
            by_comment,
        },
    ))
}

pub fn representatives_bytes(model: &TopicModel, reps: &[Vec<u64>], corpus: &[Comment]) -> Result<Vec<u8>> {
    let text: BTreeMap<u64, &str> = corpus.iter().map(|c| (c.id, c.text.as_str())).collect();
    let row_of: BTreeMap<u64, usize> = model.doc_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut rows = Vec::new();
    for (k, ids) in reps.iter().enumerate() {
        for (rank, id) in ids.iter().enumerate() {
            let w = model.w.row(row_of[id]);
            let total = w.sum();
            let purity = if total > 0.0 { w[k] / total } else { 0.0 };
            rows.push(vec![
                k.to_string(),
                (rank + 1).to_string(),
                id.to_string(),
                num(purity),
                num(w[k]),
                text.get(id).copied().unwrap_or_default().to_string(),
            ]);
        }
    }
    csv_bytes(&["topic", "rank", "id", "purity", "weight", "text"], rows)
}

pub fn square_bytes(labels: &[String], corner: &str, cell: impl Fn(usize, usize) -> String) -> Result<Vec<u8>> {
    let mut header = vec![corner.to_string()];
    header.extend(labels.iter().cloned());
    let rows = (0..labels.len()).map(|i| {
        let mut row = vec![labels[i].clone()];
        row.extend((0..labels.len()).map(|j| cell(i, j)));
        row
    });
    csv_bytes(&header, rows)
}

pub fn overlap_bytes(overlap: &Array2<f64>) -> Result<Vec<u8>> {
    let labels: Vec<String> = (0..overlap.nrows()).map(topic_label).collect();
    square_bytes(&labels, "topic", |i, j| num(overlap[[i, j]]))
}

pub fn trace_bytes(trace: &[f64]) -> Result<Vec<u8>> {
    csv_bytes(
        &["iteration", "objective"],
        trace.iter().enumerate().map(|(i, f)| vec![i.to_string(), num(*f)]),
    )
}

pub fn profile_bytes(
    profile: &DistanceProfile,
    margins: &BTreeMap<(String, String, String), Option<f64>>,
) -> Result<Vec<u8>> {
    let rows = profile.rows.iter().map(|r| {
        let period = r.period.to_string();
        let margin = margins
            .get(&(r.party.clone(), r.issue.clone(), period.clone()))
            .copied()
            .flatten();
        vec![
            profile.reference.clone(),
            r.party.clone(),
            r.issue.clone(),
            period,
            opt(r.similarity),
            opt(r.distance()),
            opt(margin),
            r.word_count.to_string(),
        ]
    });
    csv_bytes(
        &[
            "reference",
            "party",
            "issue",
            "period",
            "similarity",
            "distance",
            "margin",
            "word_count",
        ],
        rows,
    )
}

pub fn heatmap_bytes(h: &HeatmapReport) -> Result<Vec<u8>> {
    square_bytes(&h.parties, "party", |i, j| opt(h.matrix[i][j]))
}

pub fn levels_bytes(h: &HeatmapReport) -> Result<Vec<u8>> {
    let mut bytes = square_bytes(&h.parties, "party", |i, j| {
        h.levels[i][j].map(|l| l.to_string()).unwrap_or_default()
    })?;
    let edges: Vec<String> = h.bin_edges.iter().map(|e| num(*e)).collect();
    // Bin edges travel with the levels so the quantization can be audited.
    bytes.extend_from_slice(format!("# bin_edges {}\n", edges.join(" ")).as_bytes());
    Ok(bytes)
}

pub fn party_activity_bytes(rows: &[(String, String, String, usize)]) -> Result<Vec<u8>> {
    csv_bytes(
        &["party", "issue", "period", "words"],
        rows.iter()
            .map(|(p, i, per, w)| vec![p.clone(), i.clone(), per.clone(), w.to_string()]),
    )
}

pub fn anisotropy_bytes(h: &AnisotropyHistogram) -> Result<Vec<u8>> {
    csv_bytes(
        &["dimension", "count"],
        h.counts
            .iter()
            .enumerate()
            .map(|(d, c)| vec![d.to_string(), c.to_string()]),
    )
}

pub fn anisotropy_test_bytes(h: &AnisotropyHistogram) -> Result<Vec<u8>> {
    let (stat, p) = h.chi_square_uniform();
    csv_bytes(
        &["vectors", "dimension", "chi_square", "df", "p_value"],
        [vec![
            h.total().to_string(),
            h.dimension().to_string(),
            num(stat),
            (h.dimension().saturating_sub(1)).to_string(),
            num(p),
        ]],
    )
}

pub fn running_mean_bytes(series: &RunningMeanSeries, all_components: bool) -> Result<Vec<u8>> {
    let max = series.max_component();
    let min = series.min_component();
    let mut rows = Vec::new();
    for (i, m) in series.means.iter().enumerate() {
        let n = (i + 1).to_string();
        rows.push(vec![n.clone(), "max".into(), num(max[i])]);
        rows.push(vec![n.clone(), "min".into(), num(min[i])]);
        if all_components {
            for (j, v) in m.iter().enumerate() {
                rows.push(vec![n.clone(), j.to_string(), num(*v)]);
            }
        }
    }
    csv_bytes(&["n", "component", "value"], rows)
}

pub fn running_sim_bytes(sim: &[f64]) -> Result<Vec<u8>> {
    csv_bytes(
        &["n", "cosine"],
        sim.iter().enumerate().map(|(i, c)| vec![(i + 1).to_string(), num(*c)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use parley::corpus::SessionMeta;

    fn comment(id: u64, text: &str) -> Comment {
        Comment {
            id,
            text: text.into(),
            meta: SessionMeta::new("2019-01-a.txt", 2019, 1).unwrap(),
            participant: "P".into(),
            organisation: "O".into(),
            multi_organisations: vec![],
        }
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Decentralisation/federalism"), "decentralisation_federalism");
        assert_eq!(slug("The South"), "the_south");
        assert_eq!(slug("topic_3"), "topic_3");
        assert_eq!(slug("//"), "issue");
    }

    #[test]
    fn tagged_round_trip() {
        let corpus = vec![comment(0, "war, \"talks\""), comment(1, "peace")];
        let tagging = Tagging {
            issues: vec!["a, b".into(), "c".into()],
            by_comment: BTreeMap::from([(0, BTreeSet::from(["c".to_string()])), (1, BTreeSet::new())]),
        };
        let tagged = TaggedCorpus {
            corpus: corpus.clone(),
            tagging: tagging.clone(),
            evidence: BTreeMap::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, tagged_bytes(&tagged).unwrap()).unwrap();
        let (c, t) = read_tagged(&path).unwrap();
        assert_eq!(c, corpus);
        assert_eq!(t, tagging);
    }

    #[test]
    fn assignments_round_trip() {
        let corpus = vec![comment(0, "x"), comment(1, "y")];
        let a: Assignments = BTreeMap::from([(0, BTreeSet::from([0, 2])), (1, BTreeSet::new())]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, assignments_bytes(&corpus, &a).unwrap()).unwrap();
        let (c, t) = read_assignments(&path, 3).unwrap();
        assert_eq!(c, corpus);
        assert!(t.has(0, "topic_2") && !t.has(0, "topic_1") && t.labels(1).next().is_none());
    }
}
