//! Synthetic dialogue corpora with planted topics.
//!
//! Each comment picks a topic from its party's bias and then draws tokens
//! uniformly from that topic's word pool, optionally mixed with a shared pool
//! of common words. The true topic of every comment is returned alongside the
//! corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Comment, CommentId, SessionMeta};
use crate::embed::{EmbedError, EmbeddingTable};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParty {
    pub participant: String,
    pub organisation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSession {
    pub year: i32,
    pub month: u32,
    pub n_comments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTopic {
    pub label: String,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub parties: Vec<SynthParty>,
    pub sessions: Vec<SynthSession>,
    pub topics: Vec<SynthTopic>,
    /// organisation → topic label → weight. Parties not listed are uniform.
    pub party_topic_bias: BTreeMap<String, BTreeMap<String, f64>>,
    /// Inclusive token range per comment.
    pub comment_length_range: (usize, usize),
    /// Topic-neutral filler words.
    pub common_words: Vec<String>,
    /// Probability that a token is drawn from `common_words`.
    pub common_rate: f64,
    /// Probability that a comment is a joint statement of two parties.
    pub shared_fraction: f64,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn topic(label: &str, pool: &str) -> SynthTopic {
    SynthTopic {
        label: label.into(),
        words: words(pool),
    }
}

fn bias(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(t, w)| (t.to_string(), w)).collect()
}

impl Default for SynthSpec {
    /// Four parties, four topics, six sessions in 2018 and eight in 2019 of
    /// roughly 12,000 words each.
    fn default() -> Self {
        let party = |p: &str, o: &str| SynthParty {
            participant: p.into(),
            organisation: o.into(),
        };
        let mut sessions: Vec<SynthSession> = (3..=8)
            .map(|month| SynthSession {
                year: 2018,
                month,
                n_comments: 150,
            })
            .collect();
        sessions.extend((1..=8).map(|month| SynthSession {
            year: 2019,
            month,
            n_comments: 150,
        }));
        Self {
            seed: 42,
            parties: vec![
                party("Amal", "North"),
                party("Badr", "South"),
                party("Salma", "Coast"),
                party("Huda", "Civic"),
            ],
            sessions,
            topics: vec![
                topic(
                    "security",
                    "ceasefire troops militia weapons checkpoint fighting violence disarmament soldiers army \
                     frontline airstrikes landmines battalion artillery withdrawal clashes patrols detainees hostilities",
                ),
                topic(
                    "economy",
                    "salaries currency inflation banks revenue budget fuel imports prices wages \
                     exports reserves loans markets taxes customs trade investment employment subsidies",
                ),
                topic(
                    "humanitarian",
                    "food water hospitals medicine aid famine cholera shelters refugees displaced \
                     vaccines nutrition clinics donors relief sanitation convoys rations malnutrition orphans",
                ),
                topic(
                    "governance",
                    "elections constitution parliament ministries decentralisation federalism governors courts judiciary legislation \
                     referendum transition councils cabinet reforms mandate accountability corruption institutions sovereignty",
                ),
            ],
            party_topic_bias: BTreeMap::from([
                (
                    "North".to_string(),
                    bias(&[("security", 0.6), ("economy", 0.2), ("humanitarian", 0.1), ("governance", 0.1)]),
                ),
                (
                    "South".to_string(),
                    bias(&[("security", 0.1), ("economy", 0.5), ("humanitarian", 0.1), ("governance", 0.3)]),
                ),
                (
                    "Coast".to_string(),
                    bias(&[("security", 0.1), ("economy", 0.1), ("humanitarian", 0.6), ("governance", 0.2)]),
                ),
            ]),
            comment_length_range: (40, 120),
            common_words: words("session proposal meeting process dialogue points group discussion agreement position"),
            common_rate: 0.15,
            shared_fraction: 0.05,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), SynthError> {
    if cond {
        Ok(())
    } else {
        Err(SynthError::InvalidSpec(msg()))
    }
}

fn valid_word(w: &str) -> bool {
    tokenize(w) == [w]
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        check(self.parties.len() >= 2, || "need at least 2 parties".into())?;
        check(self.topics.len() >= 2, || "need at least 2 topics".into())?;
        let mut orgs = BTreeSet::new();
        for p in &self.parties {
            for field in [&p.participant, &p.organisation] {
                check(
                    !field.trim().is_empty() && !field.contains(['(', ')', ':', '&', '|', '\n']),
                    || format!("party name `{field}` is empty or contains reserved characters"),
                )?;
            }
            check(orgs.insert(p.organisation.as_str()), || {
                format!("duplicate organisation `{}`", p.organisation)
            })?;
        }
        let mut labels = BTreeSet::new();
        for t in &self.topics {
            check(labels.insert(t.label.as_str()), || {
                format!("duplicate topic `{}`", t.label)
            })?;
            check(!t.words.is_empty(), || format!("topic `{}` has an empty pool", t.label))?;
            for w in &t.words {
                check(valid_word(w), || {
                    format!("pool word `{w}` is not a single lowercase token")
                })?;
            }
        }
        for w in &self.common_words {
            check(valid_word(w), || {
                format!("common word `{w}` is not a single lowercase token")
            })?;
        }
        for (org, row) in &self.party_topic_bias {
            check(orgs.contains(org.as_str()), || {
                format!("bias for unknown party `{org}`")
            })?;
            for (label, &w) in row {
                check(labels.contains(label.as_str()), || {
                    format!("bias for unknown topic `{label}`")
                })?;
                check(w.is_finite() && w >= 0.0, || {
                    format!("negative bias {w} for `{org}`/`{label}`")
                })?;
            }
            let sum: f64 = row.values().sum();
            check((sum - 1.0).abs() <= 1e-6, || {
                format!("bias row for `{org}` sums to {sum}, not 1")
            })?;
        }
        let (lo, hi) = self.comment_length_range;
        check(lo >= 1 && lo <= hi, || format!("bad comment length range ({lo}, {hi})"))?;
        check((0.0..1.0).contains(&self.common_rate), || {
            "common_rate must be in [0, 1)".into()
        })?;
        check(self.common_rate == 0.0 || !self.common_words.is_empty(), || {
            "common_rate > 0 needs common_words".into()
        })?;
        check((0.0..=1.0).contains(&self.shared_fraction), || {
            "shared_fraction must be in [0, 1]".into()
        })?;
        for s in &self.sessions {
            SessionMeta::new("synthetic", s.year, s.month).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        }
        Ok(())
    }

    pub fn topic_labels(&self) -> Vec<String> {
        self.topics.iter().map(|t| t.label.clone()).collect()
    }

    /// Topic weights for a party in topic order.
    pub fn bias_row(&self, organisation: &str) -> Vec<f64> {
        match self.party_topic_bias.get(organisation) {
            Some(row) => self
                .topics
                .iter()
                .map(|t| row.get(&t.label).copied().unwrap_or(0.0))
                .collect(),
            None => vec![1.0 / self.topics.len() as f64; self.topics.len()],
        }
    }

    pub fn total_comments(&self) -> usize {
        self.sessions.iter().map(|s| s.n_comments).sum()
    }
}

/// True topic mixture per comment, in the generator's topic order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub topic_labels: Vec<String>,
    pub weights: BTreeMap<CommentId, Vec<f64>>,
}

impl GroundTruth {
    /// Index of the dominant topic.
    pub fn topic_of(&self, id: CommentId) -> Option<usize> {
        let w = self.weights.get(&id)?;
        (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub comments: Vec<Comment>,
    pub truth: GroundTruth,
}

pub fn session_file_name(index: usize, s: &SynthSession) -> String {
    format!("{:04}-{:02}-session{:02}.txt", s.year, s.month, index + 1)
}

fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a str {
    &pool[rng.random_range(0..pool.len())]
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let biases: Vec<Vec<f64>> = spec.parties.iter().map(|p| spec.bias_row(&p.organisation)).collect();
    let n_topics = spec.topics.len();
    let (lo, hi) = spec.comment_length_range;
    let mut comments = Vec::with_capacity(spec.total_comments());
    let mut weights = BTreeMap::new();
    for (si, session) in spec.sessions.iter().enumerate() {
        let meta = SessionMeta::new(session_file_name(si, session), session.year, session.month)
            .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        for _ in 0..session.n_comments {
            let speaker = rng.random_range(0..spec.parties.len());
            let partner = if spec.shared_fraction > 0.0 && rng.random::<f64>() < spec.shared_fraction {
                let other = rng.random_range(0..spec.parties.len() - 1);
                Some(if other >= speaker { other + 1 } else { other })
            } else {
                None
            };
            let t = draw(&mut rng, &biases[speaker]);
            let len = rng.random_range(lo..=hi);
            let tokens: Vec<&str> = (0..len)
                .map(|_| {
                    if spec.common_rate > 0.0 && rng.random::<f64>() < spec.common_rate {
                        pick(&mut rng, &spec.common_words)
                    } else {
                        pick(&mut rng, &spec.topics[t].words)
                    }
                })
                .collect();
            let p = &spec.parties[speaker];
            let (participant, multi) = match partner {
                Some(q) => {
                    let q = &spec.parties[q];
                    (
                        format!("{} & {}", p.participant, q.participant),
                        vec![p.organisation.clone(), q.organisation.clone()],
                    )
                }
                None => (p.participant.clone(), vec![]),
            };
            let id = comments.len() as CommentId;
            let mut w = vec![0.0; n_topics];
            w[t] = 1.0;
            weights.insert(id, w);
            comments.push(Comment {
                id,
                text: tokens.join(" "),
                meta: meta.clone(),
                participant,
                organisation: p.organisation.clone(),
                multi_organisations: multi,
            });
        }
    }
    Ok(SynthCorpus {
        comments,
        truth: GroundTruth {
            topic_labels: spec.topic_labels(),
            weights,
        },
    })
}

const WRAP_TOKENS: usize = 15;

/// Renders one session's comments in the note grammar, wrapping long turns
/// onto indented continuation lines.
pub fn render_notes(comments: &[Comment], title: &str) -> String {
    let mut out = format!("{title}\n\n");
    for c in comments {
        let names: Vec<&str> = c.participant.split(" & ").collect();
        let orgs: Vec<&str> = if c.is_shared() {
            c.multi_organisations.iter().map(String::as_str).collect()
        } else {
            vec![c.organisation.as_str()]
        };
        let header: Vec<String> = names.iter().zip(&orgs).map(|(n, o)| format!("{n} ({o})")).collect();
        let words: Vec<&str> = c.text.split_whitespace().collect();
        let mut chunks = words.chunks(WRAP_TOKENS);
        out.push_str(&header.join(" & "));
        out.push(':');
        if let Some(first) = chunks.next() {
            out.push(' ');
            out.push_str(&first.join(" "));
        }
        out.push('\n');
        for chunk in chunks {
            out.push_str("    ");
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    out
}

/// Splits a generated corpus into `(file name, note text)` per session.
pub fn render_sessions(comments: &[Comment]) -> Vec<(String, String)> {
    let mut groups: Vec<(String, Vec<Comment>)> = Vec::new();
    for c in comments {
        match groups.last_mut() {
            Some((f, v)) if *f == c.meta.source_file => v.push(c.clone()),
            _ => groups.push((c.meta.source_file.clone(), vec![c.clone()])),
        }
    }
    groups
        .into_iter()
        .map(|(file, cs)| {
            let m = &cs[0].meta;
            let title = format!("Session notes {}-{:02}", m.year, m.month);
            let text = render_notes(&cs, &title);
            (file, text)
        })
        .collect()
}

/// Writes `id,true_topic_weights` with weights joined by `|`.
pub fn write_ground_truth<W: Write>(truth: &GroundTruth, out: W) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "true_topic_weights"])?;
    for (id, weights) in &truth.weights {
        let joined = weights.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
        w.write_record([id.to_string(), joined])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// An embedding table for the generator's vocabulary: each topic gets a random
/// centroid and its words scatter around it; common words scatter around a
/// separate centroid.
pub fn synthetic_table(spec: &SynthSpec, dim: usize, noise: f64) -> Result<EmbeddingTable, SynthError> {
    spec.validate()?;
    check(dim >= 2, || "embedding dimension must be ≥ 2".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x7ab1e);
    let gauss = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> {
        (0..dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                scale * z
            })
            .collect::<Vec<f64>>()
    };
    let mut entries: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut groups: Vec<&[String]> = spec.topics.iter().map(|t| t.words.as_slice()).collect();
    if !spec.common_words.is_empty() {
        groups.push(&spec.common_words);
    }
    for pool in groups {
        let centroid = gauss(&mut rng, 1.0);
        for w in pool {
            let jitter = gauss(&mut rng, noise);
            entries
                .entry(w.clone())
                .or_insert_with(|| centroid.iter().zip(&jitter).map(|(c, j)| c + j).collect());
        }
    }
    Ok(EmbeddingTable::from_entries(entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pool(seed: u64, n: usize) -> SynthSpec {
        let pool = |p: &str| (0..20).map(|i| format!("{p}{i:02}")).collect::<Vec<_>>();
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
                n_comments: n,
            }],
            topics: vec![
                SynthTopic {
                    label: "t0".into(),
                    words: pool("alpha"),
                },
                SynthTopic {
                    label: "t1".into(),
                    words: pool("beta"),
                },
            ],
            party_topic_bias: BTreeMap::from([
                ("A".to_string(), bias(&[("t0", 1.0), ("t1", 0.0)])),
                ("B".to_string(), bias(&[("t0", 0.3), ("t1", 0.7)])),
            ]),
            comment_length_range: (5, 15),
            common_words: vec![],
            common_rate: 0.0,
            shared_fraction: 0.0,
        }
    }

    #[test]
    fn full_bias_forces_pool() {
        let out = generate(&two_pool(1, 300)).unwrap();
        for c in out.comments.iter().filter(|c| c.organisation == "A") {
            assert!(c.tokens().iter().all(|t| t.starts_with("alpha")), "{}", c.text);
            assert_eq!(out.truth.topic_of(c.id), Some(0));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&two_pool(9, 50)).unwrap();
        let b = generate(&two_pool(9, 50)).unwrap();
        let c = generate(&two_pool(10, 50)).unwrap();
        assert_eq!(a.comments, b.comments);
        assert_ne!(a.comments, c.comments);
    }

    #[test]
    fn session_sizes_add_up() {
        let mut spec = two_pool(3, 0);
        spec.sessions = (0..14)
            .map(|i| SynthSession {
                year: if i < 6 { 2018 } else { 2019 },
                month: 1 + (i % 6) as u32,
                n_comments: 50,
            })
            .collect();
        let out = generate(&spec).unwrap();
        assert_eq!(out.comments.len(), 700);
        assert!(out.comments.iter().enumerate().all(|(i, c)| c.id == i as u64));
    }

    #[test]
    fn proportions_converge_to_bias() {
        let spec = two_pool(5, 4000);
        let out = generate(&spec).unwrap();
        let b: Vec<_> = out.comments.iter().filter(|c| c.organisation == "B").collect();
        assert!(b.len() >= 1500);
        let share0 = b.iter().filter(|c| out.truth.topic_of(c.id) == Some(0)).count() as f64 / b.len() as f64;
        assert!((share0 - 0.3).abs() < 0.05, "{share0}");
    }

    #[test]
    fn invalid_specs() {
        let mut s = two_pool(1, 1);
        s.parties.truncate(1);
        assert!(generate(&s).is_err());
        let mut s = two_pool(1, 1);
        s.topics[1].words.clear();
        assert!(generate(&s).is_err());
        let mut s = two_pool(1, 1);
        s.party_topic_bias.insert("A".into(), bias(&[("t0", 0.5), ("t1", 0.6)]));
        assert!(generate(&s).is_err());
        let mut s = two_pool(1, 1);
        s.party_topic_bias
            .insert("A".into(), bias(&[("t0", 1.5), ("t1", -0.5)]));
        assert!(generate(&s).is_err());
        let mut s = two_pool(1, 1);
        s.topics[0].words.push("Two Words".into());
        assert!(generate(&s).is_err());
    }

    #[test]
    fn default_spec_is_valid() {
        let spec = SynthSpec::default();
        spec.validate().unwrap();
        assert_eq!(spec.sessions.len(), 14);
    }

    #[test]
    fn notes_round_trip_through_parser() {
        let mut spec = two_pool(2, 40);
        spec.shared_fraction = 0.3;
        let out = generate(&spec).unwrap();
        let rendered = render_sessions(&out.comments);
        assert_eq!(rendered.len(), 1);
        let parsed = crate::corpus::parse_notes(&rendered[0].1, &out.comments[0].meta, &Default::default());
        assert!(parsed.issues.is_empty());
        assert_eq!(parsed.comments, out.comments);
    }

    #[test]
    fn table_clusters_pools() {
        let spec = two_pool(2, 1);
        let t = synthetic_table(&spec, 50, 0.3).unwrap();
        let s = crate::embed::cosine(t.get("alpha00").unwrap(), t.get("alpha01").unwrap()).unwrap();
        let x = crate::embed::cosine(t.get("alpha00").unwrap(), t.get("beta00").unwrap()).unwrap();
        assert!(s > 0.8 && x < 0.4, "{s} {x}");
    }

    #[test]
    fn ground_truth_csv() {
        let out = generate(&two_pool(1, 2)).unwrap();
        let mut buf = Vec::new();
        write_ground_truth(&out.truth, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("id,true_topic_weights\n0,"));
        assert_eq!(s.lines().count(), 3);
    }
}
