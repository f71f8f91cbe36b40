//! Party positions in embedding space and their distances.
//!
//! A party's position on an issue is the pooled vector of everything it said
//! on that issue within a period. Positions are compared by cosine similarity
//! to a reference (the average of selected parties, or a baseline party) and
//! pairwise, with a four-level quantization for heatmaps.

use std::collections::BTreeMap;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{Period, Tagging};
use crate::corpus::Comment;
use crate::embed::{cosine, DocBackend, EmbedError, MeanAccumulator};

#[derive(Debug, Error)]
pub enum PositionError {
    #[error("no party has data for issue `{0}`")]
    NoReference(String),
    #[error("issue `{issue}`: need at least {needed} parties with data, found {found}")]
    InsufficientParties { issue: String, needed: usize, found: usize },
    #[error("party `{party}` has no data on issue `{issue}`")]
    NoData { party: String, issue: String },
    #[error("party `{party}` has a single comment on issue `{issue}`; no resampling possible")]
    TooLittleData { party: String, issue: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartyPosition {
    pub party: String,
    pub issue: String,
    pub period: Period,
    /// `None` when nothing the party said on the issue could be embedded.
    pub vector: Option<Vec<f64>>,
    /// Tokens (static pooling) or comment words (precomputed) that contributed.
    pub word_count: usize,
    pub comment_count: usize,
}

fn selected<'a>(
    corpus: &'a [Comment],
    tagging: &'a Tagging,
    party: &'a str,
    issue: &'a str,
    period: Period,
) -> impl Iterator<Item = &'a Comment> + 'a {
    corpus
        .iter()
        .filter(move |c| period.contains(&c.meta) && tagging.has(c.id, issue) && c.parties().any(|p| p == party))
}

/// Per-comment accumulators for the party's qualifying comments.
fn comment_pools(
    corpus: &[Comment],
    tagging: &Tagging,
    backend: &DocBackend<'_>,
    party: &str,
    issue: &str,
    period: Period,
) -> Result<Vec<MeanAccumulator>, PositionError> {
    selected(corpus, tagging, party, issue, period)
        .map(|c| {
            let mut acc = MeanAccumulator::new();
            backend.accumulate(c, &mut acc)?;
            Ok(acc)
        })
        .collect()
}

fn merge_all<'a, I: IntoIterator<Item = &'a MeanAccumulator>>(parts: I) -> MeanAccumulator {
    let mut acc = MeanAccumulator::new();
    for p in parts {
        acc.merge(p);
    }
    acc
}

pub fn party_position(
    corpus: &[Comment],
    tagging: &Tagging,
    backend: &DocBackend<'_>,
    party: &str,
    issue: &str,
    period: Period,
) -> Result<PartyPosition, PositionError> {
    let mut acc = MeanAccumulator::new();
    let mut comment_count = 0;
    for c in selected(corpus, tagging, party, issue, period) {
        backend.accumulate(c, &mut acc)?;
        comment_count += 1;
    }
    Ok(PartyPosition {
        party: party.to_string(),
        issue: issue.to_string(),
        period,
        word_count: acc.weight() as usize,
        vector: acc.into_mean(),
        comment_count,
    })
}

/// Positions for every (party, issue) pair, parties varying fastest.
pub fn positions_for(
    corpus: &[Comment],
    tagging: &Tagging,
    backend: &DocBackend<'_>,
    parties: &[String],
    issues: &[String],
    period: Period,
) -> Result<Vec<PartyPosition>, PositionError> {
    let pairs: Vec<(&String, &String)> = issues
        .iter()
        .flat_map(|i| parties.iter().map(move |p| (p, i)))
        .collect();
    pairs
        .par_iter()
        .map(|(p, i)| party_position(corpus, tagging, backend, p, i, period))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceMode {
    Average,
    Baseline(String),
}

impl ReferenceMode {
    pub fn label(&self) -> String {
        match self {
            ReferenceMode::Average => "average".into(),
            ReferenceMode::Baseline(p) => format!("baseline:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub vector: Vec<f64>,
    pub parties_used: Vec<String>,
    pub parties_missing: Vec<String>,
}

/// Reference point for one issue from that issue's positions.
pub fn reference_position(
    positions: &[&PartyPosition],
    issue: &str,
    mode: &ReferenceMode,
) -> Result<Reference, PositionError> {
    let (with, without): (Vec<&&PartyPosition>, Vec<&&PartyPosition>) =
        positions.iter().partition(|p| p.vector.is_some());
    let missing: Vec<String> = without.iter().map(|p| p.party.clone()).collect();
    match mode {
        ReferenceMode::Baseline(party) => {
            let p = with
                .iter()
                .find(|p| &p.party == party)
                .ok_or_else(|| PositionError::NoReference(issue.to_string()))?;
            Ok(Reference {
                vector: p.vector.clone().expect("partitioned on presence"),
                parties_used: vec![party.clone()],
                parties_missing: missing,
            })
        }
        ReferenceMode::Average => {
            if with.is_empty() {
                return Err(PositionError::NoReference(issue.to_string()));
            }
            if with.len() < 2 {
                return Err(PositionError::InsufficientParties {
                    issue: issue.to_string(),
                    needed: 2,
                    found: with.len(),
                });
            }
            if !missing.is_empty() {
                warn!(
                    "issue `{issue}`: average excludes parties without data: {}",
                    missing.join(", ")
                );
            }
            let mut acc = MeanAccumulator::new();
            for p in &with {
                acc.push(p.vector.as_deref().expect("partitioned on presence"));
            }
            Ok(Reference {
                vector: acc.into_mean().expect("at least two vectors"),
                parties_used: with.iter().map(|p| p.party.clone()).collect(),
                parties_missing: missing,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub party: String,
    pub issue: String,
    pub period: Period,
    pub similarity: Option<f64>,
    pub word_count: usize,
}

impl ProfileRow {
    pub fn distance(&self) -> Option<f64> {
        self.similarity.map(|s| 1.0 - s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub reference: String,
    pub rows: Vec<ProfileRow>,
}

/// Cosine similarity of each position to its issue's reference. Missing
/// positions or references give missing cells.
pub fn distance_profile(
    positions: &[PartyPosition],
    references: &BTreeMap<String, Option<Reference>>,
    mode: &ReferenceMode,
) -> DistanceProfile {
    let rows = positions
        .iter()
        .map(|p| {
            let reference = references.get(&p.issue).and_then(Option::as_ref);
            let similarity = match (&p.vector, reference) {
                (Some(v), Some(r)) => cosine(v, &r.vector).ok(),
                _ => None,
            };
            ProfileRow {
                party: p.party.clone(),
                issue: p.issue.clone(),
                period: p.period,
                similarity,
                word_count: p.word_count,
            }
        })
        .collect();
    DistanceProfile {
        reference: mode.label(),
        rows,
    }
}

/// Computes references for every issue present in `positions`; issues where
/// no reference can be formed map to `None` with a warning.
pub fn references_by_issue(positions: &[PartyPosition], mode: &ReferenceMode) -> BTreeMap<String, Option<Reference>> {
    let mut by_issue: BTreeMap<String, Vec<&PartyPosition>> = BTreeMap::new();
    for p in positions {
        by_issue.entry(p.issue.clone()).or_default().push(p);
    }
    by_issue
        .into_iter()
        .map(|(issue, ps)| {
            let r = match reference_position(&ps, &issue, mode) {
                Ok(r) => Some(r),
                Err(e) => {
                    warn!("{e}");
                    None
                }
            };
            (issue, r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapReport {
    pub issue: String,
    pub parties: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
    /// 1 = closest … 4 = farthest.
    pub levels: Vec<Vec<Option<u8>>>,
    /// Bin edges from the lowest off-diagonal similarity up to 1.
    pub bin_edges: [f64; 5],
}

/// Quantizes similarity into four equal-width bins over `[lowest, 1]`.
pub fn level(similarity: f64, lowest: f64) -> u8 {
    let width = (1.0 - lowest) / 4.0;
    if width <= 0.0 {
        return 1;
    }
    let bin = ((1.0 - similarity) / width).floor();
    (bin.clamp(0.0, 3.0) as u8) + 1
}

pub fn pairwise_heatmap(positions: &[&PartyPosition], issue: &str) -> Result<HeatmapReport, PositionError> {
    let n = positions.len();
    let with_data = positions.iter().filter(|p| p.vector.is_some()).count();
    if with_data < 2 {
        return Err(PositionError::InsufficientParties {
            issue: issue.to_string(),
            needed: 2,
            found: with_data,
        });
    }
    let mut matrix = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            if let (Some(a), Some(b)) = (&positions[i].vector, &positions[j].vector) {
                let s = cosine(a, b).ok();
                matrix[i][j] = s;
                matrix[j][i] = s;
            }
        }
    }
    let lowest = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .filter_map(|(i, j)| matrix[i][j])
        .fold(1.0f64, f64::min);
    let levels = matrix
        .iter()
        .map(|row| row.iter().map(|s| s.map(|s| level(s, lowest))).collect())
        .collect();
    let width = (1.0 - lowest) / 4.0;
    Ok(HeatmapReport {
        issue: issue.to_string(),
        parties: positions.iter().map(|p| p.party.clone()).collect(),
        matrix,
        levels,
        bin_edges: [lowest, lowest + width, lowest + 2.0 * width, lowest + 3.0 * width, 1.0],
    })
}

/// Words per party on one issue in one period; parties without text are absent.
pub fn party_activity(corpus: &[Comment], tagging: &Tagging, issue: &str, period: Period) -> Vec<(String, usize)> {
    let mut words: BTreeMap<String, usize> = BTreeMap::new();
    for c in corpus {
        if period.contains(&c.meta) && tagging.has(c.id, issue) {
            let n = c.word_count();
            if n == 0 {
                continue;
            }
            for p in c.parties() {
                *words.entry(p.to_string()).or_default() += n;
            }
        }
    }
    words.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UncertaintyParams {
    pub fraction: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for UncertaintyParams {
    fn default() -> Self {
        Self {
            fraction: 0.10,
            reps: 20,
            seed: 0,
        }
    }
}

impl UncertaintyParams {
    pub fn validate(&self) -> Result<(), PositionError> {
        if self.reps == 0 {
            return Err(PositionError::InvalidParams("reps must be ≥ 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(PositionError::InvalidParams(format!(
                "fraction {} not in (0, 1)",
                self.fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyMargin {
    pub party: String,
    pub issue: String,
    pub period: Period,
    pub margin: f64,
    pub reps: usize,
    pub fraction: f64,
}

fn rep_seed(seed: u64, rep: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (rep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Largest shift `1 − cos(original, perturbed)` over `reps` resamplings, each
/// dropping whole comments in random order until about `fraction` of the
/// party's words are gone (at least one comment, never all of them).
#[allow(clippy::too_many_arguments)]
pub fn estimate_uncertainty(
    corpus: &[Comment],
    tagging: &Tagging,
    backend: &DocBackend<'_>,
    party: &str,
    issue: &str,
    period: Period,
    params: &UncertaintyParams,
) -> Result<UncertaintyMargin, PositionError> {
    params.validate()?;
    let pools: Vec<MeanAccumulator> = comment_pools(corpus, tagging, backend, party, issue, period)?
        .into_iter()
        .filter(|p| p.weight() > 0.0)
        .collect();
    let original = merge_all(&pools);
    let margin = |m: f64| UncertaintyMargin {
        party: party.to_string(),
        issue: issue.to_string(),
        period,
        margin: m,
        reps: params.reps,
        fraction: params.fraction,
    };
    if original.weight() <= 1.0 {
        return Ok(margin(0.0));
    }
    if pools.len() < 2 {
        return Err(PositionError::TooLittleData {
            party: party.to_string(),
            issue: issue.to_string(),
        });
    }
    let reference = original.mean().expect("positive weight").to_vec();
    let target = params.fraction * original.weight();
    let shifts: Vec<f64> = (0..params.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(params.seed, rep));
            let mut order: Vec<usize> = (0..pools.len()).collect();
            order.shuffle(&mut rng);
            let mut removed = vec![false; pools.len()];
            let mut removed_weight = 0.0;
            for &i in order.iter().take(pools.len() - 1) {
                removed[i] = true;
                removed_weight += pools[i].weight();
                if removed_weight >= target {
                    break;
                }
            }
            let kept = merge_all(pools.iter().zip(&removed).filter(|(_, &r)| !r).map(|(p, _)| p));
            let perturbed = kept.mean().expect("at least one comment kept");
            cosine(&reference, perturbed).map_or(0.0, |c| (1.0 - c).max(0.0))
        })
        .collect();
    Ok(margin(shifts.into_iter().fold(0.0, f64::max)))
}
