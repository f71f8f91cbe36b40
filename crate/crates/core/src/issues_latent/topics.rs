use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, ArrayView1};

use crate::activity::{activity, ActivityRow, GroupBy, Tagging};
use crate::corpus::{Comment, CommentId};

use super::TopicModel;

/// Topic memberships per comment.
pub type Assignments = BTreeMap<CommentId, BTreeSet<usize>>;

pub fn topic_label(k: usize) -> String {
    format!("topic_{k}")
}

/// Top `n` terms of each topic by weight in `H`, ties by term.
pub fn topic_keywords(model: &TopicModel, n: usize) -> Vec<Vec<(String, f64)>> {
    model
        .h
        .rows()
        .into_iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| {
                row[b]
                    .total_cmp(&row[a])
                    .then_with(|| model.vocab[a].cmp(&model.vocab[b]))
            });
            idx.into_iter()
                .take(n)
                .map(|j| (model.vocab[j].clone(), row[j]))
                .collect()
        })
        .collect()
}

fn purity(row: ArrayView1<f64>, k: usize) -> f64 {
    let total = row.sum();
    if total > 0.0 {
        row[k] / total
    } else {
        0.0
    }
}

/// Document `d` belongs to topic `k` when `W[d,k]` is at least `threshold`
/// of the row total. All-zero rows belong nowhere.
pub fn assign_topics(model: &TopicModel, threshold: f64) -> Assignments {
    model
        .doc_ids
        .iter()
        .zip(model.w.rows())
        .map(|(&id, row)| {
            let total = row.sum();
            let set = if total > 0.0 {
                (0..row.len()).filter(|&k| row[k] / total >= threshold).collect()
            } else {
                BTreeSet::new()
            };
            (id, set)
        })
        .collect()
}

/// Comments most specific to topic `k`: ranked by purity `W[d,k] / Σⱼ W[d,j]`,
/// then by `W[d,k]`, then by id. Documents with no weight on `k` are skipped.
pub fn representative_comments(model: &TopicModel, k: usize, n: usize) -> Vec<CommentId> {
    let mut ranked: Vec<(f64, f64, CommentId)> = model
        .doc_ids
        .iter()
        .zip(model.w.rows())
        .filter(|(_, row)| row[k] > 0.0)
        .map(|(&id, row)| (purity(row, k), row[k], id))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    ranked.into_iter().take(n).map(|r| r.2).collect()
}

/// Jaccard overlap of the document sets of every pair of topics (0/0 → 0).
pub fn topic_overlap(assignments: &Assignments, k: usize) -> Array2<f64> {
    let mut sets: Vec<BTreeSet<CommentId>> = vec![BTreeSet::new(); k];
    for (&id, topics) in assignments {
        for &t in topics {
            if t < k {
                sets[t].insert(id);
            }
        }
    }
    Array2::from_shape_fn((k, k), |(i, j)| {
        let inter = sets[i].intersection(&sets[j]).count();
        let union = sets[i].union(&sets[j]).count();
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    })
}

pub fn topic_tagging(assignments: &Assignments, k: usize) -> Tagging {
    Tagging {
        issues: (0..k).map(topic_label).collect(),
        by_comment: assignments
            .iter()
            .map(|(&id, ts)| (id, ts.iter().map(|&t| topic_label(t)).collect()))
            .collect(),
    }
}

pub fn latent_activity(assignments: &Assignments, k: usize, corpus: &[Comment], group_by: GroupBy) -> Vec<ActivityRow> {
    activity(corpus, &topic_tagging(assignments, k), group_by)
}
