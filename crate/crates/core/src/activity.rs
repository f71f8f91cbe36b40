//! Issue labels per comment and word-count activity tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Comment, CommentId, SessionMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    All,
    Year(i32),
    YearMonth(i32, u32),
}

impl Period {
    pub fn contains(&self, meta: &SessionMeta) -> bool {
        match *self {
            Period::All => true,
            Period::Year(y) => meta.year == y,
            Period::YearMonth(y, m) => meta.year == y && meta.month == m,
        }
    }

    pub fn of(meta: &SessionMeta, by: GroupBy) -> Period {
        match by {
            GroupBy::All => Period::All,
            GroupBy::Year => Period::Year(meta.year),
            GroupBy::YearMonth => Period::YearMonth(meta.year, meta.month),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::All => f.write_str("all"),
            Period::Year(y) => write!(f, "{y}"),
            Period::YearMonth(y, m) => write!(f, "{y}-{m:02}"),
        }
    }
}

impl std::str::FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(Period::All);
        }
        let bad = || format!("bad period `{s}` (expected all, YYYY or YYYY-MM)");
        match s.split_once('-') {
            None => s.parse().map(Period::Year).map_err(|_| bad()),
            Some((y, m)) => {
                let y = y.parse().map_err(|_| bad())?;
                let m: u32 = m.parse().map_err(|_| bad())?;
                if !(1..=12).contains(&m) {
                    return Err(bad());
                }
                Ok(Period::YearMonth(y, m))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    All,
    #[default]
    Year,
    YearMonth,
}

/// Issue labels attached to comments. Both the query-driven and the latent
/// analyses produce one of these; everything downstream only sees labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tagging {
    /// Issue labels in display order.
    pub issues: Vec<String>,
    pub by_comment: BTreeMap<CommentId, BTreeSet<String>>,
}

impl Tagging {
    pub fn has(&self, id: CommentId, issue: &str) -> bool {
        self.by_comment.get(&id).is_some_and(|s| s.contains(issue))
    }

    pub fn labels(&self, id: CommentId) -> impl Iterator<Item = &str> {
        self.by_comment
            .get(&id)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActivityRow {
    pub issue: String,
    pub period: Period,
    pub words: usize,
}

/// Words per (issue, period). A comment carrying several labels counts fully
/// for each of them; periods without tagged text produce no row.
pub fn activity(corpus: &[Comment], tagging: &Tagging, group_by: GroupBy) -> Vec<ActivityRow> {
    let mut acc: BTreeMap<(usize, Period), usize> = BTreeMap::new();
    let order: BTreeMap<&str, usize> = tagging
        .issues
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    for c in corpus {
        let period = Period::of(&c.meta, group_by);
        let words = c.word_count();
        for label in tagging.labels(c.id) {
            if let Some(&i) = order.get(label) {
                *acc.entry((i, period)).or_default() += words;
            }
        }
    }
    acc.into_iter()
        .map(|((i, period), words)| ActivityRow {
            issue: tagging.issues[i].clone(),
            period,
            words,
        })
        .collect()
}
