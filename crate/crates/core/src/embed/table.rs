use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use rayon::prelude::*;

use super::{cosine_with_norms, dot, EmbedError};

/// Term → vector map in GloVe text layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(term, vector)` pairs; later duplicates replace earlier ones.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = Self {
            dim: 0,
            terms: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            sq_norms: Vec::new(),
        };
        for (line, (term, v)) in entries.into_iter().enumerate() {
            table.insert(line + 1, term.into(), v)?;
        }
        table.check()?;
        Ok(table)
    }

    fn insert(&mut self, line: usize, term: String, v: Vec<f64>) -> Result<(), EmbedError> {
        if term.is_empty() || v.is_empty() {
            return Err(EmbedError::ParseError(line));
        }
        if self.terms.is_empty() {
            self.dim = v.len();
        } else if v.len() != self.dim {
            return Err(EmbedError::DimensionMismatch {
                line,
                expected: self.dim,
                found: v.len(),
            });
        }
        let n2 = dot(&v, &v);
        if let Some(&i) = self.index.get(&term) {
            warn!("duplicate embedding term `{term}` on line {line}; keeping the later vector");
            self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(&v);
            self.sq_norms[i] = n2;
        } else {
            self.index.insert(term.clone(), self.terms.len());
            self.terms.push(term);
            self.data.extend_from_slice(&v);
            self.sq_norms.push(n2);
        }
        Ok(())
    }

    fn check(&self) -> Result<(), EmbedError> {
        if self.terms.is_empty() || self.sq_norms.iter().all(|&n| n == 0.0) {
            return Err(EmbedError::Degenerate);
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.index.get(term).map(|&i| self.row(i))
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.terms.iter().enumerate().map(|(i, t)| (t.as_str(), self.row(i)))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// A copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out.sq_norms = (0..out.len()).map(|i| dot(out.row(i), out.row(i))).collect();
        out
    }

    /// Terms similar to `term`, best first.
    ///
    /// All terms with cosine ≥ `min_sim` are collected; when there are more
    /// than `cap` of them the threshold is raised to `raise_to` and the scan
    /// repeated. Ties are ordered by term.
    pub fn neighbors(&self, term: &str, q: &NeighborQuery) -> Result<Neighbors, EmbedError> {
        q.validate()?;
        let &i = self
            .index
            .get(term)
            .ok_or_else(|| EmbedError::UnknownTerm(term.to_string()))?;
        let qn = self.sq_norms[i];
        if qn == 0.0 {
            return Err(EmbedError::ZeroVector);
        }
        let query = self.row(i);
        let sims: Vec<(usize, f64)> = (0..self.len())
            .into_par_iter()
            .filter(|&j| j != i && self.sq_norms[j] > 0.0)
            .map(|j| (j, cosine_with_norms(dot(query, self.row(j)), qn, self.sq_norms[j])))
            .filter(|&(_, s)| s >= q.min_sim)
            .collect();
        let base_count = sims.len();
        let (threshold, raised) = if base_count > q.cap {
            (q.raise_to, true)
        } else {
            (q.min_sim, false)
        };
        let mut hits: Vec<(String, f64)> = sims
            .into_iter()
            .filter(|&(_, s)| s >= threshold)
            .map(|(j, s)| (self.terms[j].clone(), s))
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Neighbors {
            hits,
            threshold,
            raised,
            base_count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborQuery {
    pub min_sim: f64,
    pub raise_to: f64,
    pub cap: usize,
}

impl Default for NeighborQuery {
    fn default() -> Self {
        Self {
            min_sim: 0.4,
            raise_to: 0.6,
            cap: 1000,
        }
    }
}

impl NeighborQuery {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let ok = |x: f64| x > 0.0 && x <= 1.0;
        if !ok(self.min_sim) || !ok(self.raise_to) || self.min_sim > self.raise_to {
            return Err(EmbedError::InvalidQuery(format!(
                "need 0 < min_sim ≤ raise_to ≤ 1, got {} and {}",
                self.min_sim, self.raise_to
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub hits: Vec<(String, f64)>,
    /// Threshold actually applied.
    pub threshold: f64,
    pub raised: bool,
    /// Number of terms at or above `min_sim`.
    pub base_count: usize,
}

/// Parses GloVe text format: `term v1 ... vd` per line.
pub fn read_table<R: Read>(input: R) -> Result<EmbeddingTable, EmbedError> {
    let mut table = EmbeddingTable {
        dim: 0,
        terms: Vec::new(),
        index: HashMap::new(),
        data: Vec::new(),
        sq_norms: Vec::new(),
    };
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let Some(term) = parts.next() else {
            continue;
        };
        let v: Vec<f64> = parts
            .map(|p| p.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or(EmbedError::ParseError(line_no))?;
        table.insert(line_no, term.to_string(), v)?;
    }
    table.check()?;
    Ok(table)
}

pub fn load_table(path: &Path) -> Result<EmbeddingTable, EmbedError> {
    read_table(File::open(path)?)
}

/// Writes a table in the same text format, with round-trip float formatting.
pub fn write_table<W: Write>(table: &EmbeddingTable, out: W) -> Result<(), EmbedError> {
    let mut w = BufWriter::new(out);
    for (term, v) in table.iter() {
        write!(w, "{term}")?;
        for x in v {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
