//! Embedding-space diagnostics: where vectors point, and how fast averages
//! of many word vectors settle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::embed::{cosine, EmbeddingTable};

#[derive(Debug, Error, PartialEq)]
pub enum DiagError {
    #[error("token stream has no in-vocabulary tokens")]
    EmptyStream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyHistogram {
    /// `counts[j]`: vectors whose largest component is `j`.
    pub counts: Vec<usize>,
}

impl AnisotropyHistogram {
    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Pearson chi-square statistic against a uniform spread and its p-value.
    pub fn chi_square_uniform(&self) -> (f64, f64) {
        let d = self.dimension();
        let expected = self.total() as f64 / d as f64;
        if d < 2 || expected == 0.0 {
            return (0.0, 1.0);
        }
        let stat: f64 = self
            .counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p = ChiSquared::new((d - 1) as f64).map_or(1.0, |dist| dist.sf(stat));
        (stat, p)
    }
}

/// Index of the largest component, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = j;
        }
    }
    best
}

pub fn anisotropy(table: &EmbeddingTable) -> AnisotropyHistogram {
    let mut counts = vec![0; table.dimension()];
    for (_, v) in table.iter() {
        counts[argmax(v)] += 1;
    }
    AnisotropyHistogram { counts }
}

/// Prefix means of a token stream; OOV tokens are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningMeanSeries {
    /// `means[n - 1]` is the mean of the first `n` in-vocabulary vectors.
    pub means: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl RunningMeanSeries {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn max_component(&self) -> Vec<f64> {
        self.means
            .iter()
            .map(|m| m.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    pub fn min_component(&self) -> Vec<f64> {
        self.means
            .iter()
            .map(|m| m.iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        self.means.iter().map(|m| m[j]).collect()
    }
}

fn in_vocab<'a, S: AsRef<str>>(table: &'a EmbeddingTable, stream: &'a [S]) -> impl Iterator<Item = &'a [f64]> + 'a {
    stream.iter().filter_map(|t| table.get(t.as_ref()))
}

pub fn running_mean<S: AsRef<str>>(table: &EmbeddingTable, stream: &[S]) -> Result<RunningMeanSeries, DiagError> {
    let mut means: Vec<Vec<f64>> = Vec::new();
    for v in in_vocab(table, stream) {
        let next = match means.last() {
            None => v.to_vec(),
            Some(prev) => {
                let n = (means.len() + 1) as f64;
                prev.iter().zip(v).map(|(m, x)| (n - 1.0) / n * m + x / n).collect()
            }
        };
        means.push(next);
    }
    if means.is_empty() {
        return Err(DiagError::EmptyStream);
    }
    let skipped = stream.len() - means.len();
    Ok(RunningMeanSeries { means, skipped })
}

/// Cosine between the two running means at every common prefix length.
/// A zero mean has no direction and scores 0.
pub fn running_mean_similarity<S: AsRef<str>>(
    table: &EmbeddingTable,
    stream1: &[S],
    stream2: &[S],
) -> Result<Vec<f64>, DiagError> {
    let a = running_mean(table, stream1)?;
    let b = running_mean(table, stream2)?;
    Ok(a.means
        .iter()
        .zip(&b.means)
        .map(|(u, v)| cosine(u, v).unwrap_or(0.0))
        .collect())
}

fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Variance of the last `frac` of a series over the variance of its first
/// `frac`. Small values mean the series has settled.
pub fn settling_ratio(series: &[f64], frac: f64) -> f64 {
    let k = ((series.len() as f64 * frac).round() as usize).max(1).min(series.len());
    let head = variance(&series[..k]);
    let tail = variance(&series[series.len() - k..]);
    if head == 0.0 {
        if tail == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        tail / head
    }
}

/// Least-squares slope of `series[from..]` against position.
pub fn trend_slope(series: &[f64], from: usize) -> f64 {
    let ys = &series[from.min(series.len())..];
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Draws `n` tokens from the table's terms with Zipf weights `1 / rank^s`,
/// rank following table order (frequency order for most published tables).
pub fn sample_stream(table: &EmbeddingTable, n: usize, exponent: f64, seed: u64) -> Vec<String> {
    let terms = table.terms();
    let mut cdf = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for r in 1..=terms.len() {
        acc += (r as f64).powf(-exponent);
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(terms.len() - 1);
            terms[i].clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn toy() -> EmbeddingTable {
        EmbeddingTable::from_entries([("a", vec![1.0, 0.0]), ("b", vec![1.0, 0.0]), ("c", vec![0.0, 1.0])]).unwrap()
    }

    #[test]
    fn anisotropy_counts() {
        assert_eq!(anisotropy(&toy()).counts, vec![2, 1]);
        let basis = EmbeddingTable::from_entries((0..5).map(|j| {
            let mut v = vec![0.0; 5];
            v[j] = 1.0;
            (format!("t{j}"), v)
        }))
        .unwrap();
        let h = anisotropy(&basis);
        assert_eq!(h.counts, vec![1; 5]);
        assert_eq!(h.chi_square_uniform().0, 0.0);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
        assert_eq!(argmax(&[-1.0, -0.5, -0.5]), 1);
    }

    #[test]
    fn running_mean_examples() {
        let t = toy();
        let s = running_mean(&t, &["a", "c"]).unwrap();
        assert_eq!(s.means, vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        let flat = running_mean(&t, &["c"; 7]).unwrap();
        assert!(flat.means.iter().all(|m| m == &vec![0.0, 1.0]));
        assert_eq!(running_mean(&t, &["zz", "a"]).unwrap().skipped, 1);
        assert_eq!(running_mean(&t, &["zz"]), Err(DiagError::EmptyStream));
        let empty: [&str; 0] = [];
        assert_eq!(running_mean(&t, &empty), Err(DiagError::EmptyStream));
    }

    #[test]
    fn similarity_examples() {
        let t = toy();
        let s = running_mean_similarity(&t, &["a"], &["c"]).unwrap();
        assert_eq!(s, vec![0.0]);
        let same = ["a", "c", "b", "c"];
        assert!(running_mean_similarity(&t, &same, &same)
            .unwrap()
            .iter()
            .all(|&x| x == 1.0));
    }

    #[test]
    fn slope_and_ratio() {
        let up: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        assert!((trend_slope(&up, 0) - 0.5).abs() < 1e-12);
        assert_eq!(
            settling_ratio(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.2),
            0.0
        );
    }

    proptest! {
        #[test]
        fn recurrence_holds(
            vecs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..6),
            stream in prop::collection::vec(0usize..6, 1..60),
        ) {
            let table = EmbeddingTable::from_entries(
                vecs.iter().enumerate().map(|(i, v)| (format!("w{i}"), v.clone())),
            );
            prop_assume!(table.is_ok());
            let table = table.unwrap();
            let toks: Vec<String> = stream.iter().map(|i| format!("w{i}")).collect();
            match running_mean(&table, &toks) {
                Err(e) => prop_assert_eq!(e, DiagError::EmptyStream),
                Ok(s) => {
                    let inv: Vec<&[f64]> = toks.iter().filter_map(|t| table.get(t)).collect();
                    prop_assert_eq!(s.len(), inv.len());
                    for (n, v) in inv.iter().enumerate().skip(1) {
                        let nf = (n + 1) as f64;
                        for (j, x) in v.iter().enumerate() {
                            let expect = (nf - 1.0) / nf * s.means[n - 1][j] + x / nf;
                            prop_assert!((s.means[n][j] - expect).abs() <= 1e-12);
                        }
                    }
                    let h = anisotropy(&table);
                    prop_assert_eq!(h.total(), table.len());
                }
            }
        }

        #[test]
        fn similarity_bounded(seed in 0u64..1000) {
            let t = toy();
            let terms = ["a", "b", "c", "zz"];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s1: Vec<&str> = (0..30).map(|_| terms[rng.random_range(0..4)]).collect();
            let s2: Vec<&str> = (0..30).map(|_| terms[rng.random_range(0..4)]).collect();
            if let Ok(sim) = running_mean_similarity(&t, &s1, &s2) {
                prop_assert!(sim.iter().all(|x| (-1.0..=1.0).contains(x)));
            }
        }
    }
}
