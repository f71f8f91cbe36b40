//! Rank-k truncated SVD.
//!
//! Small matrices go through a dense one-sided Jacobi SVD. Larger ones use a
//! randomized range finder with subspace (power) iterations, followed by a
//! dense SVD of the projected matrix.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CsrMatrix, LatentError};

const DENSE_MAX_ENTRIES: usize = 40_000;
const JACOBI_MAX_SWEEPS: usize = 60;
const OVERSAMPLE: usize = 10;
const POWER_ITERS: usize = 7;
const SKETCH_SEED: u64 = 0x5eed_5eed;

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// n × k left singular vectors.
    pub u: Array2<f64>,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// k × m right singular vectors (as rows).
    pub vt: Array2<f64>,
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn to_nd(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// One-sided Jacobi on the columns of a tall matrix (`n ≥ m`): rotates column
/// pairs until all are mutually orthogonal, so `A·V = U·Σ`.
fn jacobi_tall(a: &Array2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (n, m) = a.dim();
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    let rotate = |x: &mut Vec<Vec<f64>>, p: usize, q: usize, c: f64, s: f64| {
        let (lo, hi) = x.split_at_mut(q);
        for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
            let (a, b) = (*xp, *xq);
            *xp = c * a - s * b;
            *xq = s * a + c * b;
        }
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let u = Array2::from_shape_fn(
        (n, m),
        |(i, j)| if sigma[j] > 0.0 { cols[j][i] / sigma[j] } else { 0.0 },
    );
    let vt = Array2::from_shape_fn((m, m), |(j, i)| v[j][i]);
    (u, sigma, vt)
}

fn dense_svd(a: &Array2<f64>, k: usize) -> TruncatedSvd {
    let (n, m) = a.dim();
    let (u, s, vt) = if n >= m {
        jacobi_tall(a)
    } else {
        let (u, s, vt) = jacobi_tall(&a.t().to_owned());
        (vt.t().to_owned(), s, u.t().to_owned())
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(k);
    TruncatedSvd {
        u: Array2::from_shape_fn((u.nrows(), k), |(i, t)| u[[i, order[t]]]),
        s: order.iter().map(|&t| s[t]).collect(),
        vt: Array2::from_shape_fn((k, vt.ncols()), |(t, j)| vt[[order[t], j]]),
    }
}

fn orthonormalize(y: Array2<f64>) -> Array2<f64> {
    to_nd(&to_na(&y).qr().q())
}

fn randomized_svd(x: &CsrMatrix, k: usize) -> Result<TruncatedSvd, LatentError> {
    let (n, m) = x.shape();
    let l = (k + OVERSAMPLE).min(n).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
    let omega = Array2::from_shape_fn((m, l), |_| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(x.dot_dense(&omega));
    for _ in 0..POWER_ITERS {
        let z = orthonormalize(x.t_dot_dense(&q));
        q = orthonormalize(x.dot_dense(&z));
    }
    // Bᵀ = Xᵀ Q is m × l; its SVD Bᵀ = U_b Σ V_bᵀ gives X ≈ (Q V_b) Σ U_bᵀ.
    let bt = x.t_dot_dense(&q);
    let small = dense_svd(&bt, l);
    let v_b = small.vt.t().to_owned();
    let u = q.dot(&v_b);
    Ok(TruncatedSvd {
        u: u.slice(ndarray::s![.., ..k]).to_owned(),
        s: small.s[..k].to_vec(),
        vt: small.u.t().slice(ndarray::s![..k, ..]).to_owned(),
    })
}

/// Leading `k` singular triplets of `x`.
pub fn truncated_svd(x: &CsrMatrix, k: usize) -> Result<TruncatedSvd, LatentError> {
    let (n, m) = x.shape();
    let max = n.min(m);
    if k == 0 || k > max {
        return Err(LatentError::RankTooLarge { k, max });
    }
    if n * m <= DENSE_MAX_ENTRIES || max <= k + OVERSAMPLE {
        Ok(dense_svd(&x.to_dense(), k))
    } else {
        randomized_svd(x, k)
    }
}
