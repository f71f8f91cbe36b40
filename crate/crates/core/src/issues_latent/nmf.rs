use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::CommentId;

use super::{truncated_svd, CsrMatrix, DocTermMatrix, LatentError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmfParams {
    /// Number of topics.
    pub k: usize,
    /// Overall regularization strength.
    pub alpha: f64,
    /// Share of the L1 penalty in the elastic-net mix.
    pub l1_ratio: f64,
    /// Stop when the relative objective decrease of a sweep falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Minimum topic share of a document's weight for membership.
    pub membership_threshold: f64,
}

impl Default for NmfParams {
    fn default() -> Self {
        Self {
            k: 10,
            alpha: 0.1,
            l1_ratio: 0.5,
            tol: 1e-4,
            max_iter: 200,
            membership_threshold: 0.1,
        }
    }
}

impl NmfParams {
    pub fn validate(&self) -> Result<(), LatentError> {
        let bad = |m: String| Err(LatentError::InvalidParams(m));
        if self.k < 2 {
            return bad(format!("k = {} (need ≥ 2)", self.k));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return bad(format!("alpha = {} (need ≥ 0)", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.l1_ratio) {
            return bad(format!("l1_ratio = {} (need [0, 1])", self.l1_ratio));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol = {} (need > 0)", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be ≥ 1".into());
        }
        if !(self.membership_threshold > 0.0 && self.membership_threshold <= 1.0) {
            return bad(format!(
                "membership_threshold = {} (need (0, 1])",
                self.membership_threshold
            ));
        }
        Ok(())
    }

    fn penalties(&self) -> (f64, f64) {
        (self.alpha * self.l1_ratio, self.alpha * (1.0 - self.l1_ratio))
    }
}

/// Fitted factorization `X ≈ W·H`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub doc_ids: Vec<CommentId>,
    pub vocab: Vec<String>,
    /// n_docs × k document-topic weights.
    pub w: Array2<f64>,
    /// k × n_terms topic-term weights.
    pub h: Array2<f64>,
    /// Objective at initialization followed by one value per sweep.
    pub objective_trace: Vec<f64>,
    pub params: NmfParams,
    pub n_iter: usize,
    /// False when `max_iter` was reached before the tolerance.
    pub converged: bool,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.w.ncols()
    }
}

/// Plain NNDSVD initialization (zeros are left as zeros).
///
/// The leading singular pair contributes `√σ₁·|u₁|`, `√σ₁·|v₁|`. Every later
/// pair contributes whichever of its positive or negative sections has the
/// larger product of norms, scaled by `√(σⱼ · that product)`.
pub fn nndsvd_init(x: &CsrMatrix, k: usize) -> Result<(Array2<f64>, Array2<f64>), LatentError> {
    let (n, m) = x.shape();
    let svd = truncated_svd(x, k)?;
    let mut w = Array2::zeros((n, k));
    let mut h = Array2::zeros((k, m));
    if svd.s[k - 1] <= 1e-12 * svd.s[0].max(f64::MIN_POSITIVE) {
        warn!("NNDSVD: matrix has numerical rank below {k}; some initial factors are zero");
    }
    for j in 0..k {
        let sigma = svd.s[j];
        if sigma <= 0.0 {
            continue;
        }
        let u = svd.u.column(j);
        let v = svd.vt.row(j);
        if j == 0 {
            let root = sigma.sqrt();
            w.column_mut(0).assign(&u.mapv(|a| root * a.abs()));
            h.row_mut(0).assign(&v.mapv(|a| root * a.abs()));
            continue;
        }
        let norm = |it: &mut dyn Iterator<Item = f64>| it.map(|a| a * a).sum::<f64>().sqrt();
        let up = norm(&mut u.iter().map(|&a| a.max(0.0)));
        let un = norm(&mut u.iter().map(|&a| (-a).max(0.0)));
        let vp = norm(&mut v.iter().map(|&a| a.max(0.0)));
        let vn = norm(&mut v.iter().map(|&a| (-a).max(0.0)));
        let (mp, mn) = (up * vp, un * vn);
        let (sign, uu, vv, mass) = if mp > mn { (1.0, up, vp, mp) } else { (-1.0, un, vn, mn) };
        if mass <= 0.0 {
            continue;
        }
        let scale = (sigma * mass).sqrt();
        w.column_mut(j).assign(&u.mapv(|a| scale * (sign * a).max(0.0) / uu));
        h.row_mut(j).assign(&v.mapv(|a| scale * (sign * a).max(0.0) / vv));
    }
    Ok((w, h))
}

/// `½‖X − WH‖²_F + α·ρ·(‖W‖₁ + ‖H‖₁) + ½·α·(1 − ρ)·(‖W‖²_F + ‖H‖²_F)`.
pub fn objective(x: &CsrMatrix, w: &Array2<f64>, h: &Array2<f64>, alpha: f64, l1_ratio: f64) -> f64 {
    let (l1, l2) = (alpha * l1_ratio, alpha * (1.0 - l1_ratio));
    let (n, _) = x.shape();
    let mut cross = 0.0;
    for i in 0..n {
        let wi = w.row(i);
        for (j, v) in x.row(i) {
            cross += v * wi.dot(&h.column(j));
        }
    }
    let wtw = w.t().dot(w);
    let hht = h.dot(&h.t());
    let wh_sq: f64 = wtw.iter().zip(hht.iter()).map(|(a, b)| a * b).sum();
    let residual = (x.frobenius_sq() - 2.0 * cross + wh_sq).max(0.0);
    let l1_term = w.sum() + h.sum();
    let l2_term = w.iter().map(|a| a * a).sum::<f64>() + h.iter().map(|a| a * a).sum::<f64>();
    0.5 * residual + l1 * l1_term + 0.5 * l2 * l2_term
}

/// Result of [`fit_nmf_observed`].
#[derive(Debug, Clone)]
pub struct NmfFit {
    pub w: Array2<f64>,
    pub h: Array2<f64>,
    pub objective_trace: Vec<f64>,
    pub n_iter: usize,
    pub converged: bool,
}

/// One cyclic pass of exact coordinate minimization over the columns of `f`,
/// for the subproblem `½ fᵀ·gram·f − cross·f + l1·Σf + ½·l2·‖f‖²`, `f ≥ 0`.
fn hals_sweep(f: &mut Array2<f64>, gram: &Array2<f64>, cross: &Array2<f64>, l1: f64, l2: f64) {
    let (rows, k) = f.dim();
    for t in 0..k {
        let hess = gram[[t, t]] + l2;
        if hess <= 0.0 {
            continue;
        }
        for i in 0..rows {
            let mut g = l1 - cross[[i, t]] + l2 * f[[i, t]];
            for r in 0..k {
                g += f[[i, r]] * gram[[r, t]];
            }
            f[[i, t]] = (f[[i, t]] - g / hess).max(0.0);
        }
    }
}

/// HALS from an explicit starting point. `observer` sees the factors after
/// every sweep.
pub fn fit_nmf_observed<F>(
    x: &CsrMatrix,
    params: &NmfParams,
    w0: Array2<f64>,
    h0: Array2<f64>,
    mut observer: F,
) -> Result<NmfFit, LatentError>
where
    F: FnMut(usize, &Array2<f64>, &Array2<f64>),
{
    params.validate()?;
    let (n, m) = x.shape();
    let k = params.k;
    if w0.dim() != (n, k) || h0.dim() != (k, m) {
        return Err(LatentError::InvalidParams(format!(
            "initial factors {:?}, {:?} do not match X {:?} with k = {k}",
            w0.dim(),
            h0.dim(),
            (n, m)
        )));
    }
    let (l1, l2) = params.penalties();
    let (mut w, mut h) = (w0, h0);
    let mut trace = vec![objective(x, &w, &h, params.alpha, params.l1_ratio)];
    let mut converged = false;
    let mut n_iter = 0;
    for it in 1..=params.max_iter {
        n_iter = it;
        let hht = h.dot(&h.t());
        let xht = x.dot_dense_t(&h);
        hals_sweep(&mut w, &hht, &xht, l1, l2);

        let wtw = w.t().dot(&w);
        let xtw = x.t_dot_dense(&w);
        let mut ht = h.t().to_owned();
        hals_sweep(&mut ht, &wtw, &xtw, l1, l2);
        h = ht.t().to_owned();

        observer(it, &w, &h);
        let f = objective(x, &w, &h, params.alpha, params.l1_ratio);
        let prev = *trace.last().expect("trace starts with the initial objective");
        trace.push(f);
        if prev <= 0.0 || (prev - f) / prev < params.tol {
            converged = true;
            break;
        }
    }
    Ok(NmfFit {
        w,
        h,
        objective_trace: trace,
        n_iter,
        converged,
    })
}

/// NNDSVD-initialized HALS fit of the document-term matrix.
pub fn fit_nmf(dtm: &DocTermMatrix, params: &NmfParams) -> Result<TopicModel, LatentError> {
    params.validate()?;
    let (w0, h0) = nndsvd_init(&dtm.matrix, params.k)?;
    let fit = fit_nmf_observed(&dtm.matrix, params, w0, h0, |_, _, _| {})?;
    if !fit.converged {
        warn!(
            "NMF stopped at max_iter = {} before reaching tol = {}",
            params.max_iter, params.tol
        );
    }
    Ok(TopicModel {
        doc_ids: dtm.doc_ids.clone(),
        vocab: dtm.vocab.clone(),
        w: fit.w,
        h: fit.h,
        objective_trace: fit.objective_trace,
        params: *params,
        n_iter: fit.n_iter,
        converged: fit.converged,
    })
}
