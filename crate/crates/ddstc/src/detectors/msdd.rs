//! Multiple-symbol differential detection: the whitened decision metric and
//! its exhaustive minimizer.

use super::{CovarianceModel, DetectionWindow};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::numerics::{Mat2, Vec2};

/// Hard cap on the exhaustive search space.
const EXHAUSTIVE_GUARD: u128 = 10_000_000;

/// Accumulates the adjoints of the space-time matrices along the window:
/// sh[N-1] = I and sh[i] = sh[i+1] * V[i], so sh[i] = S^H at block i when
/// the last block is the reference.
pub(super) fn accumulate_sh(cand: &[Mat2]) -> Vec<Mat2> {
    let n = cand.len() + 1;
    let mut sh = vec![Mat2::identity(); n];
    for i in (0..n - 1).rev() {
        sh[i] = sh[i + 1].mul(&cand[i]);
    }
    sh
}

/// Decision metric for one candidate, given the S^H matrix at every block.
///
/// Evaluated as sum over the first N-1 blocks of
/// || u_{i,i} S^H[i] y[i] + sum_{j>i} u_{i,j} S^H[j] y[j] ||^2
/// plus the constant u_{N-1,N-1}^2 ||y[N-1]||^2; the constant makes the sum
/// equal the full whitened quadratic form, not just minimizer-equivalent.
pub fn msdd_metric_sh(window: &DetectionWindow, cov: &CovarianceModel, sh: &[Mat2]) -> f64 {
    let n = window.len();
    debug_assert_eq!(sh.len(), n);
    debug_assert_eq!(cov.n, n);
    let w: Vec<Vec2> = (0..n).map(|i| sh[i].mul_vec(window.y(i))).collect();
    let unn = cov.u.get(n - 1, n - 1);
    let mut metric = unn * unn * window.y(n - 1).norm_sq();
    for i in 0..n - 1 {
        let mut t = w[i].scale_re(cov.u.get(i, i));
        for j in i + 1..n {
            t = t.add(&w[j].scale_re(cov.u.get(i, j)));
        }
        metric += t.norm_sq();
    }
    metric
}

/// Decision metric for a candidate codeword-matrix sequence V[0..N-2].
pub fn msdd_metric(window: &DetectionWindow, cov: &CovarianceModel, cand: &[Mat2]) -> f64 {
    msdd_metric_sh(window, cov, &accumulate_sh(cand))
}

/// The same quantity evaluated as the dense quadratic form
/// ybar^H Sbar (C^{-1} x I_2) Sbar^H ybar, with C^{-1} assembled from the
/// whitening factor. Reference implementation for tests; O(N^2) per call.
pub fn msdd_metric_dense(window: &DetectionWindow, cov: &CovarianceModel, cand: &[Mat2]) -> f64 {
    let n = window.len();
    let sh = accumulate_sh(cand);
    let w: Vec<Vec2> = (0..n).map(|i| sh[i].mul_vec(window.y(i))).collect();
    let mut metric = 0.0;
    for i in 0..n {
        for j in 0..n {
            // (C^{-1})_{i,j} = sum_k u_{k,i} u_{k,j}.
            let mut cinv = 0.0;
            for k in 0..n {
                cinv += cov.u.get(k, i) * cov.u.get(k, j);
            }
            metric += cinv * w[i].dot_h(&w[j]).re;
        }
    }
    metric
}

/// Exact minimizer of [`msdd_metric`] by full enumeration of the L^(N-1)
/// candidate sequences in lexicographic index order; ties keep the first
/// (lexicographically smallest) sequence.
pub fn detect_msdd_exhaustive(
    window: &DetectionWindow,
    cov: &CovarianceModel,
    cb: &Codebook,
) -> Result<Vec<usize>> {
    let n = window.len();
    if cov.n != n {
        return Err(Error::Domain(format!(
            "covariance built for N = {}, window has N = {n}",
            cov.n
        )));
    }
    let slots = n - 1;
    let space = (cb.len() as u128).pow(slots as u32);
    if space > EXHAUSTIVE_GUARD {
        return Err(Error::Config(format!(
            "exhaustive search space {space} exceeds guard {EXHAUSTIVE_GUARD}"
        )));
    }
    let mut indices = vec![0usize; slots];
    let mut mats: Vec<Mat2> = indices.iter().map(|&i| cb.codeword(i).v).collect();
    let mut best_metric = f64::INFINITY;
    let mut best = indices.clone();
    loop {
        let m = msdd_metric(window, cov, &mats);
        if m < best_metric {
            best_metric = m;
            best.copy_from_slice(&indices);
        }
        // Odometer increment from the rightmost slot keeps the order
        // lexicographic.
        let mut pos = slots;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < cb.len() {
                mats[pos] = cb.codeword(indices[pos]).v;
                break;
            }
            indices[pos] = 0;
            mats[pos] = cb.codeword(0).v;
        }
    }
}
