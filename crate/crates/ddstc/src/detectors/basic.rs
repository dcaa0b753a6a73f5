//! Single-block detectors: the genie-aided coherent benchmark and
//! conventional two-symbol differential detection.

use crate::codebook::Codebook;
use crate::error::Result;
use crate::network::{NetworkParams, RxBlock};
use crate::numerics::{Mat2, Vec2};
use num_complex::Complex64;

/// Coherent benchmark: with the cascaded channel known (genie) and the
/// previous space-time matrix given, picks the codeword minimizing
/// || y - c sqrt(P0 R) V S_prev h ||^2. Ties break to the lowest index.
pub fn detect_coherent(
    params: &NetworkParams,
    block: &RxBlock,
    prev_s: &Mat2,
    cb: &Codebook,
) -> Result<usize> {
    let genie = block.genie()?;
    let h = Vec2([genie.h[0], genie.h[1]]);
    let gain = Complex64::new(params.c * params.source_gain(), 0.0);
    let sh = prev_s.mul_vec(&h).scale(gain);
    let mut best = (f64::INFINITY, 0usize);
    for cw in cb.codewords() {
        let m = block.y.sub(&cw.v.mul_vec(&sh)).norm_sq();
        if m < best.0 {
            best = (m, cw.index);
        }
    }
    Ok(best.1)
}

/// Two-symbol differential detection: argmin over V of || y[k] - V y[k-1] ||^2.
/// Assumes the channel is static across the two blocks; fast fading turns
/// that mismatch into an error floor. Ties break to the lowest index.
pub fn detect_cdd(y_k: &Vec2, y_km1: &Vec2, cb: &Codebook) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for cw in cb.codewords() {
        let m = y_k.sub(&cw.v.mul_vec(y_km1)).norm_sq();
        if m < best.0 {
            best = (m, cw.index);
        }
    }
    best.1
}
