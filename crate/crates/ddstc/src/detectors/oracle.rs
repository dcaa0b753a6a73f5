//! Monte-Carlo approximation of exact maximum-likelihood window detection.
//!
//! Conditioned on the realized relay-destination gains, the stacked window
//! observation is Gaussian with a candidate-dependent covariance; the exact
//! likelihood is the expectation of that Gaussian density over the gains and
//! has no closed form. This oracle approximates the expectation by averaging
//! the conditional density over seeded gain draws shared across candidates,
//! and exists to measure how close the whitened-metric detectors come to
//! exact ML. Small windows only.

use super::DetectionWindow;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::fading::{jakes_autocorr, DopplerSpec};
use crate::network::{complex_gaussian, NetworkParams};
use crate::numerics::{cholesky_lower_dense, CholeskyC, ComplexMat};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap on the enumerated candidate count.
const CANDIDATE_GUARD: u128 = 10_000;
/// Minimum draw count for a meaningful expectation estimate.
const MIN_DRAWS: usize = 1000;

/// Conditional channel covariance given one relay-destination gain draw:
/// per relay, entry (k, k') is g[k] g*[k'] phi_sr(|k - k'|); relays do not
/// mix. The relay that forwards conjugated signals contributes conjugated
/// source-relay coefficients, which leaves this covariance unchanged because
/// the lags are real.
fn sigma_h(g: &[Vec<Complex64>; 2], q_lags: &[f64]) -> ComplexMat {
    let n = q_lags.len();
    let mut out = ComplexMat::zeros(2 * n, 2 * n);
    for i in 0..2 {
        for k in 0..n {
            for kp in 0..n {
                out.set(
                    2 * k + i,
                    2 * kp + i,
                    g[i][k] * g[i][kp].conj() * q_lags[k.abs_diff(kp)],
                );
            }
        }
    }
    out
}

/// Draws one correlated gain sequence of length n with Jakes lags.
fn draw_gain_sequence(
    chol_g: &Option<Vec<f64>>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    match chol_g {
        None => {
            // Zero Doppler: one draw held constant.
            let v = complex_gaussian(rng, 1.0);
            vec![v; n]
        }
        Some(l) => {
            let eps: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng, 1.0)).collect();
            (0..n)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..=k {
                        acc += eps[j] * l[k * n + j];
                    }
                    acc
                })
                .collect()
        }
    }
}

/// Monte-Carlo ML window detection. Returns the codeword index sequence
/// maximizing the draw-averaged conditional likelihood; ties break to the
/// lexicographically smallest sequence.
pub fn ml_oracle_mc(
    window: &DetectionWindow,
    params: &NetworkParams,
    dopplers: &DopplerSpec,
    cb: &Codebook,
    draws: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = window.len();
    let slots = n - 1;
    let candidates = (cb.len() as u128).pow(slots as u32);
    if candidates > CANDIDATE_GUARD {
        return Err(Error::Config(format!(
            "candidate count {candidates} exceeds oracle guard {CANDIDATE_GUARD}"
        )));
    }
    if draws < MIN_DRAWS {
        return Err(Error::Config(format!(
            "oracle needs at least {MIN_DRAWS} draws, got {draws}"
        )));
    }

    let q_lags: Vec<f64> = (0..n)
        .map(|lag| jakes_autocorr(dopplers.f_sr, lag, params.relays))
        .collect::<Result<_>>()?;
    let chol_g = if dopplers.f_rd == 0.0 {
        None
    } else {
        let g_lags: Vec<f64> = (0..n)
            .map(|lag| jakes_autocorr(dopplers.f_rd, lag, params.relays))
            .collect::<Result<_>>()?;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = g_lags[i.abs_diff(j)];
            }
        }
        Some(cholesky_lower_dense(n, &dense)?)
    };

    // Stacked observation, block-major.
    let mut ybar = vec![Complex64::new(0.0, 0.0); 2 * n];
    for k in 0..n {
        ybar[2 * k] = window.y(k).0[0];
        ybar[2 * k + 1] = window.y(k).0[1];
    }

    // All candidate space-time matrix stacks, lexicographic order. The first
    // block is the reference (S[0] = I).
    let mut cand_indices: Vec<Vec<usize>> = Vec::with_capacity(candidates as usize);
    let mut cand_smats: Vec<Vec<crate::numerics::Mat2>> = Vec::with_capacity(candidates as usize);
    let mut idx = vec![0usize; slots];
    loop {
        let mut smats = Vec::with_capacity(n);
        smats.push(crate::numerics::Mat2::identity());
        for k in 0..slots {
            let next = cb.codeword(idx[k]).v.mul(&smats[k]);
            smats.push(next);
        }
        cand_indices.push(idx.clone());
        cand_smats.push(smats);
        let mut pos = slots;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cb.len() {
                break;
            }
            idx[pos] = 0;
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }

    let signal = params.c * params.c * params.p0 * params.relays as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // logliks[c][d]: conditional log-density of the window under candidate c
    // and gain draw d (up to a constant common to all candidates).
    let mut logliks = vec![Vec::with_capacity(draws); cand_indices.len()];
    for _ in 0..draws {
        let g = [
            draw_gain_sequence(&chol_g, n, &mut rng),
            draw_gain_sequence(&chol_g, n, &mut rng),
        ];
        let sh = sigma_h(&g, &q_lags);
        let sigma2_w: Vec<f64> = (0..n)
            .map(|k| params.noise_variance(&[g[0][k], g[1][k]]))
            .collect();
        for (c, smats) in cand_smats.iter().enumerate() {
            // Sigma_y = signal * Sbar Sigma_h Sbar^H + Sigma_w, assembled
            // 2x2-blockwise so the block-diagonal Sbar is never stored.
            let mut sigma = ComplexMat::zeros(2 * n, 2 * n);
            for k in 0..n {
                for kp in 0..n {
                    let sa = &smats[k].0;
                    let sb = &smats[kp].0;
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for x in 0..2 {
                                for y in 0..2 {
                                    acc += sa[a * 2 + x]
                                        * sh.get(2 * k + x, 2 * kp + y)
                                        * sb[b * 2 + y].conj();
                                }
                            }
                            sigma.set(2 * k + a, 2 * kp + b, acc * signal);
                        }
                    }
                }
                for a in 0..2 {
                    let d = sigma.get(2 * k + a, 2 * k + a) + sigma2_w[k];
                    sigma.set(2 * k + a, 2 * k + a, d);
                }
            }
            let ch = CholeskyC::factor(&sigma)?;
            let x = ch.solve(&ybar);
            let quad: f64 = ybar
                .iter()
                .zip(&x)
                .map(|(y, xi)| (y.conj() * xi).re)
                .sum();
            logliks[c].push(-quad - ch.log_det());
        }
    }

    // Average the likelihood over draws in log space, then take the best
    // candidate; lexicographic order plus strict improvement breaks ties.
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (c, ll) in logliks.iter().enumerate() {
        let mx = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg = mx + (ll.iter().map(|v| (v - mx).exp()).sum::<f64>() / draws as f64).ln();
        if avg > best.0 {
            best = (avg, c);
        }
    }
    Ok(cand_indices[best.1].clone())
}
