//! Averaged covariance model used by the multiple-symbol detectors.
//!
//! The cascaded channel autocorrelation at a lag of n blocks is the product
//! of the two hop autocorrelations; the received-signal covariance across a
//! window of N blocks is then
//!
//!   C = c^2 P0 R C_h + N0 (1 + c^2 R) I_N
//!
//! with C_h Toeplitz in those product lags. The detectors consume the
//! upper-triangular factor U with U^T U = C^{-1}.

use crate::error::Result;
use crate::fading::{jakes_autocorr, DopplerSpec};
use crate::network::NetworkParams;
use crate::numerics::{cholesky_upper_of_inverse, toeplitz_from_lags, HermitianToeplitz, UpperTriangular};

/// Covariance of a detection window plus its whitening factor.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    pub n: usize,
    /// Cascaded-channel lags phi_sr(n) * phi_rd(n), n = 0..N-1.
    pub h_lags: Vec<f64>,
    /// The window covariance C as a symmetric Toeplitz matrix.
    pub c: HermitianToeplitz,
    /// Upper-triangular U with U^T U = C^{-1}, positive diagonal.
    pub u: UpperTriangular,
    /// Parameters the model was built from.
    pub params: NetworkParams,
    pub dopplers: DopplerSpec,
}

/// Assembles the window covariance and its whitening factor.
pub fn build_covariance(
    params: &NetworkParams,
    dopplers: &DopplerSpec,
    n: usize,
) -> Result<CovarianceModel> {
    if n == 0 {
        return Err(crate::error::Error::Domain(
            "covariance window must span at least one block".into(),
        ));
    }
    let r = params.relays as f64;
    let signal = params.c * params.c * params.p0 * r;
    let noise = params.n0 * (1.0 + params.c * params.c * r);
    let mut h_lags = Vec::with_capacity(n);
    let mut c_lags = Vec::with_capacity(n);
    for lag in 0..n {
        let h = jakes_autocorr(dopplers.f_sr, lag, params.relays)?
            * jakes_autocorr(dopplers.f_rd, lag, params.relays)?;
        h_lags.push(h);
        c_lags.push(signal * h + if lag == 0 { noise } else { 0.0 });
    }
    let c = toeplitz_from_lags(&c_lags)?;
    let u = cholesky_upper_of_inverse(&c)?;
    Ok(CovarianceModel {
        n,
        h_lags,
        c,
        u,
        params: *params,
        dopplers: *dopplers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_scalar() {
        // c^2 = 1/3, P0 = 2, R = 2, N0 = 1: C = 4/3 + 5/3 = 3.
        let params = NetworkParams::new(4.0, 1.0, 2).unwrap();
        let dop = DopplerSpec::case3(2);
        let m = build_covariance(&params, &dop, 1).unwrap();
        assert!((m.c.lags()[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn static_channel_all_ones_h() {
        let params = NetworkParams::new(4.0, 1.0, 2).unwrap();
        let dop = DopplerSpec::new(0.0, 0.0, 2).unwrap();
        let m = build_covariance(&params, &dop, 5).unwrap();
        for lag in 0..5 {
            assert_eq!(m.h_lags[lag], 1.0);
        }
    }

    #[test]
    fn case2_lag_one_product() {
        let params = NetworkParams::new(4.0, 1.0, 2).unwrap();
        let dop = DopplerSpec::case2(2);
        let m = build_covariance(&params, &dop, 2).unwrap();
        assert!((m.h_lags[1] - 0.9918124931355027).abs() < 1e-12);
        assert!((m.h_lags[1] - 0.9918).abs() < 1e-4);
    }

    #[test]
    fn entries_match_formula() {
        let params = NetworkParams::from_snr_db(25.0, 2).unwrap();
        let dop = DopplerSpec::case3(2);
        let m = build_covariance(&params, &dop, 6).unwrap();
        let signal = params.c * params.c * params.p0 * 2.0;
        let noise = params.n0 * (1.0 + params.c * params.c * 2.0);
        for i in 0..6usize {
            for j in 0..6usize {
                let lag = i.abs_diff(j);
                let expect = signal * m.h_lags[lag] + if i == j { noise } else { 0.0 };
                assert!((m.c.get(i, j) - expect).abs() < 1e-12 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn whitening_factor_inverts_c() {
        let params = NetworkParams::from_snr_db(40.0, 2).unwrap();
        let dop = DopplerSpec::case1(2);
        let m = build_covariance(&params, &dop, 10).unwrap();
        let n = 10;
        // U^T U C should be the identity even at high SNR and low Doppler,
        // where C is at its most ill-conditioned.
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    let mut utu = 0.0;
                    for l in 0..n {
                        utu += m.u.get(l, i) * m.u.get(l, k);
                    }
                    s += utu * m.c.get(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((s - target).abs() < 1e-9, "entry ({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn rejects_empty_window() {
        let params = NetworkParams::new(4.0, 1.0, 2).unwrap();
        assert!(build_covariance(&params, &DopplerSpec::case1(2), 0).is_err());
    }
}
