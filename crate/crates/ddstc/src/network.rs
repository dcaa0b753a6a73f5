//! End-to-end signal synthesis: source power allocation, relay combining,
//! and the destination received signal.
//!
//! Two paths are implemented. The physical path simulates source-to-relay
//! and relay-to-destination transmissions with explicit relay noise; the
//! equivalent path draws the destination signal directly from the cascaded
//! model y = c sqrt(P0 R) S h + w. The physical path is the simulation
//! ground truth; the equivalent path exists to test that the cascade is the
//! correct reduction, and as a fast generator.

use crate::codebook::TxFrame;
use crate::error::{Error, Result};
use crate::fading::ChannelTrace;
use crate::numerics::{tol, Mat2, Vec2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Draws one circularly symmetric complex Gaussian sample with the given
/// total variance (variance/2 per real component).
pub fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let a: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let b: f64 = rng.gen();
    let r = (variance / 2.0).sqrt() * (-2.0 * a.ln()).sqrt();
    Complex64::new(r * (2.0 * PI * b).cos(), r * (2.0 * PI * b).sin())
}

/// Power allocation and relay amplification for the whole network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkParams {
    pub relays: usize,
    /// Total network power (linear).
    pub p: f64,
    /// Noise spectral level (linear).
    pub n0: f64,
    /// Source power, P/2.
    pub p0: f64,
    /// Per-relay power, P/(2R).
    pub p_relay: f64,
    /// Fixed amplification factor sqrt(P / (R (P + 2 N0))).
    pub c: f64,
}

impl NetworkParams {
    pub fn new(p: f64, n0: f64, relays: usize) -> Result<NetworkParams> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Config(format!("total power must be positive, got {p}")));
        }
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::Config(format!("noise level must be nonnegative, got {n0}")));
        }
        if relays == 0 {
            return Err(Error::Config("relay count must be positive".into()));
        }
        let p0 = p / 2.0;
        let p_relay = p / (2.0 * relays as f64);
        let c = (p / (relays as f64 * (p + 2.0 * n0))).sqrt();
        Ok(NetworkParams {
            relays,
            p,
            n0,
            p0,
            p_relay,
            c,
        })
    }

    /// Convenience constructor: N0 fixed to 1, P set from P/N0 in dB.
    pub fn from_snr_db(snr_db: f64, relays: usize) -> Result<NetworkParams> {
        NetworkParams::new(10f64.powf(snr_db / 10.0), 1.0, relays)
    }

    /// Amplitude applied to the source symbol vector, sqrt(P0 R).
    pub fn source_gain(&self) -> f64 {
        (self.p0 * self.relays as f64).sqrt()
    }

    /// Noise variance at the destination conditioned on the realized
    /// relay-destination gains: N0 (1 + c^2 sum |g_i|^2).
    pub fn noise_variance(&self, g: &[Complex64]) -> f64 {
        self.n0 * (1.0 + self.c * self.c * g.iter().map(|v| v.norm_sqr()).sum::<f64>())
    }
}

/// One relay's linear combining matrices. Exactly one of A, B is zero and
/// the other is unitary; a relay with A = 0 processes the conjugate of its
/// received signal, which conjugates its source-relay coefficient in the
/// cascaded model.
#[derive(Clone, Copy, Debug)]
pub struct RelaySpec {
    pub a: Mat2,
    pub b: Mat2,
    pub conjugates: bool,
}

impl RelaySpec {
    pub fn new(a: Mat2, b: Mat2) -> Result<RelaySpec> {
        let a_zero = a.frobenius() == 0.0;
        let b_zero = b.frobenius() == 0.0;
        if a_zero == b_zero {
            return Err(Error::Config(
                "exactly one of the combining matrices must be zero".into(),
            ));
        }
        let active = if a_zero { &b } else { &a };
        if !active.is_unitary(tol::UNITARY_ABS) {
            return Err(Error::Config("active combining matrix must be unitary".into()));
        }
        Ok(RelaySpec {
            a,
            b,
            conjugates: a_zero,
        })
    }

    /// The two-relay Alamouti configuration: relay 1 forwards its input
    /// unchanged, relay 2 forwards (-r2*, r1*).
    pub fn alamouti_pair() -> [RelaySpec; 2] {
        let zero = Mat2::zero();
        let one = Complex64::new(1.0, 0.0);
        let b2 = Mat2([
            Complex64::new(0.0, 0.0),
            -one,
            one,
            Complex64::new(0.0, 0.0),
        ]);
        [
            RelaySpec::new(Mat2::identity(), zero).unwrap(),
            RelaySpec::new(zero, b2).unwrap(),
        ]
    }
}

/// Relay transmit vector: c (A r + B r*).
pub fn relay_process(spec: &RelaySpec, c: f64, r: &Vec2) -> Vec2 {
    spec.a
        .mul_vec(r)
        .add(&spec.b.mul_vec(&r.conj()))
        .scale_re(c)
}

/// Space-time matrix seen at the destination for one block: column i is
/// A_i s (non-conjugating relay) or B_i s* (conjugating relay).
pub fn space_time_matrix(relays: &[RelaySpec; 2], s: &Vec2) -> Mat2 {
    let col = |spec: &RelaySpec| -> Vec2 {
        if spec.conjugates {
            spec.b.mul_vec(&s.conj())
        } else {
            spec.a.mul_vec(s)
        }
    };
    let c1 = col(&relays[0]);
    let c2 = col(&relays[1]);
    Mat2([c1.0[0], c2.0[0], c1.0[1], c2.0[1]])
}

/// Channel state attached to a received block for benchmark detectors only.
/// Noncoherent detectors must not read it.
#[derive(Clone, Debug)]
pub struct Genie {
    pub g: [Complex64; 2],
    pub h: [Complex64; 2],
    pub sigma2_w: f64,
}

/// One received block at the destination.
#[derive(Clone, Debug)]
pub struct RxBlock {
    pub y: Vec2,
    pub index: usize,
    genie: Option<Genie>,
}

impl RxBlock {
    pub fn new(y: Vec2, index: usize, genie: Option<Genie>) -> RxBlock {
        RxBlock { y, index, genie }
    }

    pub fn genie(&self) -> Result<&Genie> {
        self.genie.as_ref().ok_or_else(|| {
            Error::Contract("genie channel state requested but not populated".into())
        })
    }

    /// Copy with the genie diagnostics removed.
    pub fn stripped(&self) -> RxBlock {
        RxBlock {
            y: self.y,
            index: self.index,
            genie: None,
        }
    }
}

fn check_lengths(frame: &TxFrame, trace: &ChannelTrace) -> Result<usize> {
    let k = frame.blocks();
    if trace.blocks() < k {
        return Err(Error::Domain(format!(
            "trace covers {} blocks but frame needs {k}",
            trace.blocks()
        )));
    }
    if trace.relays() != 2 {
        return Err(Error::Domain(format!(
            "synthesis requires a two-relay trace, got {}",
            trace.relays()
        )));
    }
    Ok(k)
}

fn genie_for(
    params: &NetworkParams,
    relays: &[RelaySpec; 2],
    trace: &ChannelTrace,
    k: usize,
) -> Genie {
    let g = [trace.g(k, 0), trace.g(k, 1)];
    let h = [
        trace.cascade(k, 0, relays[0].conjugates),
        trace.cascade(k, 1, relays[1].conjugates),
    ];
    Genie {
        g,
        h,
        sigma2_w: params.noise_variance(&g),
    }
}

/// Simulates the full physical path: source to relays (with relay noise),
/// relay combining, relays to destination (with destination noise).
pub fn synthesize_physical(
    params: &NetworkParams,
    relays: &[RelaySpec; 2],
    frame: &TxFrame,
    trace: &ChannelTrace,
    seed: u64,
) -> Result<Vec<RxBlock>> {
    synthesize_physical_inner(params, relays, frame, trace, seed, false)
}

/// Draws the destination signal directly from the cascaded model
/// y = c sqrt(P0 R) S h + w with w conditioned on the realized g.
pub fn synthesize_equivalent(
    params: &NetworkParams,
    relays: &[RelaySpec; 2],
    frame: &TxFrame,
    trace: &ChannelTrace,
    seed: u64,
) -> Result<Vec<RxBlock>> {
    let k_blocks = check_lengths(frame, trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gain = Complex64::new(params.c * params.source_gain(), 0.0);
    let mut out = Vec::with_capacity(k_blocks);
    for k in 0..k_blocks {
        let genie = genie_for(params, relays, trace, k);
        let s_mat = space_time_matrix(relays, &frame.s[k]);
        let h = Vec2([genie.h[0], genie.h[1]]);
        let mut y = s_mat.mul_vec(&h).scale(gain);
        for i in 0..2 {
            y.0[i] += complex_gaussian(&mut rng, genie.sigma2_w);
        }
        out.push(RxBlock::new(y, k, Some(genie)));
    }
    Ok(out)
}

/// Equivalent-model synthesis with the destination noise assembled from the
/// same relay and destination noise draws the physical path would make.
/// Output is bit-identical to [`synthesize_physical`] with the same seed.
pub fn synthesize_equivalent_matched(
    params: &NetworkParams,
    relays: &[RelaySpec; 2],
    frame: &TxFrame,
    trace: &ChannelTrace,
    seed: u64,
) -> Result<Vec<RxBlock>> {
    synthesize_physical_inner(params, relays, frame, trace, seed, true)
}

fn synthesize_physical_inner(
    params: &NetworkParams,
    relays: &[RelaySpec; 2],
    frame: &TxFrame,
    trace: &ChannelTrace,
    seed: u64,
    via_equivalent: bool,
) -> Result<Vec<RxBlock>> {
    let k_blocks = check_lengths(frame, trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gain = params.source_gain();
    let mut out = Vec::with_capacity(k_blocks);
    for k in 0..k_blocks {
        let s = &frame.s[k];
        // Noise draw order (relay 1, relay 2, destination) is part of the
        // matched-equivalence contract.
        let mut u = [Vec2::zero(), Vec2::zero()];
        for relay_noise in u.iter_mut() {
            for slot in relay_noise.0.iter_mut() {
                *slot = complex_gaussian(&mut rng, params.n0);
            }
        }
        let mut z = Vec2::zero();
        for slot in z.0.iter_mut() {
            *slot = complex_gaussian(&mut rng, params.n0);
        }
        let genie = genie_for(params, relays, trace, k);
        let y = if via_equivalent {
            // w = c sum_i g_i (A_i u_i + B_i u_i*) + z, then the cascade.
            let s_mat = space_time_matrix(relays, s);
            let h = Vec2([genie.h[0], genie.h[1]]);
            let mut w = z;
            for i in 0..2 {
                let fw = relay_process(&relays[i], params.c, &u[i]);
                w = w.add(&fw.scale(genie.g[i]));
            }
            s_mat
                .mul_vec(&h)
                .scale(Complex64::new(params.c * gain, 0.0))
                .add(&w)
        } else {
            let mut y = z;
            for i in 0..2 {
                let r_i = s.scale(trace.q(k, i) * gain).add(&u[i]);
                let x_i = relay_process(&relays[i], params.c, &r_i);
                y = y.add(&x_i.scale(genie.g[i]));
            }
            y
        };
        out.push(RxBlock::new(y, k, Some(genie)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_alamouti_codebook, differential_encode};
    use crate::fading::{generate_trace, DopplerSpec};

    #[test]
    fn amplification_factor() {
        let p = NetworkParams::new(4.0, 1.0, 2).unwrap();
        assert!((p.c * p.c - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.p0 - 2.0).abs() < 1e-15);
        assert!((p.p_relay - 1.0).abs() < 1e-15);
        // c = sqrt(P_relay / (P0 + N0)) is the same number.
        assert!((p.c - (p.p_relay / (p.p0 + p.n0)).sqrt()).abs() < 1e-15);
        // Power budget: P0 + R P_relay = P.
        assert!((p.p0 + 2.0 * p.p_relay - p.p).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(NetworkParams::new(0.0, 1.0, 2).is_err());
        assert!(NetworkParams::new(1.0, -1.0, 2).is_err());
        assert!(NetworkParams::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn noise_variance_formula() {
        let p = NetworkParams::new(4.0, 1.0, 2).unwrap();
        let g = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!((p.noise_variance(&g) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn relay_pass_through() {
        let [r1, r2] = RelaySpec::alamouti_pair();
        let input = Vec2([Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let out = relay_process(&r1, 1.0, &input);
        assert_eq!(out, input);
        // Conjugating relay: (r1, r2) -> (-r2*, r1*).
        let out2 = relay_process(&r2, 1.0, &input);
        assert_eq!(out2.0[0], -input.0[1].conj());
        assert_eq!(out2.0[1], input.0[0].conj());
        // Linearity in c.
        let half = relay_process(&r2, 0.5, &input);
        assert_eq!(half.0[0], out2.0[0] * 0.5);
        assert_eq!(half.0[1], out2.0[1] * 0.5);
    }

    #[test]
    fn relay_spec_validation() {
        assert!(RelaySpec::new(Mat2::identity(), Mat2::identity()).is_err());
        assert!(RelaySpec::new(Mat2::zero(), Mat2::zero()).is_err());
        let not_unitary = Mat2([
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]);
        assert!(RelaySpec::new(not_unitary, Mat2::zero()).is_err());
        let [r1, r2] = RelaySpec::alamouti_pair();
        assert!(!r1.conjugates);
        assert!(r2.conjugates);
    }

    #[test]
    fn space_time_matrix_is_alamouti() {
        let relays = RelaySpec::alamouti_pair();
        let s = Vec2([Complex64::new(0.6, 0.3), Complex64::new(-0.2, 0.7)]);
        let m = space_time_matrix(&relays, &s);
        // [[s1, -s2*], [s2, s1*]].
        assert_eq!(m.0[0], s.0[0]);
        assert_eq!(m.0[1], -s.0[1].conj());
        assert_eq!(m.0[2], s.0[1]);
        assert_eq!(m.0[3], s.0[0].conj());
    }

    #[test]
    fn space_time_matrix_unitary_for_unit_s() {
        let cb = build_alamouti_codebook(4).unwrap();
        let frame = differential_encode(&cb, &[3, 7, 12, 1, 9]);
        let relays = RelaySpec::alamouti_pair();
        for s in &frame.s {
            assert!(space_time_matrix(&relays, s).is_unitary(1e-12));
        }
    }

    fn setup(
        blocks: usize,
        n0: f64,
    ) -> (
        NetworkParams,
        [RelaySpec; 2],
        crate::codebook::TxFrame,
        crate::fading::ChannelTrace,
    ) {
        let cb = build_alamouti_codebook(2).unwrap();
        let indices: Vec<usize> = (0..blocks).map(|i| i % 4).collect();
        let frame = differential_encode(&cb, &indices);
        let trace = generate_trace(&DopplerSpec::case3(2), frame.blocks(), 99).unwrap();
        let params = NetworkParams::new(4.0, n0, 2).unwrap();
        (params, RelaySpec::alamouti_pair(), frame, trace)
    }

    #[test]
    fn noiseless_physical_equals_cascade() {
        let (params, relays, frame, trace) = setup(20, 0.0);
        let rx = synthesize_physical(&params, &relays, &frame, &trace, 1).unwrap();
        let gain = Complex64::new(params.c * params.source_gain(), 0.0);
        for (k, blk) in rx.iter().enumerate() {
            let s_mat = space_time_matrix(&relays, &frame.s[k]);
            let h = Vec2([
                trace.cascade(k, 0, false),
                trace.cascade(k, 1, true),
            ]);
            let expect = s_mat.mul_vec(&h).scale(gain);
            assert!(blk.y.sub(&expect).norm_sq() < 1e-24);
        }
    }

    #[test]
    fn matched_paths_identical() {
        let (params, relays, frame, trace) = setup(200, 1.0);
        let a = synthesize_physical(&params, &relays, &frame, &trace, 7).unwrap();
        let b = synthesize_equivalent_matched(&params, &relays, &frame, &trace, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.y.sub(&y.y).norm_sq() < 1e-22, "block {}", x.index);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let (params, relays, frame, _) = setup(20, 1.0);
        let short = generate_trace(&DopplerSpec::case3(2), 5, 1).unwrap();
        assert!(synthesize_physical(&params, &relays, &frame, &short, 1).is_err());
    }

    #[test]
    fn genie_contract() {
        let (params, relays, frame, trace) = setup(3, 1.0);
        let rx = synthesize_physical(&params, &relays, &frame, &trace, 1).unwrap();
        assert!(rx[0].genie().is_ok());
        assert!(rx[0].stripped().genie().is_err());
    }

    #[test]
    fn relay_power_matches_allocation() {
        // Average per-symbol relay transmit power must come out at P_relay;
        // this is exactly what the amplification factor is chosen to do.
        let (params, relays, frame, _) = setup(20_000, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let gain = params.source_gain();
        let mut acc = 0.0;
        let mut n = 0usize;
        for trace_seed in 120..126u64 {
            let trace =
                generate_trace(&DopplerSpec::case3(2), frame.blocks(), trace_seed).unwrap();
            for k in 0..frame.blocks() {
                for i in 0..2 {
                    let mut u = Vec2::zero();
                    for slot in u.0.iter_mut() {
                        *slot = complex_gaussian(&mut rng, params.n0);
                    }
                    let r_i = frame.s[k].scale(trace.q(k, i) * gain).add(&u);
                    let x_i = relay_process(&relays[i], params.c, &r_i);
                    acc += x_i.norm_sq() / 2.0;
                    n += 1;
                }
            }
        }
        let avg = acc / n as f64;
        assert!(
            (avg - params.p_relay).abs() / params.p_relay < 0.02,
            "avg {avg}, target {}",
            params.p_relay
        );
    }

    #[test]
    fn moments_agree_between_paths() {
        let (params, relays, frame, trace) = setup(30_000, 1.0);
        let a = synthesize_physical(&params, &relays, &frame, &trace, 101).unwrap();
        let b = synthesize_equivalent(&params, &relays, &frame, &trace, 202).unwrap();
        let stats = |rx: &[RxBlock]| {
            let mut mean = Complex64::new(0.0, 0.0);
            let mut pow = 0.0;
            for blk in rx {
                mean += blk.y.0[0] + blk.y.0[1];
                pow += blk.y.norm_sq();
            }
            (mean / (2.0 * rx.len() as f64), pow / rx.len() as f64)
        };
        let (m_a, p_a) = stats(&a);
        let (m_b, p_b) = stats(&b);
        let scale = p_a.sqrt();
        assert!((m_a - m_b).norm() / scale < 0.05);
        assert!((p_a - p_b).abs() / p_a < 0.05, "powers {p_a} vs {p_b}");
    }
}
