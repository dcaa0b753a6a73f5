//! Compares the whitened multiple-symbol metric with a Monte-Carlo
//! evaluation of the exact likelihood, which marginalizes the second-hop
//! gains by averaging Gaussian densities over correlated draws. High
//! agreement supports the averaged-covariance approximation.
//!
//!   cargo run --release --example oracle_agreement

use ddstc::codebook::{build_alamouti_codebook, differential_encode};
use ddstc::detectors::{build_covariance, detect_msdd_exhaustive, ml_oracle_mc, DetectionWindow};
use ddstc::fading::{generate_trace, DopplerSpec};
use ddstc::network::{synthesize_physical, NetworkParams, RelaySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 3usize;
    let cb = build_alamouti_codebook(2).unwrap();
    let dop = DopplerSpec::case3(2);
    let params = NetworkParams::from_snr_db(20.0, 2).unwrap();
    let cov = build_covariance(&params, &dop, n).unwrap();

    let trials = 200u64;
    let mut agree = 0usize;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + t);
        let indices: Vec<usize> = (0..n - 1).map(|_| rng.gen_range(0..cb.len())).collect();
        let frame = differential_encode(&cb, &indices);
        let trace = generate_trace(&dop, frame.blocks(), 8500 + t).unwrap();
        let rx = synthesize_physical(&params, &RelaySpec::alamouti_pair(), &frame, &trace, 8700 + t)
            .unwrap();
        let window = DetectionWindow::from_rx(&rx, 0, n).unwrap();

        let whitened = detect_msdd_exhaustive(&window, &cov, &cb).unwrap();
        let exact = ml_oracle_mc(&window, &params, &dop, &cb, 1000, t).unwrap();
        if whitened == exact {
            agree += 1;
        }
    }
    println!(
        "whitened metric matched the Monte-Carlo exact likelihood on {agree}/{trials} windows \
         (N = {n}, BPSK, fast fading, 20 dB)"
    );
}
