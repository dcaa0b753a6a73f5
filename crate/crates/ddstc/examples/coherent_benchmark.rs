//! Measures the SNR cost of noncoherent operation: the coherent benchmark
//! (detection with the cascaded channel handed over exactly) against
//! two-symbol differential detection in slow fading. The differential
//! curve runs about 3 dB to the right.
//!
//!   cargo run --release --example coherent_benchmark

use ddstc::fading::DopplerSpec;
use ddstc::harness::{csv_string, run_ber_sweep, DetectorKind, ExperimentConfig, SnrGrid};

fn main() {
    for det in [DetectorKind::Coherent, DetectorKind::Cdd] {
        let mut cfg = ExperimentConfig::default_with(det);
        cfg.modulation = 2;
        cfg.dopplers = DopplerSpec::case1(2);
        cfg.case_label = "1".into();
        cfg.snr = SnrGrid { start_db: 10.0, stop_db: 30.0, step_db: 4.0 };
        cfg.min_errors = 200;
        cfg.max_blocks = 400_000;
        cfg.seed = 7000;
        let points = run_ber_sweep(&cfg).unwrap();
        print!("{}", csv_string(&points));
    }
}
