//! Reproduces the two-symbol detection error floor: BER sweeps for the
//! three fading presets. The slow preset keeps falling with SNR; the
//! moderate and fast presets flatten out near 5e-4 and 3e-3 (BPSK).
//!
//!   cargo run --release --example error_floor

use ddstc::fading::DopplerSpec;
use ddstc::harness::{csv_string, run_ber_sweep, DetectorKind, ExperimentConfig, SnrGrid};

fn main() {
    for case in 1u8..=3 {
        let mut cfg = ExperimentConfig::default_with(DetectorKind::Cdd);
        cfg.modulation = 2;
        cfg.dopplers = DopplerSpec::preset(case, 2).unwrap();
        cfg.case_label = case.to_string();
        cfg.snr = SnrGrid { start_db: 0.0, stop_db: 40.0, step_db: 5.0 };
        cfg.min_errors = 200;
        cfg.max_blocks = 400_000;
        cfg.seed = 1000 + case as u64;
        let points = run_ber_sweep(&cfg).unwrap();
        print!("{}", csv_string(&points));
    }
}
