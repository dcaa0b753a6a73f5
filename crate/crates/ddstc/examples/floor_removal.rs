//! Removes the fast-fading error floor by widening the detection window:
//! two-symbol detection against sphere detection with N = 10 under the
//! fast preset. The wide window keeps the waterfall going where the
//! two-symbol curve flattens.
//!
//!   cargo run --release --example floor_removal

use ddstc::fading::DopplerSpec;
use ddstc::harness::{csv_string, run_ber_sweep, DetectorKind, ExperimentConfig, SnrGrid};

fn main() {
    for det in [DetectorKind::Cdd, DetectorKind::Msdsd(10)] {
        let mut cfg = ExperimentConfig::default_with(det);
        cfg.modulation = 2;
        cfg.dopplers = DopplerSpec::case3(2);
        cfg.case_label = "3".into();
        cfg.snr = SnrGrid { start_db: 10.0, stop_db: 40.0, step_db: 5.0 };
        cfg.min_errors = 200;
        cfg.max_blocks = 400_000;
        cfg.seed = 2000;
        let points = run_ber_sweep(&cfg).unwrap();
        print!("{}", csv_string(&points));
    }
}
