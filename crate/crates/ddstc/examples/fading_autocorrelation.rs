//! Checks the fading generator against its target autocorrelation: pooled
//! sample autocorrelations over many independent traces against the Bessel
//! J0 profile, for both hops of each preset.
//!
//!   cargo run --release --example fading_autocorrelation

use ddstc::fading::{empirical_autocorr, generate_trace, jakes_autocorr, DopplerSpec, Hop};

fn main() {
    for case in 1u8..=3 {
        let spec = DopplerSpec::preset(case, 2).unwrap();
        let traces: Vec<_> = (0..500)
            .map(|t| generate_trace(&spec, 500, 3000 + 1000 * case as u64 + t).unwrap())
            .collect();
        for (hop, f) in [(Hop::SourceRelay, spec.f_sr), (Hop::RelayDestination, spec.f_rd)] {
            println!("case {case}, {hop:?}, f = {f}");
            for lag in [1usize, 2, 5, 10] {
                let theory = jakes_autocorr(f, lag, 2).unwrap();
                let measured = empirical_autocorr(&traces, hop, lag);
                println!(
                    "  lag {lag:>2}: theory {theory:+.4}  measured {measured:+.4}  dev {:+.4}",
                    measured - theory
                );
            }
        }
    }
}
