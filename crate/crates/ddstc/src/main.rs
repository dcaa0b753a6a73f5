//! Command-line BER sweep runner.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O error.

use clap::Parser;
use ddstc::error::Error;
use ddstc::fading::DopplerSpec;
use ddstc::harness::{
    csv_string, emit_csv, parse_kv, run_ber_sweep, DetectorKind, ExperimentConfig, SnrGrid,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug, Default)]
#[command(
    name = "ddstc",
    about = "Monte-Carlo BER sweeps for differential distributed space-time coding over two-hop relay networks"
)]
struct Cli {
    /// Configuration file with key=value lines mirroring the flags below.
    /// Flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Modulation: bpsk or qpsk.
    #[arg(long)]
    modulation: Option<String>,

    /// Detector: coherent, cdd, msdd:N, msdsd:N, or ml-oracle:N:DRAWS.
    #[arg(long)]
    detector: Option<String>,

    /// Fading case preset: 1 (slow), 2 (moderate), or 3 (fast).
    #[arg(long)]
    case: Option<u8>,

    /// Source-relay normalized Doppler (overrides --case; requires --frd).
    #[arg(long)]
    fsr: Option<f64>,

    /// Relay-destination normalized Doppler (overrides --case; requires --fsr).
    #[arg(long)]
    frd: Option<f64>,

    /// First P/N0 grid point in dB.
    #[arg(long)]
    snr_start: Option<f64>,

    /// Last P/N0 grid point in dB (inclusive).
    #[arg(long)]
    snr_stop: Option<f64>,

    /// Grid step in dB.
    #[arg(long)]
    snr_step: Option<f64>,

    /// Bit errors to collect per point before stopping.
    #[arg(long)]
    min_errors: Option<u64>,

    /// Cap on simulated channel blocks per point.
    #[arg(long)]
    max_blocks: Option<u64>,

    /// Master seed; the whole sweep is deterministic given it.
    #[arg(long)]
    seed: Option<u64>,

    /// CSV output path. Without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

/// String-level option set: config file values overlaid with flags.
#[derive(Default)]
struct Raw {
    values: std::collections::BTreeMap<String, String>,
}

impl Raw {
    fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("invalid value {text:?} for {key}"))
            }),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "modulation",
    "detector",
    "case",
    "fsr",
    "frd",
    "snr-start",
    "snr-stop",
    "snr-step",
    "min-errors",
    "max-blocks",
    "seed",
    "out",
    "threads",
];

fn build_config(cli: Cli) -> Result<ExperimentConfig, Error> {
    let mut raw = Raw::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (key, value) in parse_kv(&text)? {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown config key {key:?}")));
            }
            raw.values.insert(key, value);
        }
    }
    raw.set("modulation", cli.modulation);
    raw.set("detector", cli.detector);
    raw.set("case", cli.case.map(|v| v.to_string()));
    raw.set("fsr", cli.fsr.map(|v| v.to_string()));
    raw.set("frd", cli.frd.map(|v| v.to_string()));
    raw.set("snr-start", cli.snr_start.map(|v| v.to_string()));
    raw.set("snr-stop", cli.snr_stop.map(|v| v.to_string()));
    raw.set("snr-step", cli.snr_step.map(|v| v.to_string()));
    raw.set("min-errors", cli.min_errors.map(|v| v.to_string()));
    raw.set("max-blocks", cli.max_blocks.map(|v| v.to_string()));
    raw.set("seed", cli.seed.map(|v| v.to_string()));
    raw.set("out", cli.out.map(|v| v.display().to_string()));
    raw.set("threads", cli.threads.map(|v| v.to_string()));

    let detector = match raw.get("detector") {
        Some(s) => DetectorKind::parse(s)?,
        None => DetectorKind::Cdd,
    };
    let mut cfg = ExperimentConfig::default_with(detector);

    match raw.get("modulation") {
        None | Some("bpsk") => cfg.modulation = 2,
        Some("qpsk") => cfg.modulation = 4,
        Some(other) => {
            return Err(Error::Config(format!(
                "modulation must be bpsk or qpsk, got {other:?}"
            )))
        }
    }

    let fsr: Option<f64> = raw.parse("fsr")?;
    let frd: Option<f64> = raw.parse("frd")?;
    let case: Option<u8> = raw.parse("case")?;
    match (case, fsr, frd) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::Config(
                "give either a case preset or explicit Dopplers, not both".into(),
            ))
        }
        (Some(c), None, None) => {
            cfg.dopplers = DopplerSpec::preset(c, 2)?;
            cfg.case_label = c.to_string();
        }
        (None, Some(a), Some(b)) => {
            cfg.dopplers = DopplerSpec::new(a, b, 2)?;
            cfg.case_label = "custom".into();
        }
        (None, None, None) => {
            cfg.dopplers = DopplerSpec::case1(2);
            cfg.case_label = "1".into();
        }
        (None, _, _) => {
            return Err(Error::Config(
                "explicit Dopplers need both fsr and frd".into(),
            ))
        }
    }

    cfg.snr = SnrGrid {
        start_db: raw.parse("snr-start")?.unwrap_or(0.0),
        stop_db: raw.parse("snr-stop")?.unwrap_or(40.0),
        step_db: raw.parse("snr-step")?.unwrap_or(5.0),
    };
    if let Some(v) = raw.parse("min-errors")? {
        cfg.min_errors = v;
    }
    if let Some(v) = raw.parse("max-blocks")? {
        cfg.max_blocks = v;
    }
    if let Some(v) = raw.parse("seed")? {
        cfg.seed = v;
    }
    if let Some(v) = raw.parse("threads")? {
        cfg.threads = v;
    }
    cfg.out = raw.get("out").map(PathBuf::from);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = build_config(cli)?;
    let points = run_ber_sweep(&cfg)?;
    match &cfg.out {
        Some(path) => {
            emit_csv(&points, path)?;
            for p in &points {
                eprintln!(
                    "{:>6.1} dB  {:<16} ber {:.3e} ({} errors / {} bits{}, {:.1} s)",
                    p.snr_db,
                    p.detector,
                    p.ber,
                    p.errors,
                    p.bits,
                    if p.capped { ", capped" } else { "" },
                    p.wall_secs
                );
            }
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", csv_string(&points)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
