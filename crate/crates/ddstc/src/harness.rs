//! Monte-Carlo BER sweeps: configuration, seeded parallel execution, and
//! CSV persistence.

use crate::codebook::{build_alamouti_codebook, differential_encode};
use crate::detectors::{
    build_covariance, detect_cdd, detect_coherent, detect_msdd_exhaustive, detect_msdsd,
    ml_oracle_mc, DetectionWindow,
};
use crate::error::{Error, Result};
use crate::fading::{generate_trace, DopplerSpec};
use crate::network::{space_time_matrix, synthesize_physical, NetworkParams, RelaySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Which detector a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorKind {
    Coherent,
    Cdd,
    /// Exhaustive multiple-symbol detection with the given window length.
    MsddExhaustive(usize),
    /// Sphere-decoded multiple-symbol detection with the given window length.
    Msdsd(usize),
    /// Monte-Carlo ML oracle: window length, gain draws per window.
    MlOracle(usize, usize),
}

impl DetectorKind {
    /// Window length in blocks, if the detector is window-based.
    pub fn window(&self) -> Option<usize> {
        match self {
            DetectorKind::Coherent | DetectorKind::Cdd => None,
            DetectorKind::MsddExhaustive(n)
            | DetectorKind::Msdsd(n)
            | DetectorKind::MlOracle(n, _) => Some(*n),
        }
    }

    pub fn parse(s: &str) -> Result<DetectorKind> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("unrecognized detector {s:?}"));
        let num = |t: &str| -> Result<usize> {
            t.parse::<usize>().map_err(|_| bad())
        };
        let kind = match parts.as_slice() {
            ["coherent"] => DetectorKind::Coherent,
            ["cdd"] => DetectorKind::Cdd,
            ["msdd", n] => DetectorKind::MsddExhaustive(num(n)?),
            ["msdsd", n] => DetectorKind::Msdsd(num(n)?),
            ["ml-oracle", n, d] => DetectorKind::MlOracle(num(n)?, num(d)?),
            _ => return Err(bad()),
        };
        if let Some(n) = kind.window() {
            if n < 2 {
                return Err(Error::Config(format!(
                    "window length must be at least 2, got {n}"
                )));
            }
        }
        Ok(kind)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorKind::Coherent => write!(f, "coherent"),
            DetectorKind::Cdd => write!(f, "cdd"),
            DetectorKind::MsddExhaustive(n) => write!(f, "msdd:{n}"),
            DetectorKind::Msdsd(n) => write!(f, "msdsd:{n}"),
            DetectorKind::MlOracle(n, d) => write!(f, "ml-oracle:{n}:{d}"),
        }
    }
}

/// Inclusive dB grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let v = self.start_db + self.step_db * i as f64;
            if v > self.stop_db + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }
}

/// Everything one sweep needs. Construct, then [`ExperimentConfig::validate`].
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// PSK order M (2 for BPSK, 4 for QPSK).
    pub modulation: usize,
    pub detector: DetectorKind,
    pub dopplers: DopplerSpec,
    /// Tag written to the CSV `case` column ("1", "2", "3", or "custom").
    pub case_label: String,
    pub snr: SnrGrid,
    /// Stop a point after this many bit errors...
    pub min_errors: u64,
    /// ...or after this many simulated channel blocks, whichever first.
    pub max_blocks: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
}

impl ExperimentConfig {
    /// Defaults: BPSK, CDD, Case III, 0..40 dB in 5 dB steps, 200 errors or
    /// 2e6 blocks, seed 1.
    pub fn default_with(detector: DetectorKind) -> ExperimentConfig {
        ExperimentConfig {
            modulation: 2,
            detector,
            dopplers: DopplerSpec::case3(2),
            case_label: "3".into(),
            snr: SnrGrid {
                start_db: 0.0,
                stop_db: 40.0,
                step_db: 5.0,
            },
            min_errors: 200,
            max_blocks: 2_000_000,
            seed: 1,
            out: None,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![2, 4, 8, 16].contains(&self.modulation) {
            return Err(Error::Config(format!(
                "unsupported modulation order {}",
                self.modulation
            )));
        }
        if self.min_errors < 50 {
            return Err(Error::Config(format!(
                "min-errors must be at least 50 for a meaningful estimate, got {}",
                self.min_errors
            )));
        }
        if self.max_blocks == 0 {
            return Err(Error::Config("max-blocks must be positive".into()));
        }
        if !(self.snr.step_db > 0.0) {
            return Err(Error::Config(format!(
                "snr-step must be positive, got {}",
                self.snr.step_db
            )));
        }
        if self.snr.stop_db < self.snr.start_db {
            return Err(Error::Config("snr-stop is below snr-start".into()));
        }
        Ok(())
    }
}

/// One BER estimate for a (P/N0, detector, case) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub detector: String,
    pub case: String,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// 95% half-width under the binomial normal approximation.
    pub ci95: f64,
    pub blocks: u64,
    /// True when the point hit max-blocks before reaching min-errors.
    pub capped: bool,
    pub seed: u64,
    /// Wall-clock seconds spent on this point (not persisted to CSV).
    pub wall_secs: f64,
}

impl BerPoint {
    pub fn from_counts(
        snr_db: f64,
        detector: String,
        case: String,
        bits: u64,
        errors: u64,
        blocks: u64,
        capped: bool,
        seed: u64,
        wall_secs: f64,
    ) -> BerPoint {
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let ci95 = if bits == 0 {
            0.0
        } else {
            1.96 * (ber * (1.0 - ber) / bits as f64).sqrt()
        };
        BerPoint {
            snr_db,
            detector,
            case,
            bits,
            errors,
            ber,
            ci95,
            blocks,
            capped,
            seed,
            wall_secs,
        }
    }
}

// SplitMix64: cheap, well-mixed seed derivation for worker substreams.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed for one shard: master seed mixed with the grid-point and shard
/// indices. Every derived stream (data, trace, noise, oracle) mixes in a
/// further fixed tag.
fn shard_seed(master: u64, point: usize, shard: u64) -> u64 {
    splitmix64(master ^ splitmix64((point as u64) << 32 ^ shard))
}

struct ShardOut {
    bits: u64,
    errors: u64,
    blocks: u64,
}

/// Decisions per shard; a shard is the unit of parallel work.
const SHARD_DECISIONS: usize = 1000;
/// The ML oracle is orders of magnitude slower per decision.
const ORACLE_SHARD_DECISIONS: usize = 60;
/// Shards per stopping-rule check. Fixed so results do not depend on the
/// thread count.
const WAVE: u64 = 16;

fn run_shard(cfg: &ExperimentConfig, params: &NetworkParams, seed: u64) -> Result<ShardOut> {
    let cb = build_alamouti_codebook(cfg.modulation)?;
    let relays = RelaySpec::alamouti_pair();
    let decisions = match cfg.detector {
        DetectorKind::Coherent | DetectorKind::Cdd => SHARD_DECISIONS,
        DetectorKind::MsddExhaustive(n) | DetectorKind::Msdsd(n) => {
            SHARD_DECISIONS.div_ceil(n - 1) * (n - 1)
        }
        DetectorKind::MlOracle(n, _) => ORACLE_SHARD_DECISIONS.div_ceil(n - 1) * (n - 1),
    };
    let mut data_rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x1));
    let indices: Vec<usize> = (0..decisions)
        .map(|_| data_rng.gen_range(0..cb.len()))
        .collect();
    let frame = differential_encode(&cb, &indices);
    let trace = generate_trace(&cfg.dopplers, frame.blocks(), splitmix64(seed ^ 0x2))?;
    let rx = synthesize_physical(params, &relays, &frame, &trace, splitmix64(seed ^ 0x3))?;

    let mut errors = 0u64;
    match cfg.detector {
        DetectorKind::Cdd => {
            for t in 1..=decisions {
                let det = detect_cdd(&rx[t].y, &rx[t - 1].y, &cb);
                errors += cb.bit_errors(indices[t - 1], det) as u64;
            }
        }
        DetectorKind::Coherent => {
            for t in 1..=decisions {
                let prev = space_time_matrix(&relays, &frame.s[t - 1]);
                let det = detect_coherent(params, &rx[t], &prev, &cb)?;
                errors += cb.bit_errors(indices[t - 1], det) as u64;
            }
        }
        DetectorKind::MsddExhaustive(n) | DetectorKind::Msdsd(n) => {
            let cov = build_covariance(params, &cfg.dopplers, n)?;
            let mut start = 0usize;
            while start + n <= rx.len() {
                let window = DetectionWindow::from_rx(&rx, start, n)?;
                let decided = match cfg.detector {
                    DetectorKind::MsddExhaustive(_) => {
                        detect_msdd_exhaustive(&window, &cov, &cb)?
                    }
                    _ => detect_msdsd(&window, &cov, &cb)?.0,
                };
                for (j, &d) in decided.iter().enumerate() {
                    errors += cb.bit_errors(indices[start + j], d) as u64;
                }
                start += n - 1;
            }
        }
        DetectorKind::MlOracle(n, draws) => {
            let mut start = 0usize;
            let mut w = 0u64;
            while start + n <= rx.len() {
                let window = DetectionWindow::from_rx(&rx, start, n)?;
                let decided = ml_oracle_mc(
                    &window,
                    params,
                    &cfg.dopplers,
                    &cb,
                    draws,
                    splitmix64(seed ^ 0x4 ^ (w << 8)),
                )?;
                for (j, &d) in decided.iter().enumerate() {
                    errors += cb.bit_errors(indices[start + j], d) as u64;
                }
                start += n - 1;
                w += 1;
            }
        }
    }
    Ok(ShardOut {
        bits: (decisions * cb.bits_per_codeword()) as u64,
        errors,
        blocks: frame.blocks() as u64,
    })
}

fn run_point(cfg: &ExperimentConfig, point: usize, snr_db: f64) -> Result<BerPoint> {
    let t0 = std::time::Instant::now();
    let params = NetworkParams::from_snr_db(snr_db, 2)?;
    let mut bits = 0u64;
    let mut errors = 0u64;
    let mut blocks = 0u64;
    let mut shard = 0u64;
    while errors < cfg.min_errors && blocks < cfg.max_blocks {
        let wave: Vec<ShardOut> = (shard..shard + WAVE)
            .into_par_iter()
            .map(|s| run_shard(cfg, &params, shard_seed(cfg.seed, point, s)))
            .collect::<Result<_>>()?;
        for out in wave {
            bits += out.bits;
            errors += out.errors;
            blocks += out.blocks;
        }
        shard += WAVE;
    }
    Ok(BerPoint::from_counts(
        snr_db,
        cfg.detector.to_string(),
        cfg.case_label.clone(),
        bits,
        errors,
        blocks,
        errors < cfg.min_errors,
        cfg.seed,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Runs the configured sweep. Deterministic given the configuration: shard
/// seeds derive from the master seed and results merge by summation, so the
/// outcome does not depend on scheduling.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let body = || -> Result<Vec<BerPoint>> {
        cfg.snr
            .points()
            .iter()
            .enumerate()
            .map(|(i, &snr)| run_point(cfg, i, snr))
            .collect()
    };
    if cfg.threads == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(body)
    }
}

/// CSV text for a point sequence. Floats use the shortest representation
/// that parses back to the identical value.
pub fn csv_string(points: &[BerPoint]) -> String {
    let mut out = String::from("snr_db,detector,case,bits,errors,ber,ci95,blocks,capped,seed\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.snr_db, p.detector, p.case, p.bits, p.errors, p.ber, p.ci95, p.blocks, p.capped, p.seed
        ));
    }
    out
}

/// Writes the CSV to `path`.
pub fn emit_csv(points: &[BerPoint], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(points)).map_err(|e| Error::io(path, e))
}

/// Parses a flat key=value config file. Blank lines and `#` comments are
/// ignored; keys are returned verbatim for the caller to interpret.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
