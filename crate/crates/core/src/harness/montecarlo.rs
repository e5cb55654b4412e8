use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{min_steps, ssfm_propagate};
use crate::detectors::{DetectorKind, Receiver};
use crate::error::{Error, Result};
use crate::txrx::{bit_errors, qpsk_modulate, rate_efficiency, System};

use super::config::ExperimentConfig;
use super::metrics::qfactor_from_ber;

/// Random-stream purposes within one burst.
const STREAM_BITS: u64 = 0;
const STREAM_NOISE: u64 = 1;

const BITS_PER_SYMBOL: usize = 2;

/// One CSV row: error counts of one detector at one launch power.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub power_dbm: f64,
    pub detector: DetectorKind,
    pub n_b: usize,
    pub n_z: usize,
    pub eta: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub q2_db: f64,
    pub seed: u64,
    pub failed_bursts: u64,
    pub wall_time_s: f64,
}

/// A burst excluded from the counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstFailure {
    pub power_dbm: f64,
    pub burst: u64,
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub records: Vec<ResultRecord>,
    pub failures: Vec<BurstFailure>,
}

/// Best launch power of one detector over a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub detector: DetectorKind,
    pub power_dbm: f64,
    pub q2_db: f64,
    pub record: ResultRecord,
}

/// Independent random stream `purpose` of burst `burst`.
pub fn burst_rng(seed: u64, burst: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((burst << 1) | purpose);
    rng
}

/// Per-detector bit errors of one burst, in the order of `detectors`.
pub fn simulate_burst(
    sys: &System,
    cfg: &ExperimentConfig,
    detectors: &[DetectorKind],
    burst: u64,
) -> Result<Vec<u64>> {
    let seed = cfg.run.seed;
    let mut bit_rng = burst_rng(seed, burst, STREAM_BITS);
    let bits: Vec<u8> = (0..sys.cfg.n_info * BITS_PER_SYMBOL).map(|_| bit_rng.random_range(0..2u8)).collect();
    let frame = qpsk_modulate(&bits)?;
    let tx = sys.tx_build_burst(&frame)?;
    let steps = ssfm_steps(cfg, tx.launched.peak_power());
    let received = if cfg.run.noise {
        let mut noise_rng = burst_rng(seed, burst, STREAM_NOISE);
        ssfm_propagate(&tx.launched, &sys.fiber, steps, Some(&mut noise_rng))?
    } else {
        ssfm_propagate::<ChaCha8Rng>(&tx.launched, &sys.fiber, steps, None)?
    };
    let r = sys.rx_frontend(&received)?;
    let rx = Receiver::new(sys, tx.gain)?;
    detectors
        .iter()
        .map(|d| {
            let res = rx.detect(*d, &r)?;
            Ok(res.decided.iter().zip(&frame.indices).map(|(a, b)| bit_errors(*a, *b)).sum())
        })
        .collect()
}

/// Split-step count: the configured step length, refined if the
/// nonlinear-phase guard needs more steps.
pub fn ssfm_steps(cfg: &ExperimentConfig, peak_power: f64) -> usize {
    let nominal = (cfg.fiber.length_km / cfg.run.ssfm_step_km).ceil().max(1.0) as usize;
    nominal.max(min_steps(&cfg.fiber, peak_power))
}

/// Monte Carlo error counting at one launch power. Bursts run in parallel
/// and are reduced in burst order; all detectors see the same bursts.
pub fn run_montecarlo(cfg: &ExperimentConfig, power_dbm: f64) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut sys_cfg = cfg.system.clone();
    sys_cfg.power_dbm = power_dbm;
    let sys = System::new(sys_cfg, cfg.fiber)?;
    let detectors = &cfg.run.detectors;

    let outcomes: Vec<Result<Vec<u64>>> = (0..cfg.run.n_bursts as u64)
        .into_par_iter()
        .map(|b| simulate_burst(&sys, cfg, detectors, b))
        .collect();

    let bits_per_burst = (sys.cfg.n_info * BITS_PER_SYMBOL) as u64;
    let mut errors = vec![0u64; detectors.len()];
    let mut bits = 0u64;
    let mut failures = Vec::new();
    for (b, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(e) => {
                bits += bits_per_burst;
                errors.iter_mut().zip(e).for_each(|(acc, x)| *acc += x);
            }
            Err(error) => failures.push(BurstFailure { power_dbm, burst: b as u64, seed: cfg.run.seed, error }),
        }
    }
    let wall = if cfg.run.report_wall_time { start.elapsed().as_secs_f64() } else { 0.0 };
    let records = detectors
        .iter()
        .zip(errors)
        .map(|(d, e)| {
            let ber = if bits == 0 { f64::NAN } else { e as f64 / bits as f64 };
            ResultRecord {
                power_dbm,
                detector: *d,
                n_b: sys.cfg.n_info,
                n_z: sys.cfg.n_guard,
                eta: rate_efficiency(sys.cfg.n_info, sys.cfg.n_guard),
                bits,
                errors: e,
                ber,
                q2_db: qfactor_from_ber(ber),
                seed: cfg.run.seed,
                failed_bursts: failures.len() as u64,
                wall_time_s: wall,
            }
        })
        .collect();
    Ok(RunReport { records, failures })
}

/// `run_montecarlo` over the configured power grid.
pub fn power_sweep(cfg: &ExperimentConfig) -> Result<(RunReport, Vec<Optimum>)> {
    if cfg.run.powers_dbm.is_empty() {
        return Err(Error::Config("empty power grid".into()));
    }
    let mut all = RunReport { records: Vec::new(), failures: Vec::new() };
    for &p in &cfg.run.powers_dbm {
        let rep = run_montecarlo(cfg, p)?;
        all.records.extend(rep.records);
        all.failures.extend(rep.failures);
    }
    let optima = optima(&all.records);
    Ok((all, optima))
}

/// Highest-Q^2 record per detector; the first power wins ties.
pub fn optima(records: &[ResultRecord]) -> Vec<Optimum> {
    let mut out: Vec<Optimum> = Vec::new();
    for r in records {
        match out.iter_mut().find(|o| o.detector == r.detector) {
            Some(o) if r.q2_db > o.q2_db => {
                *o = Optimum { detector: r.detector, power_dbm: r.power_dbm, q2_db: r.q2_db, record: r.clone() }
            }
            Some(_) => {}
            None => out.push(Optimum { detector: r.detector, power_dbm: r.power_dbm, q2_db: r.q2_db, record: r.clone() }),
        }
    }
    out.sort_by_key(|o| o.detector);
    out
}
