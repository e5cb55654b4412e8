//! Browser bindings: nonlinear spectrum of a pulse, the Q-factor formula and
//! a single-burst loopback through the fiber and all four detectors.

use nfdm::channel::{min_steps, ssfm_propagate, FiberParams};
use nfdm::detectors::{DetectorKind, Receiver};
use nfdm::harness::qfactor_from_ber;
use nfdm::nft::{continuous_spectrum, fnft_forward, LambdaGrid};
use nfdm::signal::{TimeSignal, Units};
use nfdm::txrx::{bit_errors, SymbolFrame, System, SystemConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn msg(e: nfdm::Error) -> String {
    e.to_string()
}

/// `|rho(lambda)|` of `amp exp(-t^2 / (2 width^2))` next to the linear
/// prediction `|FT|`, as `[lambda.., |rho|.., |FT|..]`.
#[wasm_bindgen]
pub fn gaussian_spectrum(amp: f64, width: f64) -> Result<Vec<f64>, JsError> {
    spectrum_of_gaussian(amp, width).map_err(|e| JsError::new(&e))
}

pub fn spectrum_of_gaussian(amp: f64, width: f64) -> Result<Vec<f64>, String> {
    if !(width > 0.05 && width < 5.0) {
        return Err("width must lie in (0.05, 5)".into());
    }
    let (n, dt) = (512, width / 16.0);
    let t0 = -(n as f64) * dt / 2.0;
    let q = TimeSignal::from_fn(n, dt, t0, Units::Normalized, |t| Complex64::new(amp * (-t * t / (2.0 * width * width)).exp(), 0.0))
        .map_err(msg)?;
    let grid = LambdaGrid::nyquist(n, dt).map_err(msg)?;
    let rho = continuous_spectrum(&fnft_forward(&q, grid).map_err(msg)?).map_err(msg)?;
    // Small-signal limit: |rho(lambda)| = |Q(2 lambda)| for this real pulse.
    let lin = |l: f64| amp * width * (2.0 * std::f64::consts::PI).sqrt() * (-2.0 * l * l * width * width).exp();
    let keep: Vec<usize> = (0..n).filter(|&j| grid.at(j).abs() * width <= 2.0).collect();
    let mut out: Vec<f64> = keep.iter().map(|&j| grid.at(j)).collect();
    out.extend(keep.iter().map(|&j| rho.rho[j].norm()));
    out.extend(keep.iter().map(|&j| lin(grid.at(j))));
    Ok(out)
}

/// `Q^2` in dB for a bit-error probability.
#[wasm_bindgen]
pub fn q_factor_db(ber: f64) -> f64 {
    qfactor_from_ber(ber)
}

/// Outcome of one burst.
#[wasm_bindgen]
pub struct Loopback {
    errors: Vec<u32>,
    samples: Vec<f64>,
    bits: u32,
}

#[wasm_bindgen]
impl Loopback {
    /// Bit errors for FNFT, I-FNFT, DF-FNFT and DF-BNFT.
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<u32> {
        self.errors.clone()
    }

    /// FNFT pre-slicer samples as `[re, im, re, im, ..]`.
    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn bits(&self) -> u32 {
        self.bits
    }
}

/// One random QPSK burst of `n_info` symbols over `length_km` of fiber.
#[wasm_bindgen]
pub fn loopback(n_info: usize, power_dbm: f64, length_km: f64, noise: bool, seed: u32) -> Result<Loopback, JsError> {
    run_burst(n_info, power_dbm, length_km, noise, seed).map_err(|e| JsError::new(&e))
}

pub fn run_burst(n_info: usize, power_dbm: f64, length_km: f64, noise: bool, seed: u32) -> Result<Loopback, String> {
    if !(1..=64).contains(&n_info) {
        return Err("burst length must lie in 1..=64".into());
    }
    let cfg = SystemConfig { n_info, n_guard: 32, power_dbm, ..Default::default() };
    let sys = System::new(cfg, FiberParams { length_km, ..Default::default() }).map_err(msg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
    let frame = SymbolFrame::from_indices((0..n_info).map(|_| rng.random_range(0..4)).collect()).map_err(msg)?;
    let tx = sys.tx_build_burst(&frame).map_err(msg)?;
    let steps = (length_km.ceil() as usize).max(min_steps(&sys.fiber, tx.launched.peak_power()));
    let y = if noise {
        ssfm_propagate(&tx.launched, &sys.fiber, steps, Some(&mut rng))
    } else {
        ssfm_propagate::<ChaCha8Rng>(&tx.launched, &sys.fiber, steps, None)
    }
    .map_err(msg)?;
    let r = sys.rx_frontend(&y).map_err(msg)?;
    let rx = Receiver::new(&sys, tx.gain).map_err(msg)?;
    let mut errors = Vec::new();
    let mut samples = Vec::new();
    for d in DetectorKind::ALL {
        let res = rx.detect(d, &r).map_err(msg)?;
        errors.push(res.decided.iter().zip(&frame.indices).map(|(a, b)| bit_errors(*a, *b) as u32).sum());
        if d == DetectorKind::Fnft {
            samples = res.samples.iter().flat_map(|z| [z.re, z.im]).collect();
        }
    }
    Ok(Loopback { errors, samples, bits: 2 * n_info as u32 })
}
