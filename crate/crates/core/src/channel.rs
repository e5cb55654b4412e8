//! Fiber parameters, soliton-unit normalization and split-step propagation
//! of the NLSE under ideal distributed amplification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{TimeSignal, Units};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

/// Largest nonlinear phase `gamma * P_peak * dz` accepted per split step.
pub const MAX_STEP_PHASE: f64 = 0.05;

/// Standard single-mode fiber with ideal distributed amplification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberParams {
    /// Group-velocity dispersion in ps^2/km (negative: anomalous).
    pub beta2_ps2_per_km: f64,
    /// Kerr coefficient in 1/(W km).
    pub gamma_per_w_km: f64,
    pub alpha_db_per_km: f64,
    pub length_km: f64,
    pub eta_sp: f64,
    pub carrier_wavelength_nm: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        Self {
            beta2_ps2_per_km: -20.39,
            gamma_per_w_km: 1.22,
            alpha_db_per_km: 0.2,
            length_km: 4000.0,
            eta_sp: 4.0,
            carrier_wavelength_nm: 1550.0,
        }
    }
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.beta2_ps2_per_km,
            self.gamma_per_w_km,
            self.alpha_db_per_km,
            self.length_km,
            self.eta_sp,
            self.carrier_wavelength_nm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("fiber parameters must be finite".into()));
        }
        if self.length_km <= 0.0 {
            return Err(Error::InvalidArgument(format!("length_km must be > 0, got {}", self.length_km)));
        }
        if self.gamma_per_w_km <= 0.0 {
            return Err(Error::InvalidArgument("gamma must be > 0".into()));
        }
        if self.beta2_ps2_per_km >= 0.0 {
            return Err(Error::InvalidArgument("beta2 must be negative (anomalous dispersion)".into()));
        }
        if self.eta_sp < 0.0 || self.alpha_db_per_km < 0.0 || self.carrier_wavelength_nm <= 0.0 {
            return Err(Error::InvalidArgument("eta_sp, alpha and wavelength must be non-negative".into()));
        }
        Ok(())
    }

    /// beta2 in s^2/m.
    pub fn beta2(&self) -> f64 {
        self.beta2_ps2_per_km * 1e-27
    }

    /// gamma in 1/(W m).
    pub fn gamma(&self) -> f64 {
        self.gamma_per_w_km * 1e-3
    }

    /// Power attenuation coefficient in 1/m.
    pub fn alpha_lin(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0 * 1e-3
    }

    pub fn length_m(&self) -> f64 {
        self.length_km * 1e3
    }

    /// Photon energy at the carrier, in J.
    pub fn photon_energy(&self) -> f64 {
        PLANCK * LIGHT_SPEED / (self.carrier_wavelength_nm * 1e-9)
    }
}

/// Total ASE power spectral density accumulated over the span, in W/Hz.
pub fn ase_total_psd(fiber: &FiberParams) -> f64 {
    fiber.eta_sp * fiber.photon_energy() * fiber.alpha_lin() * fiber.length_m()
}

/// Soliton-unit scales: `t = t0 * tau`, `z = z0 * zeta`, `A = sqrt(p0) * q`,
/// turning the NLSE into `j q_zeta + q_tautau / 2 + |q|^2 q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationScales {
    /// Time scale in s.
    pub t0: f64,
    /// Length scale in m.
    pub z0: f64,
    /// Power scale in W.
    pub p0: f64,
    /// Fiber length in units of `z0`.
    pub normalized_length: f64,
}

pub fn make_scales(fiber: &FiberParams, t0: f64) -> Result<NormalizationScales> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    fiber.validate()?;
    let z0 = t0 * t0 / fiber.beta2().abs();
    let p0 = 1.0 / (fiber.gamma() * z0);
    Ok(NormalizationScales { t0, z0, p0, normalized_length: fiber.length_m() / z0 })
}

impl NormalizationScales {
    /// Distance entering the nonlinear-spectrum rotation `exp(-4j lambda^2 L)`.
    ///
    /// With the half-weighted dispersion term of the normalized NLSE a
    /// spectral line at `lambda` rotates as `exp(-2j lambda^2 zeta)`, so the
    /// rotation written with the factor 4 uses half of the normalized length.
    pub fn nft_length(&self) -> f64 {
        0.5 * self.normalized_length
    }

    pub fn to_normalized(&self, s: &TimeSignal) -> Result<TimeSignal> {
        if s.units != Units::Physical {
            return Err(Error::InvalidArgument("expected a physical-unit signal".into()));
        }
        let k = 1.0 / self.p0.sqrt();
        let samples = s.samples.iter().map(|v| v * k).collect();
        TimeSignal::new(samples, s.dt / self.t0, s.t0 / self.t0, Units::Normalized)
    }

    pub fn to_physical(&self, s: &TimeSignal) -> Result<TimeSignal> {
        if s.units != Units::Normalized {
            return Err(Error::InvalidArgument("expected a normalized signal".into()));
        }
        let k = self.p0.sqrt();
        let samples = s.samples.iter().map(|v| v * k).collect();
        TimeSignal::new(samples, s.dt * self.t0, s.t0 * self.t0, Units::Physical)
    }
}

/// Steps needed to keep the per-step nonlinear phase of a signal with the
/// given peak power (W) at or below [`MAX_STEP_PHASE`].
pub fn min_steps(fiber: &FiberParams, peak_power: f64) -> usize {
    let phase = fiber.gamma() * peak_power * fiber.length_m();
    (phase / MAX_STEP_PHASE).ceil().max(1.0) as usize
}

/// Angular frequencies of the DFT bins for `n` samples spaced `dt`.
pub fn fft_omegas(n: usize, dt: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * dt);
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            k * base
        })
        .collect()
}

/// Symmetric split-step integration over the whole fiber with zero net loss.
///
/// With `noise = Some(rng)`, circular white Gaussian noise with per-sample
/// variance `eta_sp h nu alpha dz / dt` is added after every step, so the
/// accumulated noise PSD over the span equals [`ase_total_psd`].
pub fn ssfm_propagate<R: Rng + ?Sized>(
    signal: &TimeSignal,
    fiber: &FiberParams,
    steps: usize,
    noise: Option<&mut R>,
) -> Result<TimeSignal> {
    fiber.validate()?;
    if signal.units != Units::Physical {
        return Err(Error::InvalidArgument("ssfm_propagate expects a physical-unit signal".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    if signal.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input sample".into()));
    }
    let n = signal.len();
    let dz = fiber.length_m() / steps as f64;
    let gamma = fiber.gamma();
    let phase = gamma * signal.peak_power() * dz;
    if phase > MAX_STEP_PHASE {
        return Err(Error::StepSize { phase, limit: MAX_STEP_PHASE });
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let beta2 = fiber.beta2();
    let inv_n = 1.0 / n as f64;
    let half: Vec<Complex64> = fft_omegas(n, signal.dt)
        .iter()
        .map(|w| Complex64::from_polar(inv_n, 0.25 * beta2 * w * w * dz))
        .collect();
    let full: Vec<Complex64> = half.iter().map(|h| h * h * n as f64).collect();

    let sigma = (fiber.eta_sp * fiber.photon_energy() * fiber.alpha_lin() * dz / signal.dt).sqrt();
    let per_quadrature = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let mut noise = noise;

    let mut a = signal.samples.clone();
    let apply = |a: &mut [Complex64], h: &[Complex64], scratch: &mut [Complex64]| {
        fwd.process_with_scratch(a, scratch);
        for (v, k) in a.iter_mut().zip(h) {
            *v *= k;
        }
        inv.process_with_scratch(a, scratch);
    };
    // D/2 (N D)^(steps-1) N D/2, with noise loaded after each nonlinear step.
    apply(&mut a, &half, &mut scratch);
    for step in 0..steps {
        for v in a.iter_mut() {
            *v *= Complex64::from_polar(1.0, gamma * v.norm_sqr() * dz);
        }
        if let Some(rng) = noise.as_deref_mut() {
            if sigma > 0.0 {
                for v in a.iter_mut() {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    *v += Complex64::new(re, im) * per_quadrature;
                }
            }
        }
        if step + 1 < steps {
            apply(&mut a, &full, &mut scratch);
        }
    }
    apply(&mut a, &half, &mut scratch);
    TimeSignal::new(a, signal.dt, signal.t0, Units::Physical)
}
