//! Transmitter (pulse train, nonlinear inverse synthesis, precompensation,
//! inverse NFT, power scaling) and receiver front end.
//!
//! Waveforms handed to the NFT live in the *conjugate-mirror* domain: the
//! nonlinear spectrum attached to a launched or received field `q(t)` is the
//! ZS spectrum of `conj(q(-t))`. Under this convention the linear limit reads
//! `q ~= u` for the NIS map `rho(lambda) = -U(-2 lambda)`, and the GLM kernel
//! of an unprecompensated burst is `-u(t)/2` evaluated in natural time, so
//! inverse transforms march forward in `t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channel::{make_scales, FiberParams, NormalizationScales};
use crate::error::{Error, Result};
use crate::nft::{bnft_inverse, LambdaGrid, NonlinearSpectrum};
use crate::signal::{TimeSignal, Units};

/// Gray-mapped QPSK points, index `m` at phase `pi/4 + m pi/2`.
pub const QPSK: [Complex64; 4] = [
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
];

/// Bit pairs of the QPSK points: 00, 01, 11, 10.
pub const QPSK_BITS: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 1], [1, 0]];

const POWER_TOL_DB: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub symbol_rate_baud: f64,
    /// Receiver samples per symbol.
    pub oversampling: usize,
    pub n_info: usize,
    pub n_guard: usize,
    pub constellation_order: usize,
    /// Fraction of pulse energy inside one symbol time.
    pub pulse_energy_fraction: f64,
    /// Average launch power over the information window, dBm.
    pub power_dbm: f64,
    /// Two-sided front-end bandwidth, Hz.
    pub frontend_bandwidth_hz: f64,
    /// Normalization time as a fraction of the symbol time.
    pub t0_over_ts: f64,
    /// Channel simulation samples per receiver sample.
    pub sim_upsampling: usize,
    /// Receiver window margin before the first slot, in symbols.
    pub rx_head_symbols: usize,
    /// Receiver window margin after the last slot, in symbols; by default
    /// the whole trailing guard, which holds the nonlinear tail of the burst.
    pub rx_tail_symbols: Option<usize>,
    /// Receiver lambda-grid points per receiver-window sample. Spectra of
    /// energetic bursts have features narrower than the plain Nyquist
    /// spacing, which the matched filter must resolve.
    pub rx_lambda_oversampling: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            symbol_rate_baud: 10e9,
            oversampling: 8,
            n_info: 128,
            n_guard: 160,
            constellation_order: 4,
            pulse_energy_fraction: 0.99,
            power_dbm: -10.0,
            frontend_bandwidth_hz: 100e9,
            t0_over_ts: 0.5,
            sim_upsampling: 2,
            rx_head_symbols: 1,
            rx_tail_symbols: None,
            rx_lambda_oversampling: 2,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.symbol_rate_baud > 0.0 && self.symbol_rate_baud.is_finite()) {
            return bad("symbol_rate_baud must be positive");
        }
        if self.oversampling < 2 || !self.oversampling.is_multiple_of(2) {
            return bad("oversampling must be an even number >= 2");
        }
        if self.n_info < 1 {
            return bad("n_info must be >= 1");
        }
        if self.constellation_order != 4 {
            return bad("only QPSK (constellation_order = 4) is supported");
        }
        if !(self.pulse_energy_fraction > 0.0 && self.pulse_energy_fraction < 1.0) {
            return bad("pulse_energy_fraction must lie in (0, 1)");
        }
        if !self.power_dbm.is_finite() {
            return bad("power_dbm must be finite");
        }
        if !(self.frontend_bandwidth_hz > 0.0) {
            return bad("frontend_bandwidth_hz must be positive");
        }
        if !(self.t0_over_ts > 0.0 && self.t0_over_ts.is_finite()) {
            return bad("t0_over_ts must be positive");
        }
        if self.sim_upsampling < 1 {
            return bad("sim_upsampling must be >= 1");
        }
        if self.rx_lambda_oversampling < 1 {
            return bad("rx_lambda_oversampling must be >= 1");
        }
        let head_room = self.n_guard / 2;
        let tail_room = self.n_guard - head_room;
        if self.rx_head_symbols > head_room || self.rx_tail_symbols.unwrap_or(0) > tail_room {
            return bad("receiver margins exceed the guard interval");
        }
        Ok(())
    }

    pub fn symbol_time(&self) -> f64 {
        1.0 / self.symbol_rate_baud
    }

    pub fn normalization_time(&self) -> f64 {
        self.t0_over_ts * self.symbol_time()
    }

    pub fn power_watts(&self) -> f64 {
        dbm_to_watts(self.power_dbm)
    }

    pub fn rx_tail(&self) -> usize {
        self.rx_tail_symbols.unwrap_or(self.n_guard - self.n_guard / 2)
    }
}

/// `N_b / (N_b + N_z)`.
pub fn rate_efficiency(n_info: usize, n_guard: usize) -> f64 {
    n_info as f64 / (n_info + n_guard) as f64
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Unit-energy Gaussian `g(t) = (pi sigma^2)^(-1/4) exp(-t^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub sigma: f64,
}

impl PulseShape {
    /// Gaussian holding `fraction` of its energy in `[-ts/2, ts/2]`.
    pub fn gaussian(ts: f64, fraction: f64) -> Self {
        // |g|^2 has standard deviation sigma / sqrt(2): fraction = erf(ts / (2 sigma)).
        let sigma = ts / (2.0 * statrs::function::erf::erf_inv(fraction));
        Self { sigma }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (PI * self.sigma * self.sigma).powf(-0.25) * (-t * t / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// `G(w) = int g(t) e^{-j w t} dt`.
    pub fn spectrum(&self, w: f64) -> f64 {
        (4.0 * PI * self.sigma * self.sigma).powf(0.25) * (-w * w * self.sigma * self.sigma / 2.0).exp()
    }

    /// Fraction of energy in `[-half, half]`.
    pub fn energy_within(&self, half: f64) -> f64 {
        statrs::function::erf::erf(half / self.sigma)
    }

    /// Time beyond which the pulse is below `1e-16` of its peak.
    pub fn support(&self) -> f64 {
        self.sigma * (2.0 * 16.0 * std::f64::consts::LN_10).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub bits: Vec<u8>,
    pub indices: Vec<usize>,
    pub symbols: Vec<Complex64>,
}

impl SymbolFrame {
    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        if let Some(m) = indices.iter().find(|&&m| m >= 4) {
            return Err(Error::InvalidArgument(format!("QPSK index {m} out of range")));
        }
        let bits = indices.iter().flat_map(|&m| QPSK_BITS[m]).collect();
        let symbols = indices.iter().map(|&m| QPSK[m]).collect();
        Ok(Self { bits, indices, symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<SymbolFrame> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("odd bit count {}", bits.len())));
    }
    let indices = bits
        .chunks(2)
        .map(|p| {
            QPSK_BITS
                .iter()
                .position(|b| b[0] == p[0] && b[1] == p[1])
                .ok_or_else(|| Error::InvalidArgument(format!("bits must be 0 or 1, got {p:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    SymbolFrame::from_indices(indices)
}

/// Minimum-distance QPSK decision; samples on a boundary go to the smaller index.
pub fn qpsk_decide(z: Complex64) -> usize {
    match (z.re, z.im) {
        (re, im) if re >= 0.0 && im >= 0.0 => 0,
        (re, im) if re < 0.0 && im >= 0.0 => 1,
        (re, _) if re <= 0.0 => 2,
        _ => 3,
    }
}

/// Number of differing bits between two QPSK indices.
pub fn bit_errors(a: usize, b: usize) -> u64 {
    QPSK_BITS[a].iter().zip(&QPSK_BITS[b]).filter(|(x, y)| x != y).count() as u64
}

/// Time grid of one burst in normalized units.
///
/// Symbol `k` (1-based) is centred at `(k-1) Ts`; the slot of symbol `k` is
/// `(t_{k-1}, t_k]` with `t_k = (k - 1/2) Ts`. The window holds `N_b + N_z`
/// slots with `floor(N_z/2)` guard slots before the information symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstLayout {
    pub ts: f64,
    pub dt: f64,
    pub oversampling: usize,
    pub n_info: usize,
    pub pre_guard: usize,
    pub n_samples: usize,
    /// Time of sample 0.
    pub t_first: f64,
}

impl BurstLayout {
    pub fn new(cfg: &SystemConfig) -> Self {
        let ts = 1.0 / cfg.t0_over_ts;
        let dt = ts / cfg.oversampling as f64;
        let pre_guard = cfg.n_guard / 2;
        let n_samples = (cfg.n_info + cfg.n_guard) * cfg.oversampling;
        let t_first = -0.5 * ts - pre_guard as f64 * ts + dt;
        Self { ts, dt, oversampling: cfg.oversampling, n_info: cfg.n_info, pre_guard, n_samples, t_first }
    }

    /// `t_k = (k - 1/2) Ts`.
    pub fn t_k(&self, k: usize) -> f64 {
        (k as f64 - 0.5) * self.ts
    }

    pub fn symbol_center(&self, k: usize) -> f64 {
        (k as f64 - 1.0) * self.ts
    }

    /// Index of the sample at `t_k`.
    pub fn index_of_t_k(&self, k: usize) -> usize {
        (self.pre_guard + k) * self.oversampling - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_first + n as f64 * self.dt
    }

    /// Duration of the information window, `N_b Ts`.
    pub fn info_duration(&self) -> f64 {
        self.n_info as f64 * self.ts
    }
}

/// `u(t) = sum_k x_k g(t - (k-1) Ts)` on the burst grid.
pub fn synthesize_pulse_train(frame: &SymbolFrame, layout: &BurstLayout, pulse: &PulseShape) -> TimeSignal {
    let mut samples = vec![Complex64::new(0.0, 0.0); layout.n_samples];
    add_pulses(&mut samples, layout.t_first, layout.dt, &frame.symbols, 1, layout.ts, pulse);
    TimeSignal { samples, dt: layout.dt, t0: layout.t_first, units: Units::Normalized }
}

/// Adds `x_i g(t - (k_i - 1) Ts)` for symbols numbered from `first_k`.
pub fn add_pulses(
    out: &mut [Complex64],
    t_start: f64,
    dt: f64,
    symbols: &[Complex64],
    first_k: usize,
    ts: f64,
    pulse: &PulseShape,
) {
    let reach = pulse.support();
    for (i, x) in symbols.iter().enumerate() {
        let c = (first_k + i) as f64 * ts - ts;
        let lo = (((c - reach - t_start) / dt).floor().max(0.0)) as usize;
        let hi = (((c + reach - t_start) / dt).ceil().max(0.0) as usize + 1).min(out.len());
        for (n, v) in out.iter_mut().enumerate().take(hi).skip(lo) {
            *v += x * pulse.eval(t_start + n as f64 * dt - c);
        }
    }
}

/// NIS map `rho(lambda) = -U(-2 lambda)` on the `len`-point Nyquist grid of
/// `u`, with `U(w) = int u(t) e^{-j w t} dt` evaluated as a zero-padded DFT.
pub fn nis_encode(u: &TimeSignal, len: usize) -> Result<NonlinearSpectrum> {
    if len < u.len() {
        return Err(Error::InvalidArgument(format!("NIS grid of {len} points cannot hold {} samples", u.len())));
    }
    let grid = LambdaGrid::nyquist(len, u.dt)?;
    let mut x = u.samples.clone();
    x.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut x);
    let rho = (0..len)
        .map(|j| {
            let w = -2.0 * grid.at(j);
            let k = (len / 2 + len - j) % len;
            -x[k] * u.dt * Complex64::from_polar(1.0, -w * u.t0)
        })
        .collect();
    NonlinearSpectrum::new(grid, rho)
}

/// `rho(lambda) e^{4j lambda^2 L}`.
pub fn precompensate(rho: &NonlinearSpectrum, length: f64) -> NonlinearSpectrum {
    let r = rho
        .rho
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let l = rho.grid.at(j);
            r * Complex64::from_polar(1.0, 4.0 * l * l * length)
        })
        .collect();
    NonlinearSpectrum { grid: rho.grid, rho: r }
}

/// Inverse NFT into the conjugate-mirror domain: the field on
/// `t0 + n dt`, `n < len`, whose mirrored spectrum is `rho`.
pub fn mirrored_inverse(rho: &NonlinearSpectrum, t0: f64, dt: f64, len: usize) -> Result<TimeSignal> {
    let x0 = -(t0 + (len - 1) as f64 * dt);
    Ok(bnft_inverse(rho, x0, dt, len)?.conj_time_reversed())
}

/// Band-limited resampling by zero-padding or truncating the centred DFT,
/// keeping only components with `|f| <= keep_hz / 2` (`dt` in seconds).
pub fn fft_resample(
    samples: &[Complex64],
    dt: f64,
    factor_up: usize,
    factor_down: usize,
    keep_hz: f64,
) -> Vec<Complex64> {
    let n = samples.len();
    let m = n * factor_up / factor_down;
    let mut planner = FftPlanner::new();
    let mut x = samples.to_vec();
    planner.plan_fft_forward(n).process(&mut x);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    let half = n.min(m) / 2;
    let df = 1.0 / (n as f64 * dt);
    for i in 0..half {
        let f = i as f64 * df;
        if f <= keep_hz / 2.0 {
            y[i] = x[i];
        }
        // Negative frequencies including the shared Nyquist bin.
        let f_neg = (i + 1) as f64 * df;
        if f_neg <= keep_hz / 2.0 {
            y[m - 1 - i] = x[n - 1 - i];
        }
    }
    planner.plan_fft_inverse(m).process(&mut y);
    let scale = 1.0 / n as f64;
    y.iter().map(|v| v * scale).collect()
}

/// Everything fixed across bursts of one configuration.
#[derive(Debug, Clone)]
pub struct System {
    pub cfg: SystemConfig,
    pub fiber: FiberParams,
    pub scales: NormalizationScales,
    pub layout: BurstLayout,
    pub pulse: PulseShape,
    /// Nonlinear length used for precompensation (`0` disables it).
    pub nft_length: f64,
}

/// A launched burst.
#[derive(Debug, Clone)]
pub struct TxBurst {
    pub frame: SymbolFrame,
    /// Scaled pulse train `A u(t)` (normalized).
    pub u: TimeSignal,
    /// Launched field on the receiver grid (normalized).
    pub q: TimeSignal,
    /// Launched field on the simulation grid (physical).
    pub launched: TimeSignal,
    pub gain: f64,
    pub realized_power_dbm: f64,
}

impl System {
    pub fn new(cfg: SystemConfig, fiber: FiberParams) -> Result<Self> {
        cfg.validate()?;
        fiber.validate().map_err(|e| Error::Config(e.to_string()))?;
        let scales = make_scales(&fiber, cfg.normalization_time())?;
        let layout = BurstLayout::new(&cfg);
        let pulse = PulseShape::gaussian(layout.ts, cfg.pulse_energy_fraction);
        let nft_length = scales.nft_length();
        Ok(Self { cfg, fiber, scales, layout, pulse, nft_length })
    }

    /// Size of the transmitter lambda grid: twice the burst length, so that
    /// the inverse-NFT kernel does not wrap around.
    pub fn tx_grid_len(&self) -> usize {
        2 * self.layout.n_samples
    }

    /// Normalized target energy of the information window.
    pub fn target_energy(&self) -> f64 {
        self.cfg.power_watts() / self.scales.p0 * self.layout.info_duration()
    }

    /// Gain `A` such that the spectrum of `A u` carries `energy`, by
    /// bisection on `(1/pi) int log(1 + A^2 |rho|^2) dlambda`.
    pub fn gain_for_energy(&self, rho_unit: &NonlinearSpectrum, energy: f64) -> Result<f64> {
        if !(energy > 0.0) {
            return Err(Error::Scaling(format!("target energy {energy} must be positive")));
        }
        let e_of = |a: f64| {
            rho_unit.rho.iter().map(|r| (a * a * r.norm_sqr()).ln_1p()).sum::<f64>() * rho_unit.grid.step / PI
        };
        let e_lin = e_of(1.0).max(f64::MIN_POSITIVE);
        let mut lo = 0.0;
        let mut hi = (energy / e_lin).sqrt().max(1e-300);
        let mut grow = 0;
        while e_of(hi) < energy {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return Err(Error::Scaling("energy unreachable".into()));
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if e_of(mid) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Full transmitter chain for one frame, scaled to the configured power.
    pub fn tx_build_burst(&self, frame: &SymbolFrame) -> Result<TxBurst> {
        self.check_frame(frame)?;
        let u_unit = synthesize_pulse_train(frame, &self.layout, &self.pulse);
        let rho_unit = nis_encode(&u_unit, self.tx_grid_len())?;
        let target = self.target_energy();
        let mut aim = target;
        let mut last_db = f64::NAN;
        for _ in 0..4 {
            let gain = self.gain_for_energy(&rho_unit, aim)?;
            let q = self.synthesize(&rho_unit, gain)?;
            let realized = q.energy();
            last_db = 10.0 * (realized / target).log10();
            if last_db.abs() <= POWER_TOL_DB {
                return self.finish_burst(frame, u_unit, q, gain);
            }
            aim *= target / realized;
        }
        Err(Error::Scaling(format!("launch power off by {last_db:.3} dB after corrections")))
    }

    /// Transmitter chain with a given gain on the unit-energy pulse train.
    pub fn tx_build_with_gain(&self, frame: &SymbolFrame, gain: f64) -> Result<TxBurst> {
        self.check_frame(frame)?;
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::InvalidArgument(format!("gain must be positive, got {gain}")));
        }
        let u_unit = synthesize_pulse_train(frame, &self.layout, &self.pulse);
        let rho_unit = nis_encode(&u_unit, self.tx_grid_len())?;
        let q = self.synthesize(&rho_unit, gain)?;
        self.finish_burst(frame, u_unit, q, gain)
    }

    fn check_frame(&self, frame: &SymbolFrame) -> Result<()> {
        if frame.len() != self.cfg.n_info {
            return Err(Error::InvalidArgument(format!(
                "frame has {} symbols, expected {}",
                frame.len(),
                self.cfg.n_info
            )));
        }
        Ok(())
    }

    fn synthesize(&self, rho_unit: &NonlinearSpectrum, gain: f64) -> Result<TimeSignal> {
        let mut rho = rho_unit.clone();
        rho.rho.iter_mut().for_each(|r| *r *= gain);
        let rho_tx = precompensate(&rho, self.nft_length);
        mirrored_inverse(&rho_tx, self.layout.t_first, self.layout.dt, self.layout.n_samples)
    }

    fn finish_burst(&self, frame: &SymbolFrame, mut u: TimeSignal, q: TimeSignal, gain: f64) -> Result<TxBurst> {
        u.scale(gain);
        let launched = self.to_simulation(&q)?;
        let realized_power_dbm = watts_to_dbm(q.energy() * self.scales.p0 / self.layout.info_duration());
        Ok(TxBurst { frame: frame.clone(), u, q, launched, gain, realized_power_dbm })
    }

    /// Front-end filter, upsampling to the simulation grid, physical units.
    pub fn to_simulation(&self, q: &TimeSignal) -> Result<TimeSignal> {
        let phys = self.scales.to_physical(q)?;
        let up = self.cfg.sim_upsampling;
        let samples = fft_resample(&phys.samples, phys.dt, up, 1, self.cfg.frontend_bandwidth_hz);
        TimeSignal::new(samples, phys.dt / up as f64, phys.t0, Units::Physical)
    }

    /// Receiver window `(t_0 - head Ts, t_{N_b} + tail Ts]` as `(first index, length)`.
    pub fn rx_window(&self) -> (usize, usize) {
        let l = &self.layout;
        let os = self.cfg.oversampling;
        let first = l.index_of_t_k(0) + 1 - self.cfg.rx_head_symbols * os;
        let len = (self.cfg.rx_head_symbols + l.n_info + self.cfg.rx_tail()) * os;
        (first, len)
    }

    /// Low-pass, downsample to the receiver grid, normalize, and cut the
    /// receiver window.
    pub fn rx_frontend(&self, waveform: &TimeSignal) -> Result<TimeSignal> {
        let up = self.cfg.sim_upsampling;
        let l = &self.layout;
        if waveform.units != Units::Physical {
            return Err(Error::Framing("front end expects a physical waveform".into()));
        }
        let want_dt = l.dt * self.scales.t0 / up as f64;
        let want_t0 = l.t_first * self.scales.t0;
        if waveform.len() != l.n_samples * up
            || ((waveform.dt - want_dt) / want_dt).abs() > 1e-9
            || (waveform.t0 - want_t0).abs() > 1e-6 * want_dt
        {
            return Err(Error::Framing(format!(
                "waveform grid ({} samples, dt {:e}, t0 {:e}) does not match the burst layout",
                waveform.len(),
                waveform.dt,
                waveform.t0
            )));
        }
        let samples = fft_resample(&waveform.samples, waveform.dt, 1, up, self.cfg.frontend_bandwidth_hz);
        let phys = TimeSignal::new(samples, waveform.dt * up as f64, waveform.t0, Units::Physical)?;
        let norm = self.scales.to_normalized(&phys)?;
        let (first, len) = self.rx_window();
        norm.slice(first, first + len)
    }
}
