//! Nonlinear-frequency-domain matched filtering and the four detection
//! strategies: full FNFT, incremental FNFT on the truncated received signal,
//! decision-feedback FNFT on a cleaned signal, and decision-feedback
//! time-domain detection with candidate inverse NFTs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nft::{continuous_spectrum, GlmMarcher, LambdaGrid, NonlinearSpectrum, ScatteringState};
use crate::signal::{TimeSignal, Units};
use crate::txrx::{add_pulses, qpsk_decide, PulseShape, System, QPSK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Fnft,
    IFnft,
    DfFnft,
    DfBnft,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] =
        [DetectorKind::Fnft, DetectorKind::IFnft, DetectorKind::DfFnft, DetectorKind::DfBnft];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Fnft => "fnft",
            DetectorKind::IFnft => "i-fnft",
            DetectorKind::DfFnft => "df-fnft",
            DetectorKind::DfBnft => "df-bnft",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown detector '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Decided constellation indices, one per information symbol.
    pub decided: Vec<usize>,
    /// Pre-slicer samples; for time-domain detection, the chosen point.
    pub samples: Vec<Complex64>,
    /// Per-symbol candidate distances (time-domain detection only).
    pub candidate_distances: Vec<Vec<f64>>,
    /// Samples absorbed by forward scattering.
    pub fnft_samples: usize,
    /// Samples produced by inverse scattering.
    pub bnft_samples: usize,
    /// Distinct receiver samples covered by forward / inverse scattering.
    pub fnft_span: usize,
    pub bnft_span: usize,
    pub n_fnft_equiv: usize,
    pub n_bnft_equiv: usize,
}

/// Receiver-side processing state shared by all detectors of one system.
#[derive(Debug, Clone)]
pub struct Receiver {
    pub grid: LambdaGrid,
    pub dt: f64,
    pub ts: f64,
    /// Time of the first receiver-window sample.
    pub t_first: f64,
    pub n_rx: usize,
    pub n_info: usize,
    pub oversampling: usize,
    pub head: usize,
    /// Launch gain applied to the unit-energy pulse train (known to the receiver).
    pub gain: f64,
    pub pulse: PulseShape,
    /// `G(w_j) dw / 2pi` on the receiver grid.
    weights: Vec<f64>,
    omegas: Vec<f64>,
}

impl Receiver {
    pub fn new(sys: &System, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::InvalidArgument(format!("launch gain must be positive, got {gain}")));
        }
        let (first, n_rx) = sys.rx_window();
        let l = &sys.layout;
        let grid = LambdaGrid::nyquist(sys.cfg.rx_lambda_oversampling * n_rx, l.dt)?;
        let omegas: Vec<f64> = grid.values().map(|x| -2.0 * x).collect();
        let dw = 2.0 * grid.step;
        let weights = omegas.iter().map(|&w| sys.pulse.spectrum(w) * dw / (2.0 * PI)).collect();
        Ok(Self {
            grid,
            dt: l.dt,
            ts: l.ts,
            t_first: l.time(first),
            n_rx,
            n_info: l.n_info,
            oversampling: sys.cfg.oversampling,
            head: sys.cfg.rx_head_symbols,
            gain,
            pulse: sys.pulse,
            weights,
            omegas,
        })
    }

    /// Receiver-window sample range of slot `k` (1-based); slot 1 also
    /// takes the head margin.
    pub fn slot_range(&self, k: usize) -> (usize, usize) {
        let base = self.head * self.oversampling;
        let start = if k == 1 { 0 } else { base + (k - 1) * self.oversampling };
        (start, base + k * self.oversampling)
    }

    fn check_input(&self, r: &TimeSignal) -> Result<()> {
        if r.len() != self.n_rx
            || (r.dt - self.dt).abs() > 1e-12 * self.dt
            || (r.t0 - self.t_first).abs() > 1e-9 * self.dt
        {
            return Err(Error::Framing(format!(
                "received window ({} samples at t0 {}) does not match the receiver grid ({} at {})",
                r.len(),
                r.t0,
                self.n_rx,
                self.t_first
            )));
        }
        Ok(())
    }

    fn new_state(&self) -> Result<ScatteringState> {
        ScatteringState::new(self.grid, self.dt, self.t_first)
    }

    /// Mirrored continuous spectrum of everything absorbed so far, as if the
    /// rest of the window were zero.
    pub fn readout(&self, state: &ScatteringState) -> Result<NonlinearSpectrum> {
        continuous_spectrum(&state.coefficients().conj_mirrored())
    }

    /// Matched-filter output for symbol `k`, divided by the launch gain:
    /// `(1/2pi) int U(w) G(w) e^{j w (k-1) Ts} dw` with `U(-2 lambda) = -rho(lambda)`.
    pub fn demodulate_symbol(&self, rho: &NonlinearSpectrum, k: usize) -> Complex64 {
        let c = (k as f64 - 1.0) * self.ts;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((r, w), om) in rho.rho.iter().zip(&self.weights).zip(&self.omegas) {
            acc -= r * w * Complex64::from_polar(1.0, om * c);
        }
        acc / self.gain
    }

    pub fn nfd_demodulate(&self, rho: &NonlinearSpectrum) -> Vec<Complex64> {
        (1..=self.n_info).map(|k| self.demodulate_symbol(rho, k)).collect()
    }

    /// GLM kernel samples `-gain u(t)/2` of the pulse train built from
    /// `symbols` (numbered from 1) over receiver samples `[start, end)`.
    pub fn reconstruction_kernel(&self, symbols: &[Complex64], start: usize, end: usize) -> Vec<Complex64> {
        let mut u = vec![Complex64::new(0.0, 0.0); end - start];
        let t_start = self.t_first + start as f64 * self.dt;
        let reach = self.pulse.support();
        let t_end = t_start + (end - start) as f64 * self.dt;
        let lo = (((t_start - reach) / self.ts).floor().max(0.0)) as usize;
        let hi = ((((t_end + reach) / self.ts).ceil() + 1.0).max(0.0) as usize).min(symbols.len());
        if lo < hi {
            add_pulses(&mut u, t_start, self.dt, &symbols[lo..hi], lo + 1, self.ts, &self.pulse);
        }
        let s = -0.5 * self.gain;
        u.iter().map(|v| v * s).collect()
    }

    fn march(marcher: &mut GlmMarcher, kernel: &[Complex64]) -> Result<Vec<Complex64>> {
        kernel.iter().map(|r| marcher.push(*r).map(|v| v.conj())).collect()
    }

    fn finish(&self, mut res: DetectionResult) -> DetectionResult {
        res.n_fnft_equiv = if res.fnft_span == 0 { 0 } else { res.fnft_samples.div_ceil(res.fnft_span) };
        res.n_bnft_equiv = if res.bnft_span == 0 { 0 } else { res.bnft_samples.div_ceil(res.bnft_span) };
        res
    }

    fn empty_result(&self) -> DetectionResult {
        DetectionResult {
            decided: Vec::with_capacity(self.n_info),
            samples: Vec::with_capacity(self.n_info),
            candidate_distances: Vec::new(),
            fnft_samples: 0,
            bnft_samples: 0,
            fnft_span: 0,
            bnft_span: 0,
            n_fnft_equiv: 0,
            n_bnft_equiv: 0,
        }
    }

    /// One forward transform of the whole window, then matched filtering.
    pub fn detect_fnft(&self, r: &TimeSignal) -> Result<DetectionResult> {
        self.check_input(r)?;
        let mut st = self.new_state()?;
        st.absorb(&r.samples);
        let rho = self.readout(&st)?;
        let mut res = self.empty_result();
        res.samples = self.nfd_demodulate(&rho);
        res.decided = res.samples.iter().map(|z| qpsk_decide(*z)).collect();
        res.fnft_samples = st.consumed;
        res.fnft_span = st.consumed;
        Ok(self.finish(res))
    }

    /// Symbol `k` from the spectrum of the received signal truncated at `t_k`;
    /// one running state is extended slot by slot.
    pub fn detect_ifnft(&self, r: &TimeSignal) -> Result<DetectionResult> {
        self.check_input(r)?;
        let mut st = self.new_state()?;
        let mut res = self.empty_result();
        for k in 1..=self.n_info {
            let (a, b) = self.slot_range(k);
            st.absorb(&r.samples[a..b]);
            let z = self.demodulate_symbol(&self.readout(&st)?, k);
            res.samples.push(z);
            res.decided.push(qpsk_decide(z));
        }
        res.fnft_samples = st.consumed;
        res.fnft_span = st.consumed;
        Ok(self.finish(res))
    }

    /// Symbol `k` from the spectrum of the signal that equals the noiseless
    /// reconstruction from past decisions up to `t_{k-1}` and the received
    /// signal on `(t_{k-1}, t_k]`.
    pub fn detect_dffnft(&self, r: &TimeSignal) -> Result<DetectionResult> {
        self.check_input(r)?;
        let mut res = self.empty_result();
        let mut checkpoint = self.new_state()?;
        let mut marcher = GlmMarcher::new(self.dt)?;
        let mut decided_pts: Vec<Complex64> = Vec::with_capacity(self.n_info);
        for k in 1..=self.n_info {
            if k > 1 {
                let (a, b) = self.slot_range(k - 1);
                let kernel = self.reconstruction_kernel(&decided_pts, a, b);
                let rec = Self::march(&mut marcher, &kernel)?;
                res.bnft_samples += rec.len();
                res.bnft_span = b;
                checkpoint.absorb(&rec);
                res.fnft_samples += rec.len();
            }
            let (a, b) = self.slot_range(k);
            let mut st = checkpoint.clone();
            st.absorb(&r.samples[a..b]);
            res.fnft_samples += b - a;
            res.fnft_span = b;
            let z = self.demodulate_symbol(&self.readout(&st)?, k);
            let m = qpsk_decide(z);
            res.samples.push(z);
            res.decided.push(m);
            decided_pts.push(QPSK[m]);
        }
        Ok(self.finish(res))
    }

    /// QPSK time-domain decision-feedback detection.
    pub fn detect_dfbnft(&self, r: &TimeSignal) -> Result<DetectionResult> {
        self.detect_dfbnft_with(r, &QPSK)
    }

    /// Time-domain decision feedback over an arbitrary constellation: for
    /// every candidate, continue the inverse transform of the decided prefix
    /// by one slot and keep the candidate closest (L2) to the received slot.
    pub fn detect_dfbnft_with(&self, r: &TimeSignal, constellation: &[Complex64]) -> Result<DetectionResult> {
        self.check_input(r)?;
        if constellation.is_empty() {
            return Err(Error::InvalidArgument("empty constellation".into()));
        }
        let mut res = self.empty_result();
        let mut marcher = GlmMarcher::new(self.dt)?;
        let mut pts: Vec<Complex64> = Vec::with_capacity(self.n_info);
        for k in 1..=self.n_info {
            let (a, b) = self.slot_range(k);
            let mut best: Option<(f64, usize, GlmMarcher)> = None;
            let mut dists = Vec::with_capacity(constellation.len());
            for (m, x) in constellation.iter().enumerate() {
                pts.push(*x);
                let kernel = self.reconstruction_kernel(&pts, a, b);
                pts.pop();
                let mut branch = marcher.clone();
                let rec = Self::march(&mut branch, &kernel)?;
                res.bnft_samples += rec.len();
                let d = rec.iter().zip(&r.samples[a..b]).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
                dists.push(d);
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                    best = Some((d, m, branch));
                }
            }
            res.bnft_span = b;
            let (_, m, branch) = best.expect("non-empty constellation");
            marcher = branch;
            pts.push(constellation[m]);
            res.decided.push(m);
            res.samples.push(constellation[m]);
            res.candidate_distances.push(dists);
        }
        Ok(self.finish(res))
    }

    pub fn detect(&self, kind: DetectorKind, r: &TimeSignal) -> Result<DetectionResult> {
        match kind {
            DetectorKind::Fnft => self.detect_fnft(r),
            DetectorKind::IFnft => self.detect_ifnft(r),
            DetectorKind::DfFnft => self.detect_dffnft(r),
            DetectorKind::DfBnft => self.detect_dfbnft(r),
        }
    }

    /// The signal whose spectrum the DF-FNFT detector uses at step `k`:
    /// `recon` for `t <= t_{k-1}`, `r` on `(t_{k-1}, t_k]`, zero afterwards.
    /// `recon` is the reconstruction over the receiver window.
    pub fn assemble_cleaned(&self, r: &TimeSignal, recon: &[Complex64], k: usize) -> TimeSignal {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_rx];
        let (a, b) = self.slot_range(k);
        out[..a].copy_from_slice(&recon[..a]);
        out[a..b].copy_from_slice(&r.samples[a..b]);
        TimeSignal { samples: out, dt: self.dt, t0: self.t_first, units: Units::Normalized }
    }

    /// Noiseless received waveform implied by `symbols` over the whole
    /// window, by the causal inverse transform used for decision feedback.
    pub fn reconstruct(&self, symbols: &[Complex64]) -> Result<TimeSignal> {
        let mut marcher = GlmMarcher::new(self.dt)?;
        let kernel = self.reconstruction_kernel(symbols, 0, self.n_rx);
        let samples = Self::march(&mut marcher, &kernel)?;
        TimeSignal::new(samples, self.dt, self.t_first, Units::Normalized)
    }

    /// The feedback signal of DF-FNFT over slots `1..=slots`: slot `j` is
    /// reconstructed from `symbols[..j]` only, continuing one marcher.
    pub fn causal_reconstruction(&self, symbols: &[Complex64], slots: usize) -> Result<Vec<Complex64>> {
        let mut marcher = GlmMarcher::new(self.dt)?;
        let mut out = Vec::new();
        for j in 1..=slots {
            let (a, b) = self.slot_range(j);
            let kernel = self.reconstruction_kernel(&symbols[..j], a, b);
            out.extend(Self::march(&mut marcher, &kernel)?);
        }
        Ok(out)
    }
}
