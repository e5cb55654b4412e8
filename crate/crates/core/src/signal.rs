//! Uniformly sampled complex waveforms.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Units {
    /// Amplitude in sqrt(W), time in seconds.
    Physical,
    /// Soliton units (see [`crate::channel::NormalizationScales`]).
    Normalized,
}

/// A uniformly sampled complex baseband waveform; sample `n` sits at `t0 + n * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
    pub units: Units,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>, dt: f64, t0: f64, units: Units) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("signal must hold at least one sample".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!("bad time grid dt={dt}, t0={t0}")));
        }
        Ok(Self { samples, dt, t0, units })
    }

    pub fn zeros(n: usize, dt: f64, t0: f64, units: Units) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], dt, t0, units)
    }

    /// Builds a signal by evaluating `f` on the grid.
    pub fn from_fn(
        n: usize,
        dt: f64,
        t0: f64,
        units: Units,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let samples = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::new(samples, dt, t0, units)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// Energy `sum |q_n|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }

    pub fn peak_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max)
    }

    /// Contiguous sub-range `[start, end)` as a new signal with the matching `t0`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "slice [{start}, {end}) out of range for {} samples",
                self.len()
            )));
        }
        Self::new(self.samples[start..end].to_vec(), self.dt, self.time(start), self.units)
    }

    /// `q(t) -> conj(q(-t))` on the mirrored grid.
    pub fn conj_time_reversed(&self) -> Self {
        Self {
            samples: self.samples.iter().rev().map(|s| s.conj()).collect(),
            dt: self.dt,
            t0: -self.t_end(),
            units: self.units,
        }
    }

    /// Index of the sample at time `t`, if `t` falls on the grid (to 1e-9 of a sample).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let n = x.round();
        if (x - n).abs() < 1e-9 && n >= 0.0 && (n as usize) < self.len() {
            Some(n as usize)
        } else {
            None
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in &mut self.samples {
            *s *= factor;
        }
    }
}

/// Relative L2 distance `||a - b|| / ||b||`.
pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Relative L-infinity distance `max|a - b| / max|b|`.
pub fn rel_linf(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    num / den
}
