use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::zs::{step_matrix, Mat2};
use crate::error::{Error, Result};
use crate::signal::TimeSignal;

/// Below this |a(lambda)| the continuous spectrum is reported as near-singular.
pub const NEAR_SINGULAR_A: f64 = 1e-12;

/// Uniform grid of real nonlinear frequencies `start + j * step`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl LambdaGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len == 0 || !(step > 0.0) || !start.is_finite() || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad lambda grid start={start}, step={step}, len={len}"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// `len` points spanning the Nyquist band `[-pi/(2 dt), pi/(2 dt))` of a
    /// time grid with spacing `dt`. With `len = n` the grid is in one-to-one
    /// DFT correspondence (`omega = -2 lambda`) with `n` time samples.
    pub fn nyquist(len: usize, dt: f64) -> Result<Self> {
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("nyquist grid needs even len >= 2, got {len}")));
        }
        let step = PI / (len as f64 * dt);
        Self::new(-(len as f64 / 2.0) * step, step, len)
    }

    pub fn at(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.at(j))
    }

    fn check_nyquist(&self, dt: f64) -> Result<()> {
        let limit = PI / (2.0 * dt);
        for lambda in [self.start, self.end()] {
            if lambda.abs() > limit * (1.0 + 1e-12) {
                return Err(Error::Range { lambda, limit });
            }
        }
        Ok(())
    }
}

/// Continuous nonlinear spectrum `rho(lambda)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearSpectrum {
    pub grid: LambdaGrid,
    pub rho: Vec<Complex64>,
}

impl NonlinearSpectrum {
    pub fn new(grid: LambdaGrid, rho: Vec<Complex64>) -> Result<Self> {
        if rho.len() != grid.len {
            return Err(Error::InvalidArgument(format!(
                "spectrum has {} values for {} grid points",
                rho.len(),
                grid.len
            )));
        }
        if let Some(j) = rho.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho not finite at lambda={}", grid.at(j))));
        }
        Ok(Self { grid, rho })
    }

    pub fn zeros(grid: LambdaGrid) -> Self {
        Self { grid, rho: vec![Complex64::new(0.0, 0.0); grid.len] }
    }

    /// Signal energy implied by the spectrum: `(1/pi) int log(1 + |rho|^2) dlambda`
    /// (exact in the absence of discrete eigenvalues).
    pub fn energy(&self) -> f64 {
        self.rho.iter().map(|r| r.norm_sqr().ln_1p()).sum::<f64>() * self.grid.step / PI
    }
}

/// Scattering coefficients `a(lambda)`, `b(lambda)` on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCoefficients {
    pub grid: LambdaGrid,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl ScatteringCoefficients {
    /// `max | |a|^2 + |b|^2 - 1 |` over the grid.
    pub fn unimodularity_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Coefficients of the conjugate time-reversed potential `conj(q(-t))`:
    /// the transfer matrix maps to `sigma S^{-1} sigma`, i.e. `(a, conj(b))`.
    pub fn conj_mirrored(&self) -> Self {
        Self { grid: self.grid, a: self.a.clone(), b: self.b.iter().map(|b| b.conj()).collect() }
    }
}

/// Running forward-scattering state: per-lambda transfer matrix of all samples
/// absorbed so far, in absorption order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    pub grid: LambdaGrid,
    pub dt: f64,
    /// Time of the first sample this state covers (or will cover).
    pub t_first: f64,
    /// Number of samples absorbed.
    pub consumed: usize,
    matrices: Vec<Mat2>,
}

impl ScatteringState {
    pub fn new(grid: LambdaGrid, dt: f64, t_first: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t_first.is_finite() {
            return Err(Error::InvalidArgument(format!("bad state grid dt={dt}, t_first={t_first}")));
        }
        grid.check_nyquist(dt)?;
        Ok(Self { grid, dt, t_first, consumed: 0, matrices: vec![Mat2::IDENTITY; grid.len] })
    }

    /// Time at which the next absorbed sample must sit.
    pub fn next_time(&self) -> f64 {
        self.t_first + self.consumed as f64 * self.dt
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    /// Absorbs raw samples starting at [`Self::next_time`].
    pub fn absorb(&mut self, samples: &[Complex64]) {
        if samples.is_empty() {
            return;
        }
        let q2: Vec<f64> = samples.iter().map(|q| q.norm_sqr()).collect();
        let dt = self.dt;
        let grid = self.grid;
        self.matrices.par_iter_mut().enumerate().for_each(|(j, p)| {
            let lambda = grid.at(j);
            let mut acc = *p;
            for (q, &m2) in samples.iter().zip(&q2) {
                acc = step_matrix(*q, m2, lambda, dt) * acc;
            }
            *p = acc;
        });
        self.consumed += samples.len();
    }

    /// Coefficients with boundary phases referenced to the covered interval
    /// `[t_first - dt/2, t_last + dt/2]`; equal to those of the signal
    /// zero-padded to any longer window.
    pub fn coefficients(&self) -> ScatteringCoefficients {
        let t1 = self.t_first - 0.5 * self.dt;
        let t2 = self.t_first + (self.consumed as f64 - 0.5) * self.dt;
        let (a, b) = self
            .matrices
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let lambda = self.grid.at(j);
                if self.consumed == 0 {
                    return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                }
                let left = Complex64::from_polar(1.0, -lambda * t1);
                let a = Complex64::from_polar(1.0, lambda * t2) * p.0[0][0] * left;
                let b = Complex64::from_polar(1.0, -lambda * t2) * p.0[1][0] * left;
                (a, b)
            })
            .unzip();
        ScatteringCoefficients { grid: self.grid, a, b }
    }
}

/// Forward NFT by ordered products of exact per-sample transfer matrices.
pub fn fnft_forward(signal: &TimeSignal, grid: LambdaGrid) -> Result<ScatteringCoefficients> {
    let state = ScatteringState::new(grid, signal.dt, signal.t0)?;
    Ok(fnft_extend(state, signal)?.coefficients())
}

/// Extends a scattering state by a segment contiguous with what it has absorbed.
pub fn fnft_extend(mut state: ScatteringState, segment: &TimeSignal) -> Result<ScatteringState> {
    if ((segment.dt - state.dt) / state.dt).abs() > 1e-12 {
        return Err(Error::Contiguity(format!("dt {} != state dt {}", segment.dt, state.dt)));
    }
    let expected = state.next_time();
    if (segment.t0 - expected).abs() > 1e-9 * state.dt.max(expected.abs() * 1e-3) {
        return Err(Error::Contiguity(format!(
            "segment starts at {}, state expects {}",
            segment.t0, expected
        )));
    }
    if let Some(q) = segment.samples.iter().find(|q| !q.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite sample {q}")));
    }
    state.absorb(&segment.samples);
    Ok(state)
}

/// `rho = b / a` pointwise.
pub fn continuous_spectrum(coeffs: &ScatteringCoefficients) -> Result<NonlinearSpectrum> {
    let mut rho = Vec::with_capacity(coeffs.a.len());
    for (j, (a, b)) in coeffs.a.iter().zip(&coeffs.b).enumerate() {
        let magnitude = a.norm();
        if !(magnitude >= NEAR_SINGULAR_A) {
            return Err(Error::NearSingularSpectrum { lambda: coeffs.grid.at(j), magnitude });
        }
        rho.push(b / a);
    }
    NonlinearSpectrum::new(coeffs.grid, rho)
}
