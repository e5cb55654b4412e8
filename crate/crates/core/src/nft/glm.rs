//! Inverse NFT by the Gelfand-Levitan-Marchenko equations.
//!
//! With `F(y) = (1/2pi) int rho(lambda) e^{j lambda y} dlambda` the right-sided
//! GLM system reads
//!
//! ```text
//! conj-swap(K)(t, y) + [0, 1] F(t + y) + int_t^inf K(t, s) F(s + y) ds = 0,   y > t,
//! q(t) = -2 K_1(t, t).
//! ```
//!
//! Discretizing on a grid that starts at the right end of the support and
//! moves left, the system at every position is block Toeplitz in the kernel
//! samples `F(2(T - k dt))`, and each new position borders the previous
//! system by one block. [`GlmMarcher`] keeps the first and last block columns
//! of the inverse and updates them with a block-Levinson step, so `n` output
//! samples cost `O(n^2)`. The trapezoidal end-point weights are applied as a
//! rank-two correction, which makes the scheme second order in `dt`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::fnft::NonlinearSpectrum;
use super::zs::Mat2;
use crate::error::{Error, Result};
use crate::signal::{TimeSignal, Units};

/// Largest tolerated norm of the Levinson update factors.
const MAX_CONDITION: f64 = 1e10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Incremental GLM solver.
///
/// Each [`push`](Self::push) supplies the next kernel sample
/// `F(2 (T - m dt))`, `m = 0, 1, ...`, and returns `q(T - m dt)`. The output
/// at step `m` depends only on kernel samples `0..=m`, so the marcher can be
/// cloned to explore alternative continuations.
#[derive(Debug, Clone)]
pub struct GlmMarcher {
    w: f64,
    kernel: Vec<Complex64>,
    f: Vec<Mat2>,
    b: Vec<Mat2>,
    condition: f64,
}

impl GlmMarcher {
    /// Marcher for sample spacing `dt` (kernel spacing `2 dt`).
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("GLM step must be positive, got {dt}")));
        }
        Ok(Self { w: 2.0 * dt, kernel: Vec::new(), f: Vec::new(), b: Vec::new(), condition: 1.0 })
    }

    /// Number of samples produced so far.
    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    /// Largest norm of a Levinson update factor seen so far.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Consumes the next kernel sample and returns the next potential sample.
    pub fn push(&mut self, r: Complex64) -> Result<Complex64> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite GLM kernel sample {r}")));
        }
        let w = self.w;
        self.kernel.push(r);
        let n = self.kernel.len() - 1;
        if n == 0 {
            let c0 = Mat2::new(c(1.0), -w * r, w * r.conj(), c(1.0));
            let inv = c0.inverse().ok_or(Error::Conditioning(f64::INFINITY))?;
            self.f.push(inv);
            self.b.push(inv);
            self.note_condition(inv.norm())?;
            return Ok(-2.0 * r.conj());
        }

        // Residuals of the bordered system applied to the old inverse columns.
        let mut ef1 = [Complex64::new(0.0, 0.0); 2];
        let mut eb0 = [Complex64::new(0.0, 0.0); 2];
        for j in 0..n {
            let kf = self.kernel[n - j].conj();
            let kb = self.kernel[1 + j];
            let fj = &self.f[j].0[0];
            let bj = &self.b[j].0[1];
            for col in 0..2 {
                ef1[col] += kf * fj[col];
                eb0[col] += kb * bj[col];
            }
        }
        let z = Complex64::new(0.0, 0.0);
        let ef = Mat2::new(z, z, w * ef1[0], w * ef1[1]);
        let eb = Mat2::new(-w * eb0[0], -w * eb0[1], z, z);
        let alpha = Mat2::IDENTITY
            .sub(&(eb * ef))
            .inverse()
            .ok_or(Error::Conditioning(f64::INFINITY))?;
        let delta = Mat2::IDENTITY
            .sub(&(ef * eb))
            .inverse()
            .ok_or(Error::Conditioning(f64::INFINITY))?;
        self.note_condition(alpha.norm().max(delta.norm()))?;
        let beta = (ef * alpha).scale(c(-1.0));
        let gamma = (eb * delta).scale(c(-1.0));

        self.f.push(Mat2::ZERO);
        self.b.push(Mat2::ZERO);
        for j in (0..=n).rev() {
            let (fj, bprev) = (self.f[j], if j > 0 { self.b[j - 1] } else { Mat2::ZERO });
            self.f[j] = (fj * alpha).add(&(bprev * beta));
            self.b[j] = (fj * gamma).add(&(bprev * delta));
        }

        // Trapezoidal end weights: halve the two corner contributions.
        let k = Mat2::new(self.f[0].0[0][0], self.b[0].0[0][1], self.f[n].0[1][0], self.b[n].0[1][1]);
        let g = Mat2::IDENTITY.sub(&k).scale(c(-0.5));
        let zv = [self.b[0].0[0][1] / w, (self.b[n].0[1][1] - 1.0) / w];
        let m = Mat2::IDENTITY.add(&g).inverse().ok_or(Error::Conditioning(f64::INFINITY))?;
        let sol = [
            m.0[0][0] * zv[0] + m.0[0][1] * zv[1],
            m.0[1][0] * zv[0] + m.0[1][1] * zv[1],
        ];
        let u0 = zv[0] - (g.0[0][0] * sol[0] + g.0[0][1] * sol[1]);
        let q = -2.0 * u0.conj();
        if !q.is_finite() {
            return Err(Error::Conditioning(f64::INFINITY));
        }
        Ok(q)
    }

    fn note_condition(&mut self, v: f64) -> Result<()> {
        if !(v.is_finite() && v <= MAX_CONDITION) {
            return Err(Error::Conditioning(v));
        }
        self.condition = self.condition.max(v);
        Ok(())
    }
}

/// `F(y) = (1/2pi) sum_j rho_j e^{j lambda_j y} dlambda` at each requested `y`.
pub fn glm_kernel(spectrum: &NonlinearSpectrum, ys: &[f64]) -> Vec<Complex64> {
    let grid = spectrum.grid;
    let scale = grid.step / (2.0 * std::f64::consts::PI);
    ys.par_iter()
        .map(|&y| {
            let step = Complex64::from_polar(1.0, grid.step * y);
            let mut ph = Complex64::from_polar(1.0, grid.start * y);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, r) in spectrum.rho.iter().enumerate() {
                if j % 64 == 0 {
                    ph = Complex64::from_polar(1.0, grid.at(j) * y);
                }
                acc += r * ph;
                ph *= step;
            }
            acc * scale
        })
        .collect()
}

/// Inverse NFT: the potential on `t0 + k dt`, `k < n`, whose continuous
/// spectrum is `spectrum` (no discrete eigenvalues).
///
/// The `lambda` grid must resolve the kernel over `[2 t0, 2 t_end]`
/// without wrap-around; twice the Nyquist density of the time grid suffices
/// for moderately nonlinear signals.
pub fn bnft_inverse(spectrum: &NonlinearSpectrum, t0: f64, dt: f64, n: usize) -> Result<TimeSignal> {
    if n == 0 {
        return Err(Error::InvalidArgument("bnft_inverse needs n >= 1".into()));
    }
    let t_end = t0 + (n - 1) as f64 * dt;
    let ys: Vec<f64> = (0..n).map(|m| 2.0 * (t_end - m as f64 * dt)).collect();
    let kernel = glm_kernel(spectrum, &ys);
    let mut marcher = GlmMarcher::new(dt)?;
    let mut out = Vec::with_capacity(n);
    for r in kernel {
        out.push(marcher.push(r)?);
    }
    out.reverse();
    TimeSignal::new(out, dt, t0, Units::Normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nft::{continuous_spectrum, fnft_forward, LambdaGrid};
    use crate::signal::rel_linf;

    fn gauss(n: usize, dt: f64, amp: f64) -> TimeSignal {
        let t0 = -(n as f64) * dt / 2.0;
        TimeSignal::from_fn(n, dt, t0, Units::Normalized, |t| {
            Complex64::new(amp * (-t * t / 2.0).exp(), 0.0) * Complex64::new(0.0, 0.3 * t).exp()
        })
        .unwrap()
    }

    fn round_trip_error(n: usize, dt: f64, amp: f64) -> f64 {
        let q = gauss(n, dt, amp);
        let grid = LambdaGrid::nyquist(2 * n, dt).unwrap();
        let rho = continuous_spectrum(&fnft_forward(&q, grid).unwrap()).unwrap();
        let back = bnft_inverse(&rho, q.t0, dt, n).unwrap();
        rel_linf(&back.samples, &q.samples)
    }

    #[test]
    fn round_trip_converges_at_second_order() {
        let e1 = round_trip_error(128, 0.1, 0.3);
        let e2 = round_trip_error(256, 0.05, 0.3);
        assert!(e2 < 3e-4, "e2 = {e2}");
        assert!(e1 / e2 > 3.0, "order ratio {}", e1 / e2);
    }

    #[test]
    fn linear_regime_is_exact_inverse_of_kernel() {
        // For tiny signals the GLM solution reduces to q(t) = -2 conj(F(2t)).
        let mut m = GlmMarcher::new(0.1).unwrap();
        let r = Complex64::new(1e-9, -2e-9);
        let q = m.push(r).unwrap();
        assert!((q + 2.0 * r.conj()).norm() < 1e-20);
        for _ in 0..20 {
            let q = m.push(r).unwrap();
            assert!((q + 2.0 * r.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn clone_then_push_matches_straight_run() {
        let ks: Vec<Complex64> =
            (0..30).map(|k| Complex64::from_polar(0.2, 0.3 * k as f64) * (-(k as f64 - 15.0).powi(2) / 40.0).exp()).collect();
        let mut a = GlmMarcher::new(0.2).unwrap();
        let mut qa = vec![];
        for k in &ks {
            qa.push(a.push(*k).unwrap());
        }
        let mut b = GlmMarcher::new(0.2).unwrap();
        for k in &ks[..10] {
            b.push(*k).unwrap();
        }
        let mut b2 = b.clone();
        for (i, k) in ks[10..].iter().enumerate() {
            assert_eq!(b2.push(*k).unwrap(), qa[10 + i]);
        }
        assert_eq!(b2.len(), 30);
        assert!(b.condition_estimate() >= 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GlmMarcher::new(0.0).is_err());
        let mut m = GlmMarcher::new(0.1).unwrap();
        assert!(m.push(Complex64::new(f64::NAN, 0.0)).is_err());
    }
}
