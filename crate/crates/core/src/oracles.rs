//! Independent reference computations used by the test suites.
//!
//! These are deliberately simple and slow: a Taylor scaling-and-squaring
//! matrix exponential, an RK4 integrator for the Zakharov-Shabat system, the
//! first-order (Born) reflection coefficient and closed-form dispersion of a
//! Gaussian pulse.

use num_complex::Complex64;

use crate::nft::{LambdaGrid, Mat2};
use crate::signal::TimeSignal;

/// `exp(m)` by scaling, a 20-term Taylor series and repeated squaring.
pub fn expm_dense(m: &Mat2) -> Mat2 {
    let norm = m.norm();
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.5 {
        s += 1;
    }
    let x = m.scale(Complex64::new(f64::powi(2.0, -s), 0.0));
    let mut term = Mat2::IDENTITY;
    let mut sum = Mat2::IDENTITY;
    for k in 1..=20 {
        term = (term * x).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Scattering coefficients `(a, b)` of `q` supported on `[ta, tb]`, by RK4
/// on the fundamental matrix with `steps` uniform steps.
pub fn zs_ode_coefficients(
    q: impl Fn(f64) -> Complex64,
    ta: f64,
    tb: f64,
    lambda: f64,
    steps: usize,
) -> (Complex64, Complex64) {
    let h = (tb - ta) / steps as f64;
    let gen = |t: f64| {
        let v = q(t);
        Mat2::new(Complex64::new(0.0, -lambda), v, -v.conj(), Complex64::new(0.0, lambda))
    };
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let mut p = Mat2::IDENTITY;
    for k in 0..steps {
        let t = ta + k as f64 * h;
        let k1 = gen(t) * p;
        let k2 = gen(t + 0.5 * h) * p.add(&k1.scale(half));
        let k3 = gen(t + 0.5 * h) * p.add(&k2.scale(half));
        let k4 = gen(t + h) * p.add(&k3.scale(full));
        let incr = k1.add(&k2.scale(Complex64::new(2.0, 0.0))).add(&k3.scale(Complex64::new(2.0, 0.0))).add(&k4);
        p = p.add(&incr.scale(Complex64::new(h / 6.0, 0.0)));
    }
    let a = Complex64::from_polar(1.0, lambda * tb) * p.0[0][0] * Complex64::from_polar(1.0, -lambda * ta);
    let b = Complex64::from_polar(1.0, -lambda * tb) * p.0[1][0] * Complex64::from_polar(1.0, -lambda * ta);
    (a, b)
}

/// First-order reflection coefficient of a sampled potential treated as
/// piecewise constant on cells of width `dt`:
/// `-sum_n conj(q_n) e^{-2j lambda t_n} dt sinc(lambda dt)`.
pub fn linearized_reflection(signal: &TimeSignal, grid: &LambdaGrid) -> Vec<Complex64> {
    grid.values()
        .map(|lambda| {
            let x = lambda * signal.dt;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            let sum: Complex64 = signal
                .samples
                .iter()
                .enumerate()
                .map(|(n, q)| q.conj() * Complex64::from_polar(1.0, -2.0 * lambda * signal.time(n)))
                .sum();
            -sum * signal.dt * sinc
        })
        .collect()
}

/// Field of the linear dispersive equation `j q_z + (s/2) q_tt = 0` at
/// distance `z` for the input `exp(-t^2 / (2 w^2))`, with `s` the sign
/// convention of the second-derivative term.
pub fn dispersed_gaussian(t: f64, w: f64, s: f64, z: f64) -> Complex64 {
    // q(z, t) = w / sqrt(w^2 + j s z) * exp(-t^2 / (2 (w^2 + j s z)))
    let d = Complex64::new(w * w, s * z);
    (w / d.sqrt()) * (-(t * t) / (2.0 * d)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let m = Mat2::new(Complex64::new(1.0, 0.5), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0));
        let e = expm_dense(&m);
        assert!((e.0[0][0] - Complex64::new(1.0, 0.5).exp()).norm() < 1e-13);
        assert!((e.0[1][1] - (-2.0f64).exp()).norm() < 1e-13);
        assert!(e.0[0][1].norm() < 1e-15);
    }

    #[test]
    fn dispersed_gaussian_at_origin_is_input() {
        assert!((dispersed_gaussian(0.7, 1.3, 1.0, 0.0) - (-0.49f64 / (2.0 * 1.69)).exp()).norm() < 1e-15);
    }

    #[test]
    fn dispersed_gaussian_conserves_energy() {
        let (w, z) = (0.8, 3.0);
        let dt = 0.01;
        let e: f64 = (-4000..4000).map(|k| dispersed_gaussian(k as f64 * dt, w, -1.0, z).norm_sqr()).sum::<f64>() * dt;
        let e0 = w * std::f64::consts::PI.sqrt();
        assert!((e - e0).abs() < 1e-9);
    }
}
