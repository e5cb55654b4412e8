use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let mut r = *self;
        for row in &mut r.0 {
            for c in row {
                *c *= s;
            }
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    #[inline]
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

/// Exact propagator of the constant-potential Zakharov-Shabat system over one sample:
/// `exp(dt * [[-j lambda, q], [-conj(q), j lambda]])`.
///
/// The generator squares to `-(lambda^2 + |q|^2) I`, so the exponential is
/// `cos(D dt) I + sin(D dt)/D * A` with `D = sqrt(lambda^2 + |q|^2)`.
pub fn zs_step_matrix(q: Complex64, lambda: f64, dt: f64) -> Result<Mat2> {
    if !(q.is_finite() && lambda.is_finite() && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite step input q={q}, lambda={lambda}, dt={dt}"
        )));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    Ok(step_matrix(q, q.norm_sqr(), lambda, dt))
}

#[inline]
pub(crate) fn step_matrix(q: Complex64, q2: f64, lambda: f64, dt: f64) -> Mat2 {
    let d = (lambda * lambda + q2).sqrt();
    let (s, c) = (d * dt).sin_cos();
    let sd = if d > 0.0 { s / d } else { dt };
    Mat2([
        [Complex64::new(c, -lambda * sd), q * sd],
        [-q.conj() * sd, Complex64::new(c, lambda * sd)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::expm_dense;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        a.sub(b).0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn free_evolution() {
        let m = zs_step_matrix(c(0.0, 0.0), 1.0, 0.5).unwrap();
        let want = Mat2::new(c(0.0, -0.5).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.5).exp());
        assert!(max_diff(&m, &want) < 1e-15);
    }

    #[test]
    fn pure_rotation_at_zero_lambda() {
        let (a, dt) = (1.3, 0.7);
        let m = zs_step_matrix(c(a, 0.0), 0.0, dt).unwrap();
        let (s, co) = (a * dt).sin_cos();
        let want = Mat2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
        assert!(max_diff(&m, &want) < 1e-15);
    }

    #[test]
    fn matches_dense_exponential() {
        let (q, lam, dt) = (c(0.3, 0.4), 0.7, 0.1);
        let m = zs_step_matrix(q, lam, dt).unwrap();
        let gen = Mat2::new(c(0.0, -lam), q, -q.conj(), c(0.0, lam)).scale(c(dt, 0.0));
        let want = expm_dense(&gen);
        assert!(max_diff(&m, &want) < 1e-12);
        assert!((m.det() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(zs_step_matrix(c(f64::NAN, 0.0), 0.0, 0.1).is_err());
        assert!(zs_step_matrix(c(0.0, 0.0), f64::INFINITY, 0.1).is_err());
        assert!(zs_step_matrix(c(0.0, 0.0), 0.0, 0.0).is_err());
    }
}
