//! Forward and inverse nonlinear Fourier transforms for the focusing
//! Zakharov-Shabat problem with vanishing boundaries,
//!
//! ```text
//! v'(t) = [[-j*lambda, q(t)], [-conj(q(t)), j*lambda]] v(t)
//! ```
//!
//! The forward transform accumulates exact piecewise-constant transfer
//! matrices sample by sample (Boffetta-Osborne), so that a running
//! [`ScatteringState`] can be extended by later portions of a signal. The
//! inverse transform solves the Gelfand-Levitan-Marchenko equations by a
//! trapezoidal Nyström discretization whose Toeplitz structure is exploited
//! by a block-Levinson recursion (see [`glm`]).
//!
//! Small-signal relation under this convention (pinned by tests):
//! `rho(lambda) ~= -conj(Q(-2 lambda))` with `Q(w) = int q(t) e^{-j w t} dt`.

mod fnft;
pub mod glm;
mod zs;

pub use fnft::{
    continuous_spectrum, fnft_extend, fnft_forward, LambdaGrid, NonlinearSpectrum,
    ScatteringCoefficients, ScatteringState, NEAR_SINGULAR_A,
};
pub use glm::{bnft_inverse, GlmMarcher};
pub use zs::{zs_step_matrix, Mat2};
