//! Nonlinear frequency-division multiplexing laboratory.
//!
//! * [`nft`]: forward, incremental and inverse nonlinear Fourier transforms.
//! * [`channel`]: split-step fiber propagation with distributed ASE noise.
//! * [`txrx`]: nonlinear inverse synthesis transmitter and receiver front end.
//! * [`detectors`]: plain, incremental and decision-feedback detectors.
//! * [`harness`]: Monte Carlo BER runs, CSV output and self-tests.

pub mod channel;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod nft;
pub mod oracles;
pub mod signal;
pub mod txrx;

pub use error::{Error, Result};
