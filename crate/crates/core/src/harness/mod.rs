//! Experiment configuration, Monte Carlo error counting, CSV output and
//! the self-test suite behind the command-line tool.

pub mod config;
pub mod csv;
pub mod metrics;
pub mod montecarlo;
pub mod selftest;

pub use config::{ExperimentConfig, RunParams};
pub use metrics::{qfactor_from_ber, qfactor_interval};
pub use montecarlo::{optima, power_sweep, run_montecarlo, simulate_burst, Optimum, ResultRecord, RunReport};
