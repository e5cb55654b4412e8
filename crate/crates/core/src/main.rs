use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfdm::harness::csv::{fmt_g9, write_records};
use nfdm::harness::{power_sweep, run_montecarlo, selftest, ExperimentConfig, RunReport};
use nfdm::Error;

#[derive(Parser)]
#[command(name = "nfdm", version, about = "NFDM detector Monte Carlo lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error counting at a single launch power.
    Run {
        #[command(flatten)]
        common: Common,
        /// Launch power in dBm (defaults to system.power_dbm).
        #[arg(long, allow_hyphen_values = true)]
        power: Option<f64>,
    },
    /// Error counting over run.powers_dbm, with the optimum per detector.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Fast oracle and invariant checks.
    Selftest,
    /// Print the default configuration as TOML.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bursts: Option<usize>,
    /// Disable ASE noise.
    #[arg(long)]
    noiseless: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(b) = self.bursts {
            cfg.run.n_bursts = b;
        }
        if self.noiseless {
            cfg.run.noise = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn write(&self, report: &RunReport) -> Result<(), Error> {
        for f in &report.failures {
            eprintln!("burst {} (seed {}, {} dBm) failed: {}", f.burst, f.seed, fmt_g9(f.power_dbm), f.error);
        }
        match &self.out {
            Some(p) => write_records(File::create(p)?, &report.records),
            None => write_records(io::stdout().lock(), &report.records),
        }
    }
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.cmd {
        Command::Run { common, power } => common.load().and_then(|cfg| {
            let p = power.unwrap_or(cfg.system.power_dbm);
            let rep = run_montecarlo(&cfg, p)?;
            common.write(&rep)
        }),
        Command::Sweep { common } => common.load().and_then(|cfg| {
            let (rep, optima) = power_sweep(&cfg)?;
            common.write(&rep)?;
            for o in &optima {
                eprintln!("optimum {}: {} dBm, Q^2 {} dB", o.detector, fmt_g9(o.power_dbm), fmt_g9(o.q2_db));
            }
            Ok(())
        }),
        Command::Selftest => {
            let results = selftest::run_all();
            let mut out = io::stdout().lock();
            for r in &results {
                let _ = writeln!(out, "{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            let _ = writeln!(out, "{} checks, {failed} failed", results.len());
            if failed > 0 {
                return ExitCode::from(2);
            }
            Ok(())
        }
        Command::Defaults => {
            print!("{}", ExperimentConfig::default().to_toml_string());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
