use std::process::Command;

use nfdm::channel::ssfm_propagate;
use nfdm::detectors::{DetectorKind, Receiver};
use nfdm::harness::csv::to_csv_string;
use nfdm::harness::{optima, power_sweep, qfactor_from_ber, run_montecarlo, ExperimentConfig};
use nfdm::txrx::{bit_errors, qpsk_decide, SymbolFrame, System, QPSK, QPSK_BITS};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

fn small(noise: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.system.n_info = 8;
    cfg.system.power_dbm = -14.0;
    cfg.fiber.length_km = 200.0;
    cfg.run.n_bursts = 6;
    cfg.run.seed = 42;
    cfg.run.ssfm_step_km = 1.0;
    cfg.run.noise = noise;
    cfg.run.report_wall_time = false;
    cfg
}

#[test]
fn runs_are_byte_identical() {
    let cfg = small(true);
    let a = to_csv_string(&run_montecarlo(&cfg, -14.0).unwrap().records);
    let b = to_csv_string(&run_montecarlo(&cfg, -14.0).unwrap().records);
    assert_eq!(a, b);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = small(true);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| to_csv_string(&run_montecarlo(&cfg, -14.0).unwrap().records))
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn seed_changes_the_noise() {
    // -2 dBm is far past the optimum, so errors are plentiful.
    let mut cfg = small(true);
    cfg.system.n_info = 16;
    let a = run_montecarlo(&cfg, -2.0).unwrap().records;
    cfg.run.seed = 43;
    let b = run_montecarlo(&cfg, -2.0).unwrap().records;
    assert_ne!(a.iter().map(|r| r.errors).collect::<Vec<_>>(), b.iter().map(|r| r.errors).collect::<Vec<_>>());
}

#[test]
fn records_are_self_consistent() {
    let cfg = small(true);
    let rep = run_montecarlo(&cfg, -14.0).unwrap();
    assert!(rep.failures.is_empty());
    assert_eq!(rep.records.len(), DetectorKind::ALL.len());
    for r in &rep.records {
        assert_eq!(r.bits, 6 * 8 * 2);
        assert_eq!(r.ber, r.errors as f64 / r.bits as f64);
        assert_eq!(r.q2_db.to_bits(), qfactor_from_ber(r.ber).to_bits());
        assert_eq!((r.n_b, r.n_z, r.seed, r.failed_bursts), (8, cfg.system.n_guard, 42, 0));
        assert_eq!(r.eta, 8.0 / (8 + cfg.system.n_guard) as f64);
        assert_eq!(r.wall_time_s, 0.0);
    }
}

#[test]
fn noiseless_sweep_is_error_free() {
    let mut cfg = small(false);
    cfg.run.powers_dbm = vec![-20.0, -14.0];
    let (rep, opt) = power_sweep(&cfg).unwrap();
    assert_eq!(rep.records.len(), 2 * DetectorKind::ALL.len());
    assert!(rep.records.iter().all(|r| r.errors == 0 && r.q2_db == f64::INFINITY));
    // Every power ties at infinity, so the first one is reported.
    assert!(opt.iter().all(|o| o.power_dbm == -20.0));
}

#[test]
fn single_power_sweep_summary_is_the_record() {
    let mut cfg = small(true);
    cfg.run.powers_dbm = vec![-14.0];
    let (rep, opt) = power_sweep(&cfg).unwrap();
    assert_eq!(opt.len(), rep.records.len());
    for o in &opt {
        let r = rep.records.iter().find(|r| r.detector == o.detector).unwrap();
        assert_eq!(&o.record, r);
        assert_eq!(o.q2_db.to_bits(), r.q2_db.to_bits());
    }
}

#[test]
fn optimum_picks_the_best_power() {
    let mut cfg = small(true);
    cfg.run.powers_dbm = vec![-14.0];
    let base = run_montecarlo(&cfg, -14.0).unwrap().records[0].clone();
    let mut recs = vec![];
    for (p, e) in [(-20.0, 30), (-16.0, 3), (-12.0, 3), (-8.0, 90)] {
        let mut r = base.clone();
        r.power_dbm = p;
        r.errors = e;
        r.ber = e as f64 / r.bits as f64;
        r.q2_db = qfactor_from_ber(r.ber);
        recs.push(r);
    }
    let o = optima(&recs);
    assert_eq!(o.len(), 1);
    assert_eq!(o[0].power_dbm, -16.0);
}

#[test]
fn symbol_errors_count_gray_bits() {
    for a in 0..4 {
        for b in 0..4 {
            let want = (0..2).filter(|&i| QPSK_BITS[a][i] != QPSK_BITS[b][i]).count() as u64;
            assert_eq!(bit_errors(a, b), want);
            // A quarter-turn is a neighbour (one bit), a half-turn is two.
            let turned = qpsk_decide(QPSK[a] * Complex64::new(0.0, 1.0).powi(b as i32));
            assert_eq!(bit_errors(a, turned), [0, 1, 2, 1][b]);
        }
    }
}

#[test]
fn injected_flips_are_counted_exactly() {
    let cfg = small(false);
    let mut sys_cfg = cfg.system.clone();
    sys_cfg.n_info = 16;
    let sys = System::new(sys_cfg, cfg.fiber).unwrap();
    let frame = SymbolFrame::from_indices((0..16).map(|k| (k * 7 + 1) % 4).collect()).unwrap();
    let tx = sys.tx_build_burst(&frame).unwrap();
    let y = ssfm_propagate::<ChaCha8Rng>(&tx.launched, &sys.fiber, 200, None).unwrap();
    let r = sys.rx_frontend(&y).unwrap();
    let mut decided = Receiver::new(&sys, tx.gain).unwrap().detect_fnft(&r).unwrap().decided;
    assert_eq!(decided, frame.indices);
    // Quarter turns cost one bit, half turns two.
    let flips = [(0, 1), (3, 2), (7, 3), (8, 2), (15, 1)];
    for (k, turn) in flips {
        decided[k] = (decided[k] + turn) % 4;
    }
    let counted: u64 = decided.iter().zip(&frame.indices).map(|(a, b)| bit_errors(*a, *b)).sum();
    assert_eq!(counted, 1 + 2 + 1 + 2 + 1);
}

#[test]
fn failed_bursts_are_counted_not_scored() {
    // 128 symbols at -6 dBm need more energy than the synthesis can reach.
    let mut cfg = small(false);
    cfg.system.n_info = 128;
    cfg.fiber.length_km = 100.0;
    cfg.run.n_bursts = 2;
    let rep = run_montecarlo(&cfg, -6.0).unwrap();
    assert_eq!(rep.failures.len(), 2);
    assert_eq!(rep.failures[1].burst, 1);
    for r in &rep.records {
        assert_eq!((r.bits, r.errors, r.failed_bursts), (0, 0, 2));
        assert!(r.ber.is_nan());
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nfdm")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\nn_info = 0\n").unwrap();
    assert_eq!(cli(&["run", "-c", bad.to_str().unwrap()]).status.code(), Some(1));
    std::fs::write(&bad, "[run]\nbogus = 1\n").unwrap();
    assert_eq!(cli(&["run", "-c", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(cli(&["run", "-c", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    let out = cli(&["defaults"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(ExperimentConfig::from_toml_str(&String::from_utf8(out.stdout).unwrap()).is_ok());
}

#[test]
fn cli_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, small(false).to_toml_string()).unwrap();
    let csv_path = dir.path().join("out.csv");
    let out = cli(&["run", "-c", cfg_path.to_str().unwrap(), "-o", csv_path.to_str().unwrap(), "--power", "-16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 12);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[0] == "-16" && &r[8] == "inf"));
}

#[test]
fn cli_selftest_passes() {
    let out = cli(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
