use nfdm::channel::{min_steps, ssfm_propagate, FiberParams};
use nfdm::detectors::{DetectorKind, Receiver};
use nfdm::nft::{continuous_spectrum, fnft_forward, NonlinearSpectrum};
use nfdm::signal::{rel_l2, TimeSignal, Units};
use nfdm::txrx::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Link {
    sys: System,
    frame: SymbolFrame,
    rx: Receiver,
    r: TimeSignal,
}

fn link(n_info: usize, power_dbm: f64, length_km: f64, seed: u64) -> Link {
    let cfg = SystemConfig { n_info, power_dbm, ..Default::default() };
    let sys = System::new(cfg, FiberParams { length_km, ..Default::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = SymbolFrame::from_indices((0..n_info).map(|_| rng.random_range(0..4)).collect()).unwrap();
    let tx = sys.tx_build_burst(&frame).unwrap();
    let steps = (length_km.ceil() as usize).max(min_steps(&sys.fiber, tx.launched.peak_power()));
    let y = ssfm_propagate::<ChaCha8Rng>(&tx.launched, &sys.fiber, steps, None).unwrap();
    let r = sys.rx_frontend(&y).unwrap();
    let rx = Receiver::new(&sys, tx.gain).unwrap();
    Link { sys, frame, rx, r }
}

fn demod_of(rx: &Receiver, samples: &[Complex64], k: usize) -> Complex64 {
    let s = TimeSignal::new(samples.to_vec(), rx.dt, rx.t_first, Units::Normalized).unwrap();
    let co = fnft_forward(&s, rx.grid).unwrap().conj_mirrored();
    rx.demodulate_symbol(&continuous_spectrum(&co).unwrap(), k)
}

#[test]
fn detector_names_round_trip() {
    for d in DetectorKind::ALL {
        assert_eq!(d.to_string().parse::<DetectorKind>().unwrap(), d);
    }
    assert!("bnft".parse::<DetectorKind>().is_err());
}

#[test]
fn operation_counters_follow_the_complexity_contracts() {
    let l = link(64, -20.0, 1000.0, 1);
    let want = [(1, 0), (1, 0), (2, 1), (0, 4)];
    for (d, w) in DetectorKind::ALL.iter().zip(want) {
        let res = l.rx.detect(*d, &l.r).unwrap();
        assert_eq!((res.n_fnft_equiv, res.n_bnft_equiv), w, "{d}");
        assert_eq!(res.decided.len(), 64);
        assert_eq!(res.samples.len(), 64);
    }
}

#[test]
fn zero_spectrum_demodulates_to_zero() {
    let l = link(4, -20.0, 100.0, 2);
    let z = l.rx.nfd_demodulate(&NonlinearSpectrum::zeros(l.rx.grid));
    assert!(z.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn single_symbol_keeps_its_phase() {
    let l = link(1, -30.0, 1000.0, 3);
    let res = l.rx.detect_fnft(&l.r).unwrap();
    let sent = QPSK[l.frame.indices[0]];
    let dphi = (res.samples[0] / sent).arg();
    assert!(dphi.abs() < 1e-3, "phase error {dphi}");
    let ifnft = l.rx.detect_ifnft(&l.r).unwrap();
    assert_eq!(ifnft.decided, res.decided);
}

#[test]
fn single_symbol_bursts_decide_alike_under_noise() {
    let cfg = SystemConfig { n_info: 1, power_dbm: -20.0, ..Default::default() };
    let sys = System::new(cfg, FiberParams { length_km: 1000.0, ..Default::default() }).unwrap();
    for seed in 0..20 {
        let frame = SymbolFrame::from_indices(vec![(seed % 4) as usize]).unwrap();
        let tx = sys.tx_build_burst(&frame).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = ssfm_propagate(&tx.launched, &sys.fiber, 1000, Some(&mut rng)).unwrap();
        let r = sys.rx_frontend(&y).unwrap();
        let rx = Receiver::new(&sys, tx.gain).unwrap();
        assert_eq!(rx.detect_fnft(&r).unwrap().decided, rx.detect_ifnft(&r).unwrap().decided);
    }
}

#[test]
fn low_power_samples_sit_on_the_constellation() {
    let l = link(16, -30.0, 1000.0, 4);
    let res = l.rx.detect_fnft(&l.r).unwrap();
    // Only neighbouring pulses leak in: overlap exp(-ts^2 / (4 sigma^2)) each.
    let half = statrs::function::erf::erf_inv(l.sys.cfg.pulse_energy_fraction);
    let isi = 2.0 * (-half * half).exp();
    for (z, m) in res.samples.iter().zip(&l.frame.indices) {
        let e = (z - QPSK[*m]).norm();
        assert!(e < isi + 5e-3, "{z} vs {}, isi bound {isi}", QPSK[*m]);
    }
}

#[test]
fn noiseless_detection_is_error_free_at_moderate_power() {
    let l = link(32, -14.0, 1000.0, 5);
    for d in DetectorKind::ALL {
        assert_eq!(l.rx.detect(d, &l.r).unwrap().decided, l.frame.indices, "{d}");
    }
}

#[test]
fn ifnft_reads_the_zero_padded_truncated_signal() {
    let l = link(8, -14.0, 1000.0, 6);
    let res = l.rx.detect_ifnft(&l.r).unwrap();
    for k in 1..=8 {
        let (_, b) = l.rx.slot_range(k);
        let mut trunc = l.r.samples.clone();
        trunc[b..].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let want = demod_of(&l.rx, &trunc, k);
        assert!((res.samples[k - 1] - want).norm() <= 1e-9 * want.norm(), "k = {k}");
    }
}

#[test]
fn dffnft_first_step_is_the_ifnft_first_step() {
    let l = link(8, -10.0, 1000.0, 7);
    let a = l.rx.detect_dffnft(&l.r).unwrap();
    let b = l.rx.detect_ifnft(&l.r).unwrap();
    assert_eq!(a.samples[0], b.samples[0]);
    assert_eq!(a.decided[0], b.decided[0]);
}

#[test]
fn dffnft_reads_the_assembled_signal() {
    let l = link(8, -14.0, 1000.0, 8);
    let res = l.rx.detect_dffnft(&l.r).unwrap();
    let pts: Vec<Complex64> = res.decided.iter().map(|m| QPSK[*m]).collect();
    for k in 2..=8 {
        let mut rec = l.rx.causal_reconstruction(&pts, k - 1).unwrap();
        rec.resize(l.rx.n_rx, Complex64::new(0.0, 0.0));
        let assembled = l.rx.assemble_cleaned(&l.r, &rec, k);
        let want = demod_of(&l.rx, &assembled.samples, k);
        assert!((res.samples[k - 1] - want).norm() <= 1e-9 * want.norm(), "k = {k}");
    }
}

#[test]
fn assembly_matches_piecewise_definition() {
    let l = link(6, -14.0, 100.0, 9);
    let recon: Vec<Complex64> = (0..l.rx.n_rx).map(|n| Complex64::new(n as f64, -1.0)).collect();
    for k in 1..=6 {
        let got = l.rx.assemble_cleaned(&l.r, &recon, k);
        let t_prev = l.sys.layout.t_k(k - 1);
        let t_k = l.sys.layout.t_k(k);
        for n in 0..l.rx.n_rx {
            let t = got.time(n);
            let eps = 1e-9 * l.rx.dt;
            // The head margin belongs to slot 1.
            let want = if k > 1 && t <= t_prev + eps {
                recon[n]
            } else if t <= t_k + eps {
                l.r.samples[n]
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert_eq!(got.samples[n], want, "k = {k}, n = {n}");
        }
    }
}

#[test]
fn reconstruction_matches_the_received_signal_at_low_power() {
    let l = link(32, -30.0, 1000.0, 10);
    let rec = l.rx.reconstruct(&l.frame.symbols).unwrap();
    let err = rel_l2(&rec.samples, &l.r.samples);
    assert!(err <= 1e-3, "relative error {err}");
}

#[test]
fn corrupted_first_decision_changes_later_feedback() {
    let l = link(8, -14.0, 1000.0, 11);
    let good = l.rx.causal_reconstruction(&l.frame.symbols, 8).unwrap();
    let mut bad_syms = l.frame.symbols.clone();
    bad_syms[0] = -bad_syms[0];
    let bad = l.rx.causal_reconstruction(&bad_syms, 8).unwrap();
    let (a, b) = l.rx.slot_range(6);
    assert!(rel_l2(&bad[a..b], &good[a..b]) > 1e-3);
}

#[test]
fn dfbnft_single_point_constellation() {
    let l = link(8, -14.0, 1000.0, 12);
    let res = l.rx.detect_dfbnft_with(&l.r, &[QPSK[2]]).unwrap();
    assert!(res.decided.iter().all(|&m| m == 0));
    assert_eq!((res.n_fnft_equiv, res.n_bnft_equiv), (0, 1));
    assert!(l.rx.detect_dfbnft_with(&l.r, &[]).is_err());
}

#[test]
fn dfbnft_ties_go_to_the_lowest_index() {
    let l = link(4, -14.0, 1000.0, 13);
    let twin = [QPSK[1], QPSK[1], QPSK[0]];
    let res = l.rx.detect_dfbnft_with(&l.r, &twin).unwrap();
    for (d, dists) in res.decided.iter().zip(&res.candidate_distances) {
        assert_eq!(dists[0], dists[1]);
        assert_ne!(*d, 1);
    }
}

#[test]
fn dfbnft_winning_branch_is_far_ahead() {
    let l = link(32, -14.0, 1000.0, 14);
    let res = l.rx.detect_dfbnft(&l.r).unwrap();
    assert_eq!(res.decided, l.frame.indices);
    for (m, dists) in res.decided.iter().zip(&res.candidate_distances) {
        let win = dists[*m];
        let lose = dists.iter().enumerate().filter(|(i, _)| i != m).map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
        assert!(lose >= 4.0 * win, "winner {win}, best loser {lose}");
    }
}

#[test]
fn pure_noise_decisions_are_uniform() {
    let l = link(128, -20.0, 100.0, 15);
    let normal = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut counts = [0usize; 4];
    for _ in 0..8 {
        let samples = (0..l.rx.n_rx).map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect();
        let r = TimeSignal::new(samples, l.rx.dt, l.rx.t_first, Units::Normalized).unwrap();
        for m in l.rx.detect_fnft(&r).unwrap().decided {
            counts[m] += 1;
        }
    }
    let n: usize = counts.iter().sum();
    let e = n as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "counts {counts:?}, p = {p}");
}

#[test]
fn rejects_misframed_input() {
    let l = link(4, -14.0, 100.0, 17);
    let short = l.r.slice(0, l.r.len() - 1).unwrap();
    for d in DetectorKind::ALL {
        assert!(matches!(l.rx.detect(d, &short), Err(nfdm::Error::Framing(_))));
    }
}
