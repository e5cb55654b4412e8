//! Fast oracle and invariant checks runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{ase_total_psd, ssfm_propagate, FiberParams};
use crate::detectors::{DetectorKind, Receiver};
use crate::nft::{bnft_inverse, continuous_spectrum, fnft_extend, fnft_forward, LambdaGrid, ScatteringState};
use crate::oracles::{dispersed_gaussian, linearized_reflection, zs_ode_coefficients};
use crate::signal::{rel_linf, TimeSignal, Units};
use crate::txrx::{rate_efficiency, SymbolFrame, System, SystemConfig};

use super::metrics::qfactor_from_ber;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

type Check = fn() -> CheckResult;

pub const CHECKS: [(&str, Check); 10] = [
    ("rect-pulse-ode", rect_pulse),
    ("linear-limit", linear_limit),
    ("prefix-extension", prefix_extension),
    ("round-trip", round_trip),
    ("dispersion-analytic", dispersion),
    ("ase-calibration", ase_calibration),
    ("q-factor", q_factor),
    ("rate-efficiency", rate_eff),
    ("operation-counters", counters),
    ("noiseless-loopback", loopback),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS.iter().map(|(_, f)| f()).collect()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn gaussian(n: usize, dt: f64, amp: f64) -> TimeSignal {
    let t0 = -(n as f64) * dt / 2.0;
    TimeSignal::from_fn(n, dt, t0, Units::Normalized, |t| c(amp * (-t * t / 2.0).exp()) * Complex64::new(0.0, 0.3 * t).exp())
        .expect("valid signal")
}

fn rect_pulse() -> CheckResult {
    let (amp, len, n) = (0.8, 2.0, 40);
    let dt = len / n as f64;
    let s = TimeSignal::from_fn(n, dt, dt / 2.0, Units::Normalized, |_| c(amp)).expect("valid signal");
    let grid = LambdaGrid::new(-3.0, 0.25, 25).expect("valid grid");
    let co = fnft_forward(&s, grid).expect("in range");
    let err = grid
        .values()
        .enumerate()
        .map(|(j, l)| {
            let (a, b) = zs_ode_coefficients(|_| c(amp), 0.0, len, l, 4000);
            (co.a[j] - a).norm().max((co.b[j] - b).norm())
        })
        .fold(0.0, f64::max);
    let defect = co.unimodularity_defect();
    CheckResult::new(
        "rect-pulse-ode",
        err < 1e-6 && defect < 1e-6,
        format!("max |(a, b) - ODE| = {err:.2e}, unimodularity defect {defect:.2e}"),
    )
}

fn linear_limit() -> CheckResult {
    let (n, dt) = (256, 0.05);
    let grid = LambdaGrid::nyquist(n, dt).expect("valid grid");
    let errs: Vec<f64> = [1e-3, 2e-3]
        .iter()
        .map(|&eps| {
            let s = gaussian(n, dt, eps);
            let rho = continuous_spectrum(&fnft_forward(&s, grid).expect("in range")).expect("regular");
            rel_linf(&rho.rho, &linearized_reflection(&s, &grid))
        })
        .collect();
    let ratio = errs[1] / errs[0];
    CheckResult::new(
        "linear-limit",
        errs[0] < 1e-2 && (ratio - 4.0).abs() < 0.2,
        format!("relative error {:.2e}, ratio on doubling {ratio:.3}", errs[0]),
    )
}

fn prefix_extension() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, dt) = (96, 0.1);
    let grid = LambdaGrid::nyquist(n, dt).expect("valid grid");
    let mut identical = true;
    for _ in 0..5 {
        let samples =
            (0..n).map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
        let s = TimeSignal::new(samples, dt, -4.8, Units::Normalized).expect("valid signal");
        let cut = rng.random_range(1..n);
        let st = ScatteringState::new(grid, dt, s.t0).expect("valid state");
        let st = fnft_extend(st, &s.slice(0, cut).expect("in range")).expect("contiguous");
        let st = fnft_extend(st, &s.slice(cut, n).expect("in range")).expect("contiguous");
        identical &= st.coefficients() == fnft_forward(&s, grid).expect("in range");
    }
    CheckResult::new("prefix-extension", identical, "split extension vs batch transform, 5 random signals".into())
}

fn round_trip() -> CheckResult {
    // Unit-energy Gaussian of width 0.5: its L1 norm stays below pi/2, so
    // the spectrum has no discrete part.
    let (n, dt, w) = (512, 0.025, 0.5);
    let amp = (w * std::f64::consts::PI.sqrt()).powf(-0.5);
    let q = TimeSignal::from_fn(n, dt, -(n as f64) * dt / 2.0, Units::Normalized, |t| c(amp * (-t * t / (2.0 * w * w)).exp()))
        .expect("valid signal");
    let grid = LambdaGrid::nyquist(2 * n, dt).expect("valid grid");
    let rho = continuous_spectrum(&fnft_forward(&q, grid).expect("in range")).expect("regular");
    let back = bnft_inverse(&rho, q.t0, dt, n).expect("well conditioned");
    let err = rel_linf(&back.samples, &q.samples);
    CheckResult::new("round-trip", err <= 1e-3, format!("energy {:.3}, relative Linf {err:.2e}", rho.energy()))
}

fn dispersion() -> CheckResult {
    let fiber = FiberParams { gamma_per_w_km: 1e-300, length_km: 100.0, ..Default::default() };
    let w = 30e-12;
    let (n, dt) = (2048, 0.5e-12);
    let t0 = -(n as f64) * dt / 2.0;
    let s = TimeSignal::from_fn(n, dt, t0, Units::Physical, |t| dispersed_gaussian(t, w, 1.0, 0.0)).expect("valid");
    let out = ssfm_propagate::<ChaCha8Rng>(&s, &fiber, 4, None).expect("valid step");
    let z = fiber.beta2().abs() * fiber.length_m();
    let want: Vec<Complex64> = (0..n).map(|k| dispersed_gaussian(s.time(k), w, 1.0, z)).collect();
    let err = out.samples.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    CheckResult::new("dispersion-analytic", err <= 1e-6, format!("max deviation {err:.2e}"))
}

fn ase_calibration() -> CheckResult {
    let fiber = FiberParams { length_km: 1000.0, ..Default::default() };
    let (n, dt) = (1024, 6.25e-12);
    let zero = TimeSignal::zeros(n, dt, 0.0, Units::Physical).expect("valid");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reps = 100;
    let mut power = 0.0;
    for _ in 0..reps {
        let out = ssfm_propagate(&zero, &fiber, 10, Some(&mut rng)).expect("valid step");
        power += out.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    }
    power /= reps as f64;
    let want = ase_total_psd(&fiber) / dt;
    let rel = (power / want - 1.0).abs();
    CheckResult::new("ase-calibration", rel <= 0.02, format!("mean power / PSD*bandwidth - 1 = {rel:.2e}"))
}

fn q_factor() -> CheckResult {
    let q = qfactor_from_ber(0.1587);
    CheckResult::new("q-factor", q.abs() <= 0.01, format!("Q^2(0.1587) = {q:.5} dB"))
}

fn rate_eff() -> CheckResult {
    let got: Vec<String> =
        [128, 256, 512].iter().map(|&n| format!("{:.0}", 100.0 * rate_efficiency(n, 160))).collect();
    CheckResult::new("rate-efficiency", got == ["44", "62", "76"], format!("{}%", got.join("% / ")))
}

fn small_system(power_dbm: f64) -> System {
    let cfg = SystemConfig { n_info: 4, n_guard: 16, power_dbm, ..Default::default() };
    System::new(cfg, FiberParams { length_km: 100.0, ..Default::default() }).expect("valid system")
}

fn back_to_back(sys: &System, indices: &[usize]) -> (Receiver, TimeSignal) {
    let frame = SymbolFrame::from_indices(indices.to_vec()).expect("valid frame");
    let tx = sys.tx_build_burst(&frame).expect("burst");
    let r = sys.rx_frontend(&ssfm_propagate::<ChaCha8Rng>(&tx.launched, &sys.fiber, 100, None).expect("step"))
        .expect("framing");
    (Receiver::new(sys, tx.gain).expect("receiver"), r)
}

fn counters() -> CheckResult {
    let sys = small_system(-20.0);
    let (rx, r) = back_to_back(&sys, &[0, 1, 2, 3]);
    let got: Vec<(usize, usize)> = DetectorKind::ALL
        .iter()
        .map(|d| rx.detect(*d, &r).map(|x| (x.n_fnft_equiv, x.n_bnft_equiv)).unwrap_or((usize::MAX, usize::MAX)))
        .collect();
    CheckResult::new("operation-counters", got == [(1, 0), (1, 0), (2, 1), (0, 4)], format!("{got:?}"))
}

fn loopback() -> CheckResult {
    let sys = small_system(-20.0);
    let sent = [3, 1, 0, 2];
    let (rx, r) = back_to_back(&sys, &sent);
    let errors: Vec<usize> = DetectorKind::ALL
        .iter()
        .map(|d| rx.detect(*d, &r).map(|x| x.decided.iter().zip(&sent).filter(|(a, b)| a != b).count()).unwrap_or(usize::MAX))
        .collect();
    CheckResult::new("noiseless-loopback", errors.iter().all(|&e| e == 0), format!("symbol errors per detector {errors:?}"))
}
