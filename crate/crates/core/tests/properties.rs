use nfdm::channel::{make_scales, ssfm_propagate, FiberParams};
use nfdm::harness::csv::fmt_g9;
use nfdm::harness::qfactor_from_ber;
use nfdm::nft::{fnft_forward, LambdaGrid};
use nfdm::signal::{rel_l2, TimeSignal, Units};
use nfdm::txrx::{qpsk_modulate, rate_efficiency, PulseShape};
use num_complex::Complex64;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn signal(re: &[f64], im: &[f64], dt: f64, t0: f64, units: Units) -> TimeSignal {
    let samples = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
    TimeSignal::new(samples, dt, t0, units).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn time_shift_only_rotates_b(
        re in prop::collection::vec(-1.0f64..1.0, 32),
        im in prop::collection::vec(-1.0f64..1.0, 32),
        tau in -3.0f64..3.0,
    ) {
        let dt = 0.1;
        let s0 = signal(&re, &im, dt, -1.6, Units::Normalized);
        let mut s1 = s0.clone();
        s1.t0 += tau;
        let grid = LambdaGrid::nyquist(64, dt).unwrap();
        let (c0, c1) = (fnft_forward(&s0, grid).unwrap(), fnft_forward(&s1, grid).unwrap());
        prop_assert!(c0.unimodularity_defect() < 1e-6);
        for (j, l) in grid.values().enumerate() {
            prop_assert!((c0.a[j] - c1.a[j]).norm() < 1e-10);
            prop_assert!((c0.b[j] * Complex64::from_polar(1.0, -2.0 * l * tau) - c1.b[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn unit_chain_round_trips(
        re in prop::collection::vec(-0.1f64..0.1, 16),
        im in prop::collection::vec(-0.1f64..0.1, 16),
        t0_ps in 5.0f64..200.0,
    ) {
        let scales = make_scales(&FiberParams::default(), t0_ps * 1e-12).unwrap();
        let x = signal(&re, &im, 1e-12, -3e-12, Units::Physical);
        let back = scales.to_physical(&scales.to_normalized(&x).unwrap()).unwrap();
        prop_assert!(rel_l2(&back.samples, &x.samples) <= 1e-12);
        prop_assert!((back.dt / x.dt - 1.0).abs() <= 1e-12);
        prop_assert!((back.t0 / x.t0 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn noiseless_propagation_conserves_energy(
        re in prop::collection::vec(-0.05f64..0.05, 64),
        im in prop::collection::vec(-0.05f64..0.05, 64),
    ) {
        let fiber = FiberParams { length_km: 50.0, ..Default::default() };
        let x = signal(&re, &im, 5e-12, 0.0, Units::Physical);
        let y = ssfm_propagate::<ChaCha8Rng>(&x, &fiber, 50, None).unwrap();
        prop_assert!((y.energy() / x.energy() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn qpsk_map_is_bijective_on_the_unit_circle(bits in prop::collection::vec(0u8..2, 0..64)) {
        let bits = if bits.len() % 2 == 1 { &bits[1..] } else { &bits[..] };
        let frame = qpsk_modulate(bits).unwrap();
        prop_assert_eq!(&frame.bits, &bits.to_vec());
        prop_assert!(frame.symbols.iter().all(|x| (x.norm() - 1.0).abs() <= 1e-15));
    }

    #[test]
    fn qfactor_is_monotone_and_round_trips(e in 1u64..1000, extra in 1u64..1000) {
        let bits = 2 * (e + extra);
        let ber = e as f64 / bits as f64;
        let q = qfactor_from_ber(ber);
        prop_assert!(q > qfactor_from_ber((e + 1) as f64 / bits as f64));
        let back = 0.5 * statrs::function::erf::erfc(10f64.powf(q / 20.0) / std::f64::consts::SQRT_2);
        prop_assert!((back / ber - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn rate_efficiency_is_the_information_share(nb in 1usize..2048, nz in 0usize..1024) {
        let eta = rate_efficiency(nb, nz);
        prop_assert_eq!(eta, nb as f64 / (nb + nz) as f64);
        prop_assert!(eta > 0.0 && eta <= 1.0);
    }

    #[test]
    fn nine_digit_floats_parse_back(x in -1e12f64..1e12) {
        let s = fmt_g9(x);
        let y: f64 = s.parse().unwrap();
        prop_assert!((y - x).abs() <= 5e-9 * x.abs());
    }

    #[test]
    fn pulse_keeps_its_energy_fraction(ts in 0.1f64..10.0) {
        let p = PulseShape::gaussian(ts, 0.99);
        prop_assert!((p.energy_within(ts / 2.0) - 0.99).abs() <= 1e-4);
    }
}
