//! Property-based invariants over the PHY and compression layers.

use loracs::cs::{build_measurement, compress, select_ratio, RatioPolicy, PHI_CHUNK};
use loracs::params::{ChirpParams, Direction};
use loracs::phy::{fft_demodulate, make_chirp};
use loracs::recovery::{CompressedDecoder, OmpSolver};
use loracs::Complex;
use proptest::prelude::*;

fn sf_and_value() -> impl Strategy<Value = (u32, u32)> {
    (7u32..=10).prop_flat_map(|sf| (Just(sf), 0u32..(1u32 << sf)))
}

proptest! {
    #[test]
    fn chirp_samples_stay_on_the_unit_circle((sf, lam) in sf_and_value()) {
        let params = ChirpParams::new(sf).unwrap();
        let x = make_chirp(params, lam, Direction::Up).unwrap();
        for c in &x {
            prop_assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn modulate_demodulate_round_trips((sf, lam) in sf_and_value(), down in any::<bool>()) {
        let params = ChirpParams::new(sf).unwrap();
        let direction = if down { Direction::Down } else { Direction::Up };
        let x = make_chirp(params, lam, direction).unwrap();
        // fft_demodulate is the up-symbol demodulator; a down symbol is
        // its up twin's conjugate, so conjugation reduces one case to
        // the other.
        let block: Vec<Complex> = match direction {
            Direction::Up => x,
            Direction::Down => x.iter().map(|c| c.conj()).collect(),
        };
        let (bin, ratio) = fft_demodulate(&block, params).unwrap();
        prop_assert_eq!(bin, lam);
        prop_assert!(ratio > 0.99);
    }

    #[test]
    fn measurement_is_deterministic_and_linear(
        seed in any::<u64>(),
        m_exp in 0u32..=7,
        (sf, lam) in sf_and_value(),
    ) {
        let m = 1usize << m_exp;
        let phi_a = build_measurement(seed, m).unwrap();
        let phi_b = build_measurement(seed, m).unwrap();
        prop_assert_eq!(&phi_a.phi, &phi_b.phi);

        let params = ChirpParams::new(sf).unwrap();
        let x = make_chirp(params, lam, Direction::Up).unwrap();
        let y1 = compress(&x, &phi_a).unwrap();
        let scaled: Vec<Complex> = x.iter().map(|c| c * Complex::new(0.0, 2.0)).collect();
        let y2 = compress(&scaled, &phi_a).unwrap();
        prop_assert_eq!(y1.m_total(), (params.n() / PHI_CHUNK) * m);
        for (a, b) in y1.y.iter().zip(y2.y.iter()) {
            prop_assert!((a * Complex::new(0.0, 2.0) - b).norm() < 1e-9);
        }
    }

    #[test]
    fn selected_ratios_are_valid_measurement_shapes(
        sf in 7u32..=10,
        snr_db in -15.0f64..15.0,
        sync in any::<bool>(),
    ) {
        for policy in [RatioPolicy::formula(sync), RatioPolicy::table(sync)] {
            let (m_total, alpha) = select_ratio(sf, snr_db, policy).unwrap();
            let n = 1usize << sf;
            prop_assert!(m_total.is_power_of_two());
            prop_assert!((16..=n).contains(&m_total));
            prop_assert!((0.0..1.0).contains(&alpha));
            let chunks = n / PHI_CHUNK;
            prop_assert_eq!(m_total % chunks, 0);
            let m = m_total / chunks;
            prop_assert!(m.is_power_of_two() && m <= PHI_CHUNK);
            // α must be consistent with the measurement count.
            prop_assert!((alpha - (1.0 - m_total as f64 / n as f64)).abs() < 1e-12);
        }
    }
}

proptest! {
    // Decoder cases are costly (dictionary + Θ build per case), so run a
    // reduced case count on the smallest symbol size.
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn noiseless_compressed_decode_round_trips(lam in 0u32..128, seed in any::<u64>()) {
        let params = ChirpParams::new(7).unwrap();
        let dec = CompressedDecoder::new(params, 16, seed, Box::new(OmpSolver)).unwrap();
        let x = make_chirp(params, lam, Direction::Up).unwrap();
        let y = compress(&x, &dec.phi).unwrap();
        let (value, _, direction) = dec.demodulate(&y, 1e-9, 4).unwrap();
        prop_assert_eq!(value, lam);
        prop_assert_eq!(direction, Direction::Up);
    }

    #[test]
    fn compressed_decision_invariant_under_complex_gain(
        lam in 0u32..128,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        prop_assume!(re.abs() + im.abs() > 0.05);
        let params = ChirpParams::new(7).unwrap();
        let dec = CompressedDecoder::new(params, 16, 42, Box::new(OmpSolver)).unwrap();
        let x = make_chirp(params, lam, Direction::Up).unwrap();
        let y = compress(&x, &dec.phi).unwrap();
        let gain = Complex::new(re, im);
        let scaled = loracs::cs::CompressedVector {
            y: y.y.iter().map(|v| v * gain).collect(),
            sf: y.sf,
            chunk_m: y.chunk_m,
        };
        let (a, _, _) = dec.demodulate(&y, 0.0, 4).unwrap();
        let (b, _, _) = dec.demodulate(&scaled, 0.0, 4).unwrap();
        prop_assert_eq!(a, b);
    }
}
