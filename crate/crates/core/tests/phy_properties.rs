//! Property tests over random numerologies: transform round trips,
//! spreading algebra, echo-channel structure.

use jcsc_core::phy::{
    apply_echo_channel, despread_tiles, freq_grid_from_time, modulate, random_payload,
    PointTarget, WaveformConfig, WaveformMode, SPEED_OF_LIGHT,
};
use jcsc_core::RngHandle;
use num_complex::Complex;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct ConfigCase {
    config: WaveformConfig<f64>,
    seed: u64,
}

fn config_strategy() -> impl Strategy<Value = ConfigCase> {
    let pow2 = prop_oneof![Just(32usize), Just(64), Just(128), Just(256)];
    let symbols = prop_oneof![Just(4usize), Just(8), Just(16)];
    let spread_f = prop_oneof![Just(1usize), Just(2), Just(4), Just(8)];
    let spread_t = prop_oneof![Just(1usize), Just(2), Just(4)];
    (pow2, symbols, spread_f, spread_t, any::<bool>(), 0u64..1 << 48, 0usize..64).prop_map(
        |(n, m, lf, lt, cd, seed, cp_frac)| {
            let mode = if cd { WaveformMode::CdOfdm } else { WaveformMode::PlainOfdm };
            let (spread_freq, spread_time) = match mode {
                WaveformMode::PlainOfdm => (1, 1),
                WaveformMode::CdOfdm => (lf.min(n), lt.min(m)),
            };
            ConfigCase {
                config: WaveformConfig {
                    carrier_hz: 24.0e9,
                    bandwidth_hz: 122.88e6,
                    num_subcarriers: n,
                    cp_samples: cp_frac % (n / 4),
                    num_symbols: m,
                    mode,
                    spread_freq,
                    spread_time,
                },
                seed,
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// modulate -> time samples -> re-transform recovers the grid to within
    /// 1e-9 relative error, and symbol-body energy matches grid energy.
    #[test]
    fn transform_round_trip_and_parseval(case in config_strategy()) {
        let config = case.config;
        let mut rng = RngHandle::new(case.seed, 0).rng();
        let bits = random_payload(&config, &mut rng);
        let frame = modulate(&bits, &config).unwrap();
        let time = frame.time_samples(&config);
        let back = freq_grid_from_time(&time, &config).unwrap();

        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in back.as_slice().iter().zip(frame.freq_symbols.as_slice()) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        prop_assert!((num / den).sqrt() < 1e-9);

        let per_symbol = config.num_subcarriers + config.cp_samples;
        let mut body = 0.0;
        for m in 0..config.num_symbols {
            for c in &time[m * per_symbol + config.cp_samples..(m + 1) * per_symbol] {
                body += c.norm_sqr();
            }
        }
        let freq = frame.freq_symbols.energy();
        prop_assert!(((body - freq) / freq).abs() < 1e-9);
    }

    /// Despreading inverts spreading: the tile symbols come back to within
    /// accumulation rounding and the bits exactly.
    #[test]
    fn despread_inverts_spread(case in config_strategy()) {
        let config = case.config;
        let mut rng = RngHandle::new(case.seed, 1).rng();
        let bits = random_payload(&config, &mut rng);
        let frame = modulate(&bits, &config).unwrap();
        let symbols = despread_tiles(&frame.freq_symbols, &config);
        prop_assert_eq!(symbols.len() * 2, bits.len());
        for (i, s) in symbols.iter().enumerate() {
            let expected_re = if bits[2 * i] { -1.0 } else { 1.0 } * std::f64::consts::FRAC_1_SQRT_2;
            let expected_im = if bits[2 * i + 1] { -1.0 } else { 1.0 } * std::f64::consts::FRAC_1_SQRT_2;
            prop_assert!((s.re - expected_re).abs() < 1e-12);
            prop_assert!((s.im - expected_im).abs() < 1e-12);
        }
    }

    /// Echo linearity and the analytic subcarrier phase slope hold for
    /// random configs and targets.
    #[test]
    fn echo_linearity_and_phase_slope(
        case in config_strategy(),
        range_frac in 0.05f64..0.95,
        range_frac_2 in 0.05f64..0.95,
        velocity in -40.0f64..40.0,
        amp_re in 0.2f64..1.0,
        amp_im in -0.5f64..0.5,
    ) {
        let config = case.config;
        prop_assume!(config.cp_samples >= 2);
        let mut rng = RngHandle::new(case.seed, 2).rng();
        let bits = random_payload(&config, &mut rng);
        let tx = modulate(&bits, &config).unwrap().freq_symbols;

        let t1 = PointTarget::new(
            range_frac * config.unambiguous_range_m(),
            velocity,
            Complex::new(amp_re, amp_im),
        );
        let t2 = PointTarget::new(
            range_frac_2 * config.unambiguous_range_m(),
            -velocity * 0.5,
            Complex::new(amp_im.abs() + 0.1, amp_re * 0.3),
        );

        let run = |targets: &[PointTarget<f64>]| {
            apply_echo_channel(&tx, targets, f64::INFINITY, None, &config, &mut RngHandle::new(1, 0).rng())
                .unwrap()
        };
        let both = run(&[t1, t2]);
        let a = run(&[t1]);
        let b = run(&[t2]);
        for ((s, x), y) in both.as_slice().iter().zip(a.as_slice()).zip(b.as_slice()) {
            prop_assert!((s - (x + y)).norm() < 1e-9);
        }

        // Phase slope of the single-target quotient across subcarriers is
        // -2 pi df tau regardless of Doppler (it cancels within a symbol).
        let tau = 2.0 * t1.range_m / SPEED_OF_LIGHT;
        let expected = -std::f64::consts::TAU * config.subcarrier_spacing_hz() * tau;
        let expected = (expected.sin(), expected.cos());
        for m in 0..config.num_symbols {
            for n in 0..config.num_subcarriers - 1 {
                let g0 = a.get(m, n) / tx.get(m, n);
                let g1 = a.get(m, n + 1) / tx.get(m, n + 1);
                let rot = g1 * g0.conj();
                let slope = rot.im.atan2(rot.re);
                let expected_angle = expected.0.atan2(expected.1);
                prop_assert!(
                    (slope - expected_angle).abs() < 1e-9,
                    "slope {} vs {}", slope, expected_angle
                );
            }
        }
    }
}
