//! Monte-Carlo checks of the PHY against closed-form oracles.

mod common;

use common::{crossing, q_function, qpsk_ber_at_per_re_snr};
use jcsc_core::phy::{run_ber_sweep, WaveformConfig, WaveformMode};
use jcsc_core::RngHandle;

fn plain(num_subcarriers: usize, num_symbols: usize) -> WaveformConfig<f64> {
    WaveformConfig {
        carrier_hz: 24.0e9,
        bandwidth_hz: 122.88e6,
        num_subcarriers,
        cp_samples: num_subcarriers / 16,
        num_symbols,
        mode: WaveformMode::PlainOfdm,
        spread_freq: 1,
        spread_time: 1,
    }
}

/// Plain QPSK over AWGN must match Q(sqrt(2 Eb/N0)) within binomial
/// confidence at Eb/N0 of 4, 8 and 10 dB. Per resource element Es = 2 Eb,
/// so the per-RE SNR axis sits 10log10(2) above Eb/N0.
#[test]
fn qpsk_awgn_ber_matches_q_function() {
    let config = plain(2048, 16);
    let frame_bits = config.frame_bits() as u64;
    for (ebn0_db, min_bits) in [(4.0, 2_000_000u64), (8.0, 3_000_000), (10.0, 6_000_000)] {
        let snr_db = ebn0_db + 10.0 * 2.0f64.log10();
        let trials = min_bits.div_ceil(frame_bits);
        let series =
            run_ber_sweep(&config, &[snr_db], trials, RngHandle::new(90, ebn0_db as u64)).unwrap();
        let measured = series.points[0].mean;
        let theory = q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt());
        let n_bits = (trials * frame_bits) as f64;
        let sigma = (theory * (1.0 - theory) / n_bits).sqrt();
        assert!(
            (measured - theory).abs() <= 3.0 * sigma,
            "Eb/N0 {ebn0_db} dB: measured {measured:.3e}, theory {theory:.3e}, 3sigma {:.3e}",
            3.0 * sigma
        );
    }
}

/// The demodulate example point: Eb/N0 = 10 dB lands within x3 of 3.9e-6.
#[test]
fn qpsk_ber_at_10db_near_closed_form_value() {
    let config = plain(2048, 16);
    let trials = 6_000_000u64.div_ceil(config.frame_bits() as u64);
    let snr_db = 10.0 + 10.0 * 2.0f64.log10();
    let series = run_ber_sweep(&config, &[snr_db], trials, RngHandle::new(91, 0)).unwrap();
    let measured = series.points[0].mean;
    let theory = 3.87e-6;
    assert!(
        measured > theory / 3.0 && measured < theory * 3.0,
        "measured {measured:.3e} not within x3 of {theory:.3e}"
    );
}

/// Spreading by L chips buys 10log10(L) dB on the per-RE SNR axis: the cd
/// curve crossed at a fixed BER sits that far left of the plain curve.
#[test]
fn cdm_processing_gain_follows_10log10_l() {
    let plain_cfg = plain(256, 16);
    let cd_cfg = WaveformConfig {
        mode: WaveformMode::CdOfdm,
        spread_freq: 4,
        spread_time: 4,
        ..plain_cfg
    };
    let gain_db = 10.0 * 16f64.log10(); // 12.04 dB

    let plain_snrs = [6.0, 7.0, 8.0, 9.0];
    let cd_snrs: Vec<f64> = plain_snrs.iter().map(|s| s - gain_db).collect();

    let plain_trials = 400_000u64.div_ceil(plain_cfg.frame_bits() as u64);
    let cd_trials = 400_000u64.div_ceil(cd_cfg.frame_bits() as u64);

    let sp = run_ber_sweep(&plain_cfg, &plain_snrs, plain_trials, RngHandle::new(92, 0)).unwrap();
    let sc = run_ber_sweep(&cd_cfg, &cd_snrs, cd_trials, RngHandle::new(92, 1)).unwrap();

    let curve = |s: &jcsc_core::series::TrialSeries| -> Vec<(f64, f64)> {
        s.points.iter().map(|p| (p.axis, p.mean)).collect()
    };
    let level = 1e-2;
    let plain_cross = crossing(&curve(&sp), level).expect("plain curve brackets 1e-2");
    let cd_cross = crossing(&curve(&sc), level).expect("cd curve brackets 1e-2");
    let measured = plain_cross - cd_cross;
    assert!(
        (measured - gain_db).abs() < 0.5,
        "measured shift {measured:.2} dB, predicted {gain_db:.2} dB"
    );
}

/// Every swept plain-mode point stays within Monte-Carlo confidence of the
/// closed form.
#[test]
fn plain_ber_curve_tracks_theory_at_every_point() {
    let config = plain(1024, 8);
    let frame_bits = config.frame_bits() as u64;
    let trials = 600_000u64.div_ceil(frame_bits);
    let snrs = [2.0, 5.0, 8.0, 11.0];
    let series = run_ber_sweep(&config, &snrs, trials, RngHandle::new(93, 0)).unwrap();
    for p in &series.points {
        let theory = qpsk_ber_at_per_re_snr(10f64.powf(p.axis / 10.0));
        let n_bits = (trials * frame_bits) as f64;
        let sigma = (theory * (1.0 - theory) / n_bits).sqrt();
        assert!(
            (p.mean - theory).abs() <= 3.5 * sigma + 1e-9,
            "snr {} dB: measured {:.3e}, theory {theory:.3e}",
            p.axis,
            p.mean
        );
    }
}
