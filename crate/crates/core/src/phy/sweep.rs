//! Monte-Carlo BER and range/velocity-RMSE sweeps.
//!
//! Trials are independent and fan out across workers; trial `i` of sweep
//! point `p` always draws from the same derived stream, so results are
//! reproducible regardless of scheduling, and aggregation walks trials in
//! index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{apply_comm_channel, apply_echo_channel, EchoInterference, PointTarget};
use super::radar::{despread_denoise, estimate_range_velocity};
use super::waveform::{demodulate_with_reference, modulate, WaveformConfig, WaveformMode};
use super::PhyError;
use crate::num::Scalar;
use crate::rng::RngHandle;
use crate::series::{mean_ci, PointFlag, TrialPoint, TrialSeries};

/// Stream-derivation tags for the PHY sweeps.
mod tag {
    pub const BER_POINT: u64 = 0x70_01;
    pub const RMSE_POINT: u64 = 0x70_02;
    pub const TRIAL: u64 = 0x70_10;
}

/// Sensing experiment description: the probed target plus optional
/// co-channel interference at the echo receiver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensingScenario<T> {
    pub target: PointTarget<T>,
    pub interference: Option<EchoInterference>,
}

/// BER versus per-resource-element SNR for the configured mode.
pub fn run_ber_sweep<T: Scalar>(
    config: &WaveformConfig<T>,
    snr_list: &[f64],
    trials: u64,
    rng: RngHandle,
) -> Result<TrialSeries, PhyError> {
    config.validate()?;
    if snr_list.is_empty() {
        return Err(PhyError::EmptySweep);
    }
    if trials == 0 {
        return Err(PhyError::InvalidScenario("trials must be at least 1".into()));
    }

    let mut series = TrialSeries::new("snr_db");
    for (point_idx, &snr_db) in snr_list.iter().enumerate() {
        let point_rng = rng.substream(tag::BER_POINT, point_idx as u64);
        let bers: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut r = point_rng.substream(tag::TRIAL, trial).rng();
                let bits = super::waveform::random_payload(config, &mut r);
                let frame = modulate(&bits, config).expect("validated config");
                let rx = apply_comm_channel(&frame.freq_symbols, snr_db, &mut r);
                let (_, ber) =
                    demodulate_with_reference(&rx, &frame, config).expect("validated config");
                ber
            })
            .collect();
        let (mean, ci_half_width) = mean_ci(&bers);
        series.points.push(TrialPoint {
            axis: snr_db,
            variant: config.mode.as_str().to_string(),
            metric: "ber".to_string(),
            mean,
            ci_half_width,
            trials,
            truncated_fraction: None,
            flag: PointFlag::Ok,
        });
    }
    series.sort_rows();
    Ok(series)
}

/// Range and velocity RMSE versus echo SNR for the configured mode.
///
/// In cd mode the quotient grid is despread-denoised before estimation; that
/// step needs the whole cyclic-prefix delay window to stay inside the
/// tile-level unambiguous span, checked here.
pub fn run_rmse_sweep<T: Scalar>(
    config: &WaveformConfig<T>,
    snr_list: &[f64],
    scenario: &SensingScenario<T>,
    trials: u64,
    rng: RngHandle,
) -> Result<TrialSeries, PhyError> {
    config.validate()?;
    if snr_list.is_empty() {
        return Err(PhyError::EmptySweep);
    }
    if trials == 0 {
        return Err(PhyError::InvalidScenario("trials must be at least 1".into()));
    }
    scenario.target.validate(config)?;
    if config.mode == WaveformMode::CdOfdm {
        let delay_span = config.num_subcarriers / config.spread_freq;
        if config.cp_samples >= delay_span {
            return Err(PhyError::InvalidScenario(format!(
                "despread sensing needs cp_samples < num_subcarriers / spread_freq \
                 ({} >= {delay_span}); use a shorter frequency spreading for sensing",
                config.cp_samples
            )));
        }
        let doppler_span = config.num_symbols as f64 / (2.0 * config.spread_time as f64);
        let doppler_bin =
            (scenario.target.velocity_mps / config.velocity_bin_mps()).widen().abs();
        if doppler_bin >= doppler_span {
            return Err(PhyError::InvalidScenario(format!(
                "target Doppler bin {doppler_bin:.2} outside the despread window \
                 +/-{doppler_span:.2}; use a shorter time spreading for sensing"
            )));
        }
    }

    let truth_range = scenario.target.range_m.widen();
    let truth_velocity = scenario.target.velocity_mps.widen();

    let mut series = TrialSeries::new("snr_db");
    for (point_idx, &snr_db) in snr_list.iter().enumerate() {
        let point_rng = rng.substream(tag::RMSE_POINT, point_idx as u64);
        let errors: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut r = point_rng.substream(tag::TRIAL, trial).rng();
                let bits = super::waveform::random_payload(config, &mut r);
                let frame = modulate(&bits, config).expect("validated config");
                let rx = apply_echo_channel(
                    &frame.freq_symbols,
                    &[scenario.target],
                    snr_db,
                    scenario.interference.as_ref(),
                    config,
                    &mut r,
                )
                .expect("validated scenario");
                let observed = if config.mode == WaveformMode::CdOfdm {
                    despread_denoise(&rx, &frame.freq_symbols, config)
                } else {
                    rx
                };
                let est = estimate_range_velocity(&observed, &frame.freq_symbols, config)
                    .expect("validated config");
                let range_err = est.range_m.widen() - truth_range;
                let velocity_err = est.velocity_mps.widen() - truth_velocity;
                (range_err * range_err, velocity_err * velocity_err)
            })
            .collect();

        for (metric, sq_errors) in [
            ("range_rmse_m", errors.iter().map(|e| e.0).collect::<Vec<_>>()),
            ("velocity_rmse_mps", errors.iter().map(|e| e.1).collect::<Vec<_>>()),
        ] {
            let (mse, mse_hw) = mean_ci(&sq_errors);
            let rmse = mse.sqrt();
            // Delta method: hw(sqrt(x)) ~ hw(x) / (2 sqrt(x)).
            let ci_half_width = mse_hw.map(|hw| if rmse > 0.0 { hw / (2.0 * rmse) } else { 0.0 });
            series.points.push(TrialPoint {
                axis: snr_db,
                variant: config.mode.as_str().to_string(),
                metric: metric.to_string(),
                mean: rmse,
                ci_half_width,
                trials,
                truncated_fraction: None,
                flag: PointFlag::Ok,
            });
        }
    }
    series.sort_rows();
    Ok(series)
}
