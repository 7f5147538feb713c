//! Scenario execution: dispatch to the simulators and emit the CSV.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use jcsc_core::nd::run_nd_sweep;
use jcsc_core::phy::{run_ber_sweep, run_rmse_sweep, WaveformMode};
use jcsc_core::series::{PointFlag, TrialSeries};
use jcsc_core::{mac, RngHandle};

use crate::csv_io::{render_csv, write_atomic};
use crate::scenario::{ExperimentKind, Scenario, ScenarioError};

/// Stream tags separating the experiments under one scenario seed.
mod tag {
    pub const MODE: u64 = 0xc1_01;
}

/// Command-line overrides applied to a loaded scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Resolved run outcome.
pub struct RunOutcome {
    pub series: TrialSeries,
    pub csv: String,
    pub path: PathBuf,
    pub worst_flag: PointFlag,
}

/// Apply overrides, execute every sweep the scenario describes, and write
/// the CSV atomically.
pub fn run_scenario(
    mut scenario: Scenario,
    name: &str,
    overrides: &Overrides,
) -> Result<RunOutcome> {
    if let Some(seed) = overrides.seed {
        scenario.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        scenario.trials = trials;
    }
    let trials_pinned = overrides.trials.is_some();

    let series = execute(&scenario, trials_pinned)?;
    let csv = render_csv(&scenario, name, &series);
    let path = overrides.out.clone().unwrap_or_else(|| PathBuf::from(&scenario.output));
    write_atomic(Path::new(&path), &csv)?;
    let worst_flag = series.worst_flag();
    Ok(RunOutcome { series, csv, path, worst_flag })
}

/// Run the sweeps without touching the filesystem.
pub fn execute(scenario: &Scenario, trials_pinned: bool) -> Result<TrialSeries> {
    let rng = RngHandle::new(scenario.seed, 0);
    match scenario.experiment {
        ExperimentKind::Ber => {
            let section = scenario.ber.as_ref().context("missing [ber] section")?;
            let waveform = scenario.waveform.clone().unwrap_or_default();
            let mut series = TrialSeries::new("snr_db");
            for (mode_idx, mode) in
                [WaveformMode::PlainOfdm, WaveformMode::CdOfdm].into_iter().enumerate()
            {
                let config = waveform.config(mode, None);
                let snr = section.snr_list(mode).context("missing SNR list")?;
                let mut trials = scenario.trials;
                if !trials_pinned {
                    if let Some(min_bits) = section.min_bits_per_point {
                        trials = trials.max(min_bits.div_ceil(config.frame_bits() as u64));
                    }
                }
                let sweep =
                    run_ber_sweep(&config, snr, trials, rng.substream(tag::MODE, mode_idx as u64))?;
                series.extend(sweep);
            }
            series.sort_rows();
            Ok(series)
        }
        ExperimentKind::Rmse => {
            let section = scenario.rmse.as_ref().context("missing [rmse] section")?;
            let waveform = scenario.waveform.clone().unwrap_or_default();
            let sensing = section.sensing_scenario();
            let mut series = TrialSeries::new("snr_db");
            for (mode_idx, mode) in
                [WaveformMode::PlainOfdm, WaveformMode::CdOfdm].into_iter().enumerate()
            {
                let config =
                    waveform.config(mode, Some((section.spread_freq, section.spread_time)));
                let sweep = run_rmse_sweep(
                    &config,
                    &section.snr_db,
                    &sensing,
                    scenario.trials,
                    rng.substream(tag::MODE, mode_idx as u64),
                )?;
                series.extend(sweep);
            }
            series.sort_rows();
            Ok(series)
        }
        ExperimentKind::Nd => {
            let section = scenario.nd.as_ref().context("missing [nd] section")?;
            let config = section.config(scenario.trials);
            Ok(run_nd_sweep(&config, &section.neighbor_counts, rng)?)
        }
        ExperimentKind::Mac => {
            let section = scenario.mac.as_ref().context("missing [mac] section")?;
            let config = section
                .config(scenario.trials)
                .map_err(|e: ScenarioError| anyhow::anyhow!(e.to_string()))?;
            Ok(mac::run_mac_sweep(&config, rng)?)
        }
    }
}
