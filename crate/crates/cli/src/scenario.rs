//! Scenario files: strict TOML with every knob of the four experiments.
//!
//! Unknown keys are rejected so a typo in a sweep definition fails loudly,
//! and the fully resolved scenario (defaults filled in) serializes back to
//! TOML for the CSV audit header.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use jcsc_core::mac::{ArrivalModel, MacConfig, VariantSelection};
use jcsc_core::nd::{NdConfig, NdPlacement, RlParams};
use jcsc_core::phy::{EchoInterference, PointTarget, SensingScenario, WaveformConfig, WaveformMode};
use jcsc_core::Real;

/// Scenario problems, split by how the CLI should exit.
#[derive(Debug)]
pub enum ScenarioError {
    /// Unreadable file, TOML syntax, unknown key: exit code 1.
    Parse(String),
    /// A validated invariant does not hold: exit code 2.
    Invariant(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(msg) => write!(f, "scenario parse error: {msg}"),
            ScenarioError::Invariant(msg) => write!(f, "scenario invariant violation: {msg}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Ber,
    Rmse,
    Nd,
    Mac,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Ber => "ber",
            ExperimentKind::Rmse => "rmse",
            ExperimentKind::Nd => "nd",
            ExperimentKind::Mac => "mac",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Per-point trial count. For BER points `min_bits_per_point` may raise
    /// it per mode unless the trial count was overridden on the command
    /// line.
    pub trials: u64,
    /// Default output path; `--out` overrides without entering the audit
    /// header.
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ber: Option<BerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse: Option<RmseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nd: Option<NdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac: Option<MacSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_subcarriers")]
    pub num_subcarriers: usize,
    #[serde(default = "default_cp")]
    pub cp_samples: usize,
    #[serde(default = "default_symbols")]
    pub num_symbols: usize,
    /// Spreading of the cd_ofdm communication mode.
    #[serde(default = "default_spread_freq")]
    pub spread_freq: usize,
    #[serde(default = "default_spread_time")]
    pub spread_time: usize,
}

fn default_carrier() -> f64 {
    24.0e9
}
fn default_bandwidth() -> f64 {
    122.88e6
}
fn default_subcarriers() -> usize {
    2048
}
fn default_cp() -> usize {
    144
}
fn default_symbols() -> usize {
    16
}
fn default_spread_freq() -> usize {
    64
}
fn default_spread_time() -> usize {
    16
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self {
            carrier_hz: default_carrier(),
            bandwidth_hz: default_bandwidth(),
            num_subcarriers: default_subcarriers(),
            cp_samples: default_cp(),
            num_symbols: default_symbols(),
            spread_freq: default_spread_freq(),
            spread_time: default_spread_time(),
        }
    }
}

impl WaveformSection {
    /// Concrete waveform config for a mode; `spread` overrides the section's
    /// spreading (the sensing experiment uses shorter codes than the
    /// communication one).
    pub fn config(&self, mode: WaveformMode, spread: Option<(usize, usize)>) -> WaveformConfig<Real> {
        let (spread_freq, spread_time) = match mode {
            WaveformMode::PlainOfdm => (1, 1),
            WaveformMode::CdOfdm => spread.unwrap_or((self.spread_freq, self.spread_time)),
        };
        WaveformConfig {
            carrier_hz: self.carrier_hz,
            bandwidth_hz: self.bandwidth_hz,
            num_subcarriers: self.num_subcarriers,
            cp_samples: self.cp_samples,
            num_symbols: self.num_symbols,
            mode,
            spread_freq,
            spread_time,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSection {
    /// SNR points shared by both modes unless per-mode lists are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_plain: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_cd: Option<Vec<f64>>,
    /// Raise per-mode trials until each point carries at least this many
    /// bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_bits_per_point: Option<u64>,
}

impl BerSection {
    pub fn snr_list(&self, mode: WaveformMode) -> Option<&[f64]> {
        let specific = match mode {
            WaveformMode::PlainOfdm => self.snr_db_plain.as_deref(),
            WaveformMode::CdOfdm => self.snr_db_cd.as_deref(),
        };
        specific.or(self.snr_db.as_deref())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmseSection {
    pub snr_db: Vec<f64>,
    pub target_range_m: f64,
    #[serde(default)]
    pub target_velocity_mps: f64,
    #[serde(default = "default_reflect_re")]
    pub target_reflect_re: f64,
    #[serde(default)]
    pub target_reflect_im: f64,
    /// Sensing-mode spreading; short codes keep the despread delay window
    /// wider than the cyclic prefix.
    #[serde(default = "default_sense_spread")]
    pub spread_freq: usize,
    #[serde(default = "default_sense_spread")]
    pub spread_time: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference: Option<InterferenceSection>,
}

fn default_reflect_re() -> f64 {
    1.0
}
fn default_sense_spread() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSection {
    pub num_interferers: usize,
    pub interference_to_noise_db: f64,
}

impl RmseSection {
    pub fn sensing_scenario(&self) -> SensingScenario<Real> {
        SensingScenario {
            target: PointTarget {
                range_m: self.target_range_m,
                velocity_mps: self.target_velocity_mps,
                reflect_re: self.target_reflect_re,
                reflect_im: self.target_reflect_im,
            },
            interference: self.interference.map(|i| EchoInterference {
                num_interferers: i.num_interferers,
                interference_to_noise_db: i.interference_to_noise_db,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdSection {
    pub neighbor_counts: Vec<usize>,
    #[serde(default = "default_sectors")]
    pub sector_count: u32,
    #[serde(default = "default_comm_range_nd")]
    pub comm_range_m: f64,
    #[serde(default = "default_sense_ratio")]
    pub sense_to_comm_ratio: f64,
    #[serde(default = "default_tx_probability")]
    pub tx_probability: f64,
    #[serde(default = "default_placement")]
    pub placement: NdPlacement,
    #[serde(default = "default_prior_boost")]
    pub prior_boost: f64,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_exploration_floor")]
    pub exploration_floor: f64,
    #[serde(default = "default_slot_cap")]
    pub slot_cap: u64,
}

fn default_sectors() -> u32 {
    36
}
fn default_comm_range_nd() -> f64 {
    50.0
}
fn default_sense_ratio() -> f64 {
    0.5
}
fn default_tx_probability() -> f64 {
    0.5
}
fn default_placement() -> NdPlacement {
    NdPlacement::SenseDisk
}
fn default_prior_boost() -> f64 {
    0.7
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_exploration_floor() -> f64 {
    0.005
}
fn default_slot_cap() -> u64 {
    1_000_000
}

impl NdSection {
    pub fn config(&self, trials: u64) -> NdConfig {
        NdConfig {
            neighbor_count: *self.neighbor_counts.first().unwrap_or(&0),
            sector_count: self.sector_count,
            comm_range_m: self.comm_range_m,
            sense_to_comm_ratio: self.sense_to_comm_ratio,
            tx_probability: self.tx_probability,
            placement: self.placement,
            rl: RlParams {
                prior_boost: self.prior_boost,
                learning_rate: self.learning_rate,
                exploration_floor: self.exploration_floor,
            },
            slot_cap: self.slot_cap,
            trials,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacSection {
    pub frame_slots: Vec<usize>,
    #[serde(default = "default_node_count")]
    pub node_count: usize,
    #[serde(default = "default_side")]
    pub side_m: f64,
    #[serde(default = "default_comm_range_mac")]
    pub comm_range_m: f64,
    #[serde(default = "default_cs_range")]
    pub carrier_sense_range_m: f64,
    /// Offered channel-time fraction; mutually exclusive with
    /// `arrival_prob`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_prob: Option<f64>,
    #[serde(default = "default_backoff_min")]
    pub backoff_min: u64,
    #[serde(default = "default_backoff_max_frames")]
    pub backoff_max_frames: u64,
    #[serde(default = "default_variant")]
    pub variant: VariantSelection,
    #[serde(default = "default_detection_fraction")]
    pub hidden_detection_fraction: f64,
    #[serde(default = "default_min_completed")]
    pub min_completed_frames: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_slots: Option<u64>,
}

fn default_node_count() -> usize {
    10
}
fn default_side() -> f64 {
    140.0
}
fn default_comm_range_mac() -> f64 {
    70.0
}
fn default_cs_range() -> f64 {
    45.0
}
fn default_backoff_min() -> u64 {
    1
}
fn default_backoff_max_frames() -> u64 {
    8
}
fn default_variant() -> VariantSelection {
    VariantSelection::Both
}
fn default_detection_fraction() -> f64 {
    1.0
}
fn default_min_completed() -> u64 {
    1000
}

impl MacSection {
    pub fn config(&self, trials: u64) -> Result<MacConfig, ScenarioError> {
        let arrival = match (self.load_factor, self.arrival_prob) {
            (Some(_), Some(_)) => {
                return Err(ScenarioError::Invariant(
                    "load_factor and arrival_prob are mutually exclusive".into(),
                ))
            }
            (None, Some(p)) => ArrivalModel::PerSlotProbability(p),
            (Some(l), None) => ArrivalModel::LoadFactor(l),
            (None, None) => ArrivalModel::LoadFactor(0.35),
        };
        Ok(MacConfig {
            node_count: self.node_count,
            side_m: self.side_m,
            comm_range_m: self.comm_range_m,
            carrier_sense_range_m: self.carrier_sense_range_m,
            frame_slots: self.frame_slots.clone(),
            arrival,
            backoff_min: self.backoff_min,
            backoff_max_frames: self.backoff_max_frames,
            variant: self.variant,
            hidden_detection_fraction: self.hidden_detection_fraction,
            min_completed_frames: self.min_completed_frames,
            horizon_slots: self.horizon_slots,
            trials,
        })
    }
}

/// Bundled reference scenarios, addressable by name in `run` and listed by
/// `list-scenarios`.
pub const BUNDLED: &[(&str, &str, &str)] = &[
    (
        "fig4_ber",
        include_str!("../scenarios/fig4_ber.toml"),
        "BER vs per-RE SNR, plain OFDM vs CD-OFDM (L = 1024)",
    ),
    (
        "fig4_rmse",
        include_str!("../scenarios/fig4_rmse.toml"),
        "range/velocity RMSE vs echo SNR, plain OFDM vs CD-OFDM sensing",
    ),
    (
        "fig5_nd",
        include_str!("../scenarios/fig5_nd.toml"),
        "neighbor-discovery slots vs neighbor count, CRA vs RL-CRA",
    ),
    (
        "fig6_mac",
        include_str!("../scenarios/fig6_mac.toml"),
        "mean frame delay vs frame length, conventional vs sensing-assisted MAC",
    ),
];

pub fn bundled_by_name(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _, _)| *n == name).map(|(_, text, _)| *text)
}

/// Load a scenario from a bundled name or a file path.
pub fn load_scenario(input: &str) -> Result<(Scenario, String), ScenarioError> {
    let (text, name) = if let Some(text) = bundled_by_name(input) {
        (text.to_string(), input.to_string())
    } else {
        let path = Path::new(input);
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("cannot read {input}: {e}")))?;
        (text, input.to_string())
    };
    let scenario = parse_scenario(&text)?;
    Ok((scenario, name))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    validate(&scenario)?;
    Ok(scenario)
}

fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    if s.trials == 0 {
        return Err(ScenarioError::Invariant("trials must be at least 1".into()));
    }
    if s.output.is_empty() {
        return Err(ScenarioError::Invariant("output path must not be empty".into()));
    }
    let inv = |msg: String| ScenarioError::Invariant(msg);
    match s.experiment {
        ExperimentKind::Ber => {
            let section =
                s.ber.as_ref().ok_or_else(|| inv("ber experiment needs a [ber] section".into()))?;
            let waveform = s.waveform.clone().unwrap_or_default();
            for mode in [WaveformMode::PlainOfdm, WaveformMode::CdOfdm] {
                let list = section.snr_list(mode).ok_or_else(|| {
                    inv(format!("no SNR list for mode {}", mode.as_str()))
                })?;
                if list.is_empty() {
                    return Err(inv(format!("empty SNR list for mode {}", mode.as_str())));
                }
                waveform.config(mode, None).validate().map_err(|e| inv(e.to_string()))?;
            }
        }
        ExperimentKind::Rmse => {
            let section = s
                .rmse
                .as_ref()
                .ok_or_else(|| inv("rmse experiment needs a [rmse] section".into()))?;
            if section.snr_db.is_empty() {
                return Err(inv("empty SNR list".into()));
            }
            let waveform = s.waveform.clone().unwrap_or_default();
            for mode in [WaveformMode::PlainOfdm, WaveformMode::CdOfdm] {
                let cfg = waveform
                    .config(mode, Some((section.spread_freq, section.spread_time)));
                cfg.validate().map_err(|e| inv(e.to_string()))?;
                section
                    .sensing_scenario()
                    .target
                    .validate(&cfg)
                    .map_err(|e| inv(e.to_string()))?;
            }
        }
        ExperimentKind::Nd => {
            let section =
                s.nd.as_ref().ok_or_else(|| inv("nd experiment needs an [nd] section".into()))?;
            if section.neighbor_counts.is_empty() {
                return Err(inv("empty neighbor_counts sweep".into()));
            }
            section.config(s.trials).validate().map_err(|e| inv(e.to_string()))?;
        }
        ExperimentKind::Mac => {
            let section =
                s.mac.as_ref().ok_or_else(|| inv("mac experiment needs a [mac] section".into()))?;
            section.config(s.trials)?.validate().map_err(|e| inv(e.to_string()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ber_scenario_fills_defaults() {
        let text = r#"
experiment = "ber"
seed = 1
trials = 2
output = "out.csv"

[ber]
snr_db = [0.0, 5.0]
"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.experiment, ExperimentKind::Ber);
        let w = s.waveform.unwrap_or_default();
        assert_eq!(w.num_subcarriers, 2048);
        assert_eq!(w.spread_freq, 64);
    }

    #[test]
    fn unknown_key_names_the_offender() {
        let text = r#"
experiment = "ber"
seed = 1
trials = 2
output = "out.csv"
snr_typo = 3

[ber]
snr_db = [0.0]
"#;
        let err = parse_scenario(text).unwrap_err();
        match err {
            ScenarioError::Parse(msg) => assert!(msg.contains("snr_typo"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_power_of_two_spreading_cites_the_rule() {
        let text = r#"
experiment = "ber"
seed = 1
trials = 2
output = "out.csv"

[waveform]
spread_freq = 3

[ber]
snr_db = [0.0]
"#;
        let err = parse_scenario(text).unwrap_err();
        match err {
            ScenarioError::Invariant(msg) => {
                assert!(msg.contains("powers of two"), "{msg}")
            }
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_preserves_scenario() {
        for (_, text, _) in BUNDLED {
            let s = parse_scenario(text).unwrap();
            let serialized = toml::to_string(&s).unwrap();
            let back = parse_scenario(&serialized).unwrap();
            let again = toml::to_string(&back).unwrap();
            assert_eq!(serialized, again);
        }
    }

    #[test]
    fn bundled_scenarios_parse() {
        for (name, text, _) in BUNDLED {
            parse_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
