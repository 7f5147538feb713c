//! Slotted CSMA MAC with hidden-terminal collisions.
//!
//! A conventional carrier-sense variant is compared against the sensing
//! assisted one (`jcsc`), which additionally defers while a known hidden
//! node is on the air. Hidden-node knowledge comes from the discovery
//! process and is modeled as genie knowledge of the detected subset.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{uniform_square_points, GeomError, Point};
use crate::rng::RngHandle;
use crate::series::{mean_ci, PointFlag, TrialPoint, TrialSeries};
use crate::Real;

mod tag {
    pub const WORLD: u64 = 0x6d_01;
    pub const DETECT: u64 = 0x6d_02;
    pub const RUN: u64 = 0x6d_03;
    pub const POINT: u64 = 0x6d_04;
}

#[derive(Debug, Error, PartialEq)]
pub enum MacError {
    #[error("invalid MAC config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacVariant {
    Conventional,
    Jcsc,
}

impl MacVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MacVariant::Conventional => "conventional",
            MacVariant::Jcsc => "jcsc",
        }
    }
}

/// Which variants a sweep simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSelection {
    Conventional,
    Jcsc,
    Both,
}

impl VariantSelection {
    pub fn variants(&self) -> &'static [MacVariant] {
        match self {
            VariantSelection::Conventional => &[MacVariant::Conventional],
            VariantSelection::Jcsc => &[MacVariant::Jcsc],
            VariantSelection::Both => &[MacVariant::Conventional, MacVariant::Jcsc],
        }
    }
}

/// Frame arrival process per node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalModel {
    /// Per-slot Bernoulli probability chosen so the network-wide offered
    /// channel time is this fraction: p = load / (node_count * frame_slots).
    LoadFactor(f64),
    /// Fixed per-node per-slot Bernoulli probability.
    PerSlotProbability(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MacConfig {
    pub node_count: usize,
    pub side_m: f64,
    pub comm_range_m: f64,
    pub carrier_sense_range_m: f64,
    /// Sweep axis: frame duration in slots.
    pub frame_slots: Vec<usize>,
    pub arrival: ArrivalModel,
    /// Backoff window lower edge, slots.
    pub backoff_min: u64,
    /// Backoff window upper edge, in frame durations. Two colliding hidden
    /// nodes only separate when the window exceeds the 2-frame overlap
    /// span, so the window has to scale with the frame length.
    pub backoff_max_frames: u64,
    pub variant: VariantSelection,
    /// Probability that a hidden pair is known to both parties in the jcsc
    /// variant.
    pub hidden_detection_fraction: f64,
    /// Horizon is sized so at least this many frames complete per trial
    /// unless `horizon_slots` pins it.
    pub min_completed_frames: u64,
    pub horizon_slots: Option<u64>,
    pub trials: u64,
}

impl MacConfig {
    pub fn baseline() -> Self {
        Self {
            node_count: 10,
            side_m: 140.0,
            comm_range_m: 70.0,
            // Directional carrier sensing hears less far than the data link
            // reaches, which is what makes hidden terminals common here.
            carrier_sense_range_m: 45.0,
            frame_slots: vec![4, 8, 16, 32, 64],
            arrival: ArrivalModel::LoadFactor(0.35),
            backoff_min: 1,
            backoff_max_frames: 16,
            variant: VariantSelection::Both,
            hidden_detection_fraction: 1.0,
            min_completed_frames: 1000,
            horizon_slots: None,
            trials: 80,
        }
    }

    pub fn validate(&self) -> Result<(), MacError> {
        if self.node_count < 2 {
            return Err(MacError::InvalidConfig("node_count must be at least 2".into()));
        }
        if !(self.side_m > 0.0 && self.comm_range_m > 0.0 && self.carrier_sense_range_m > 0.0) {
            return Err(MacError::InvalidConfig("geometry lengths must be positive".into()));
        }
        if self.frame_slots.is_empty() {
            return Err(MacError::InvalidConfig("empty frame_slots sweep".into()));
        }
        if self.frame_slots.contains(&0) {
            return Err(MacError::InvalidConfig("frame_slots entries must be at least 1".into()));
        }
        match self.arrival {
            ArrivalModel::LoadFactor(l) if !(l > 0.0 && l < 1.0) => {
                return Err(MacError::InvalidConfig("load factor must be in (0, 1)".into()));
            }
            ArrivalModel::PerSlotProbability(p) if !(p > 0.0 && p < 1.0) => {
                return Err(MacError::InvalidConfig("arrival_prob must be in (0, 1)".into()));
            }
            _ => {}
        }
        if self.backoff_min < 1 || self.backoff_max_frames < 1 {
            return Err(MacError::InvalidConfig(
                "backoff window needs min >= 1 slot and max >= 1 frame".into(),
            ));
        }
        let min_frame = *self.frame_slots.iter().min().expect("non-empty");
        if self.backoff_min > self.backoff_max_frames * min_frame as u64 {
            return Err(MacError::InvalidConfig(
                "backoff window min exceeds its max at the shortest frame".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.hidden_detection_fraction) {
            return Err(MacError::InvalidConfig(
                "hidden_detection_fraction must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn arrival_prob(&self, frame_slots: usize) -> f64 {
        match self.arrival {
            ArrivalModel::LoadFactor(l) => l / (self.node_count as f64 * frame_slots as f64),
            ArrivalModel::PerSlotProbability(p) => p,
        }
    }

    pub fn horizon(&self, frame_slots: usize) -> u64 {
        if let Some(h) = self.horizon_slots {
            return h;
        }
        let lambda = self.arrival_prob(frame_slots);
        let per_slot = lambda * self.node_count as f64;
        (self.min_completed_frames as f64 / per_slot * 1.3) as u64 + 1000
    }
}

/// Static topology: destinations, audibility/carrier-sense graphs and the
/// hidden-pair map.
#[derive(Debug, Clone)]
pub struct MacWorld {
    pub positions: Vec<Point<Real>>,
    /// Fixed receiver of each node: its nearest neighbor.
    pub dest: Vec<usize>,
    audible: Vec<Vec<bool>>,
    senses: Vec<Vec<bool>>,
    /// Per transmitter: nodes that reach its receiver but sit outside the
    /// transmitter's carrier-sense range.
    pub hidden: Vec<Vec<usize>>,
    /// Subset of `hidden` detected by the discovery process.
    pub known_hidden: Vec<Vec<usize>>,
    pub hidden_pair_count: usize,
}

impl MacWorld {
    pub fn audible_to(&self, node: usize, receiver: usize) -> bool {
        self.audible[node][receiver]
    }
}

/// Place nodes, wire each to its nearest neighbor, derive the hidden map
/// and draw which hidden pairs are known (one detection draw per unordered
/// pair on a dedicated stream).
pub fn build_mac_world(
    config: &MacConfig,
    world_rng: RngHandle,
    detection_rng: RngHandle,
) -> Result<MacWorld, MacError> {
    config.validate()?;
    let n = config.node_count;
    let positions = uniform_square_points::<Real>(world_rng, n, config.side_m)?;

    let mut audible = vec![vec![false; n]; n];
    let mut senses = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = positions[i].distance_to(&positions[j]);
            audible[i][j] = d <= config.comm_range_m;
            senses[i][j] = i != j && d <= config.carrier_sense_range_m;
        }
    }

    let dest: Vec<usize> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .min_by(|&a, &b| {
                    positions[i]
                        .distance_to(&positions[a])
                        .partial_cmp(&positions[i].distance_to(&positions[b]))
                        .expect("finite distances")
                })
                .expect("node_count >= 2")
        })
        .collect();

    let hidden: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let r = dest[i];
            (0..n).filter(|&j| j != i && j != r && audible[j][r] && !senses[i][j]).collect()
        })
        .collect();

    // One detection draw per unordered pair, consumed on its own stream so
    // the main dynamics are unaffected by the detection fraction.
    let mut det = detection_rng.rng();
    let mut detected = vec![vec![false; n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in i + 1..n {
            let hit = det.bernoulli(config.hidden_detection_fraction);
            detected[i][j] = hit;
            detected[j][i] = hit;
        }
    }
    let known_hidden: Vec<Vec<usize>> = (0..n)
        .map(|i| hidden[i].iter().copied().filter(|&j| detected[i][j]).collect())
        .collect();
    for (i, known) in known_hidden.iter().enumerate() {
        debug_assert!(
            known.iter().all(|&j| !senses[i][j]),
            "known_hidden must lie outside the carrier-sense range"
        );
    }

    let mut pair_seen = vec![vec![false; n]; n];
    let mut hidden_pair_count = 0;
    for (i, h) in hidden.iter().enumerate() {
        for &j in h {
            let (a, b) = (i.min(j), i.max(j));
            if !pair_seen[a][b] {
                pair_seen[a][b] = true;
                hidden_pair_count += 1;
            }
        }
    }

    Ok(MacWorld { positions, dest, audible, senses, hidden, known_hidden, hidden_pair_count })
}

/// Outcome of one simulated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MacRunStats {
    /// Delivery delays in slots, one per completed frame.
    pub delays: Vec<u64>,
    pub arrived: u64,
    pub delivered: u64,
    pub collisions: u64,
    pub backlog_end: u64,
    pub saturated: bool,
    pub offered_load: f64,
}

impl MacRunStats {
    pub fn mean_delay(&self) -> f64 {
        if self.delays.is_empty() {
            f64::NAN
        } else {
            self.delays.iter().sum::<u64>() as f64 / self.delays.len() as f64
        }
    }
}

#[derive(Debug, Clone)]
struct Tx {
    start: u64,
    end: u64,
    corrupted: bool,
}

/// Simulate one horizon of slotted CSMA.
///
/// Per slot: Bernoulli arrivals; nodes with a pending frame, expired backoff
/// and no ongoing transmission sense the channel against transmissions
/// started in earlier slots and either start a `frame_slots`-slot frame or
/// back off uniformly in the window. The jcsc variant additionally defers
/// while any known hidden node is on the air. A frame is lost when any other
/// node audible to its receiver overlaps it; lost frames are retransmitted
/// after backoff.
pub fn run_mac(
    config: &MacConfig,
    world: &MacWorld,
    variant: MacVariant,
    frame_slots: usize,
    rng: RngHandle,
) -> MacRunStats {
    let n = config.node_count;
    let lambda = config.arrival_prob(frame_slots);
    let horizon = config.horizon(frame_slots);
    let mut r = rng.rng();

    let mut queue: Vec<VecDeque<u64>> = vec![VecDeque::new(); n];
    let mut backoff = vec![0u64; n];
    let mut tx: Vec<Option<Tx>> = vec![None; n];

    let mut delays = Vec::new();
    let mut arrived = 0u64;
    let mut delivered = 0u64;
    let mut collisions = 0u64;

    let backoff_max = config.backoff_max_frames * frame_slots as u64;
    let draw_backoff = |r: &mut crate::rng::TrialRng| {
        config.backoff_min + r.index((backoff_max - config.backoff_min + 1) as usize) as u64
    };

    for t in 0..horizon {
        // Arrivals.
        for node_queue in queue.iter_mut() {
            if r.bernoulli(lambda) {
                node_queue.push_back(t);
                arrived += 1;
            }
        }

        // Channel state visible to this slot's decisions: transmissions
        // started strictly earlier. Same-slot starters cannot hear each
        // other, which is the slotted collision mechanism.
        let active_earlier: Vec<usize> = (0..n)
            .filter(|&j| tx[j].as_ref().is_some_and(|x| x.start < t && t < x.end))
            .collect();

        for i in 0..n {
            if tx[i].is_some() || backoff[i] > 0 || queue[i].is_empty() {
                continue;
            }
            let busy = active_earlier.iter().any(|&j| j != i && world.senses[i][j]);
            let hidden_active = variant == MacVariant::Jcsc
                && active_earlier.iter().any(|&j| world.known_hidden[i].contains(&j));
            if busy || hidden_active {
                backoff[i] = draw_backoff(&mut r);
            } else {
                tx[i] = Some(Tx { start: t, end: t + frame_slots as u64, corrupted: false });
            }
        }

        // Collision marking over everything on the air this slot.
        let active_now: Vec<usize> =
            (0..n).filter(|&j| tx[j].as_ref().is_some_and(|x| x.start <= t && t < x.end)).collect();
        for &i in &active_now {
            if tx[i].as_ref().is_some_and(|x| x.corrupted) {
                continue;
            }
            let receiver = world.dest[i];
            let overlapped = active_now.iter().any(|&j| j != i && world.audible[j][receiver]);
            if overlapped {
                debug_assert!(active_now
                    .iter()
                    .any(|&j| j != i
                        && world.positions[j].distance_to(&world.positions[receiver])
                            <= config.comm_range_m));
                tx[i].as_mut().expect("active").corrupted = true;
                collisions += 1;
            }
        }

        // Completions at the last slot of each frame.
        for i in 0..n {
            let done = tx[i].as_ref().is_some_and(|x| x.end == t + 1);
            if !done {
                continue;
            }
            let frame = tx[i].take().expect("done");
            if frame.corrupted {
                backoff[i] = draw_backoff(&mut r);
            } else {
                let arrival = *queue[i].front().expect("transmitting head-of-line frame");
                delays.push(t - arrival + 1);
                queue[i].pop_front();
                delivered += 1;
            }
        }

        for b in backoff.iter_mut() {
            if *b > 0 {
                *b -= 1;
            }
        }

        // Conservation: every arrived frame is delivered or still queued
        // (in-flight frames stay at their queue head).
        debug_assert_eq!(
            arrived,
            delivered + queue.iter().map(|q| q.len() as u64).sum::<u64>()
        );
    }

    let backlog_end: u64 = queue.iter().map(|q| q.len() as u64).sum();
    let offered_load = lambda * n as f64 * frame_slots as f64;
    let saturated = backlog_end > 30.max((arrived as f64 * 0.1) as u64);
    MacRunStats { delays, arrived, delivered, collisions, backlog_end, saturated, offered_load }
}

/// Paired per-trial stats for one frame length: both variants see the same
/// world, detection draws and dynamics stream.
#[derive(Debug, Clone)]
pub struct MacPointResult {
    pub conventional: Vec<MacRunStats>,
    pub jcsc: Vec<MacRunStats>,
    /// Trials whose sampled geometry had no hidden pair at all.
    pub trials_without_hidden: u64,
}

pub fn run_mac_point(
    config: &MacConfig,
    frame_slots: usize,
    trials: u64,
    rng: RngHandle,
) -> Result<MacPointResult, MacError> {
    config.validate()?;
    let outcomes: Vec<Result<(MacRunStats, MacRunStats, bool), MacError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let world = build_mac_world(
                config,
                rng.substream(tag::WORLD, trial),
                rng.substream(tag::DETECT, trial),
            )?;
            let run_rng = rng.substream(tag::RUN, trial);
            let conv = run_mac(config, &world, MacVariant::Conventional, frame_slots, run_rng);
            let jcsc = run_mac(config, &world, MacVariant::Jcsc, frame_slots, run_rng);
            Ok((conv, jcsc, world.hidden_pair_count == 0))
        })
        .collect();

    let mut result = MacPointResult {
        conventional: Vec::with_capacity(trials as usize),
        jcsc: Vec::with_capacity(trials as usize),
        trials_without_hidden: 0,
    };
    for outcome in outcomes {
        let (c, j, no_hidden) = outcome?;
        result.conventional.push(c);
        result.jcsc.push(j);
        result.trials_without_hidden += u64::from(no_hidden);
    }
    Ok(result)
}

/// Mean frame delay versus frame length for the selected variants.
pub fn run_mac_sweep(config: &MacConfig, rng: RngHandle) -> Result<TrialSeries, MacError> {
    config.validate()?;
    let mut series = TrialSeries::new("frame_slots");
    for (idx, &frame_slots) in config.frame_slots.iter().enumerate() {
        let point_rng = rng.substream(tag::POINT, idx as u64);
        let result = run_mac_point(config, frame_slots, config.trials, point_rng)?;
        let all_without_hidden = result.trials_without_hidden == config.trials;
        for variant in config.variant.variants() {
            let stats = match variant {
                MacVariant::Conventional => &result.conventional,
                MacVariant::Jcsc => &result.jcsc,
            };
            let means: Vec<f64> = stats.iter().map(MacRunStats::mean_delay).collect();
            let (mean, ci_half_width) = mean_ci(&means);
            let saturated = stats.iter().any(|s| s.saturated);
            let flag = if saturated {
                PointFlag::Saturated
            } else if all_without_hidden {
                PointFlag::WarnNoHidden
            } else {
                PointFlag::Ok
            };
            series.points.push(TrialPoint {
                axis: frame_slots as f64,
                variant: variant.as_str().to_string(),
                metric: "mean_delay_slots".to_string(),
                mean,
                ci_half_width,
                trials: config.trials,
                truncated_fraction: None,
                flag,
            });
        }
    }
    series.sort_rows();
    Ok(series)
}
