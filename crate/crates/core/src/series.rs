//! Sweep result containers and the statistics every simulator reports.

use serde::{Deserialize, Serialize};

/// Per-point status surfaced in CSV output and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointFlag {
    Ok,
    /// Some trials hit the slot cap; they contribute the cap value
    /// (censored mean).
    Truncated,
    /// Queues grew without bound at this offered load.
    Saturated,
    /// The sampled geometry contained no hidden pairs; the experiment is
    /// valid but both variants coincide.
    WarnNoHidden,
}

impl PointFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::Truncated => "truncated",
            PointFlag::Saturated => "saturated",
            PointFlag::WarnNoHidden => "warn_no_hidden",
        }
    }
}

/// One aggregated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPoint {
    /// Sweep axis value (SNR in dB, neighbor count, frame slots).
    pub axis: f64,
    /// Curve label: waveform mode, ND algorithm or MAC variant.
    pub variant: String,
    /// Metric name, e.g. `ber`, `range_rmse_m`, `mean_slots`.
    pub metric: String,
    pub mean: f64,
    /// 95% normal-approximation half-width; `None` with fewer than two
    /// trials (rendered as `na`).
    pub ci_half_width: Option<f64>,
    pub trials: u64,
    /// Fraction of truncated runs, where the experiment defines one.
    pub truncated_fraction: Option<f64>,
    pub flag: PointFlag,
}

/// Result of one sweep: one row per (axis value, variant, metric).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub axis_label: String,
    pub points: Vec<TrialPoint>,
}

impl TrialSeries {
    pub fn new(axis_label: impl Into<String>) -> Self {
        Self { axis_label: axis_label.into(), points: Vec::new() }
    }

    /// Deterministic row order: sweep axis ascending, then variant and
    /// metric lexicographic.
    pub fn sort_rows(&mut self) {
        self.points.sort_by(|a, b| {
            a.axis
                .partial_cmp(&b.axis)
                .expect("finite axis values")
                .then_with(|| a.variant.cmp(&b.variant))
                .then_with(|| a.metric.cmp(&b.metric))
        });
    }

    pub fn extend(&mut self, other: TrialSeries) {
        self.points.extend(other.points);
    }

    pub fn worst_flag(&self) -> PointFlag {
        let mut worst = PointFlag::Ok;
        for p in &self.points {
            if p.flag != PointFlag::Ok {
                worst = p.flag;
            }
        }
        worst
    }
}

/// Sample mean and 95% half-width (1.96 * s / sqrt(n)). Returns `None`
/// half-width when fewer than two samples exist.
pub fn mean_ci(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, Some(1.96 * (var / n as f64).sqrt()))
}
