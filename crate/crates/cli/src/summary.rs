//! Relative-improvement reports between two result curves.

use anyhow::{bail, Result};

use crate::csv_io::CsvRow;

/// One curve: ascending axis values with their means.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Group rows into curves keyed by (variant, metric).
pub fn curves_of(rows: &[CsvRow]) -> Vec<Curve> {
    let mut curves: Vec<Curve> = Vec::new();
    for row in rows {
        let label = format!("{} {}", row.variant, row.metric);
        match curves.iter_mut().find(|c| c.label == label) {
            Some(c) => c.points.push((row.axis, row.mean)),
            None => curves.push(Curve { label, points: vec![(row.axis, row.mean)] }),
        }
    }
    for c in &mut curves {
        c.points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite axis"));
    }
    curves
}

/// Select a single curve, optionally filtered by variant and metric.
pub fn select_curve(
    rows: &[CsvRow],
    variant: Option<&str>,
    metric: Option<&str>,
) -> Result<Curve> {
    let filtered: Vec<CsvRow> = rows
        .iter()
        .filter(|r| variant.is_none_or(|v| r.variant == v))
        .filter(|r| metric.is_none_or(|m| r.metric == m))
        .cloned()
        .collect();
    let curves = curves_of(&filtered);
    match curves.len() {
        0 => bail!(
            "no rows match variant={:?} metric={:?}; available: {}",
            variant,
            metric,
            curves_of(rows).iter().map(|c| c.label.clone()).collect::<Vec<_>>().join(", ")
        ),
        1 => Ok(curves.into_iter().next().expect("checked")),
        _ => bail!(
            "ambiguous selection, narrow with --variant-*/--metric; candidates: {}",
            curves.iter().map(|c| c.label.clone()).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Per-point comparison of two curves over identical axes.
#[derive(Debug, Clone)]
pub struct PointComparison {
    pub axis: f64,
    pub a: f64,
    pub b: f64,
    /// b / a.
    pub ratio: f64,
    /// (1 - b/a) * 100: positive when b improves on a.
    pub improvement_pct: f64,
}

pub fn compare_curves(a: &Curve, b: &Curve) -> Result<Vec<PointComparison>> {
    if a.points.len() != b.points.len()
        || a.points.iter().zip(&b.points).any(|(x, y)| x.0 != y.0)
    {
        bail!(
            "axis mismatch: {} has [{}], {} has [{}]",
            a.label,
            a.points.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join(", "),
            b.label,
            b.points.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join(", ")
        );
    }
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(&(axis, va), &(_, vb))| {
            let ratio = vb / va;
            PointComparison { axis, a: va, b: vb, ratio, improvement_pct: (1.0 - ratio) * 100.0 }
        })
        .collect())
}

/// Axis value where the curve crosses `level`, by linear interpolation of
/// log10(mean) against the axis. The curve must be decreasing in its mean.
/// Returns `None` when the level is never bracketed.
pub fn crossing_at_level(curve: &Curve, level: f64) -> Option<f64> {
    let target = level.log10();
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|&(x, v)| (x, v.log10()))
        .collect();
    for pair in pts.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if (y0 - target) * (y1 - target) <= 0.0 && y0 != y1 {
            return Some(x0 + (target - y0) / (y1 - y0) * (x1 - x0));
        }
    }
    None
}

/// Horizontal gain of curve `b` over curve `a` at a metric level: how many
/// axis units earlier `b` reaches the level (positive = `b` better for
/// decreasing metrics like BER vs SNR).
pub fn gain_at_level(a: &Curve, b: &Curve, level: f64) -> Option<f64> {
    Some(crossing_at_level(a, level)? - crossing_at_level(b, level)?)
}

/// Render the textual report.
pub fn report(a: &Curve, b: &Curve, points: &[PointComparison], gain: Option<(f64, f64)>) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "comparing A = [{}] against B = [{}]", a.label, b.label);
    let _ = writeln!(out, "{:>12} {:>14} {:>14} {:>8} {:>12}", "axis", "A", "B", "B/A", "improve%");
    for p in points {
        let _ = writeln!(
            out,
            "{:>12} {:>14.6} {:>14.6} {:>8.4} {:>12.2}",
            p.axis, p.a, p.b, p.ratio, p.improvement_pct
        );
    }
    let mean_ratio =
        points.iter().map(|p| p.ratio).sum::<f64>() / points.len().max(1) as f64;
    let _ = writeln!(
        out,
        "mean B/A ratio {:.4} ({:.2}% mean improvement)",
        mean_ratio,
        (1.0 - mean_ratio) * 100.0
    );
    if let Some((level, g)) = gain {
        let _ = writeln!(out, "horizontal gain of B over A at level {level}: {g:.2} axis units");
    }
    out
}
