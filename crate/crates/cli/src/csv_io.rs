//! CSV emission and parsing.
//!
//! Files are UTF-8, comma-separated, with `#`-prefixed comment lines that
//! embed the fully resolved scenario (the audit trail), one header row, and
//! deterministic row order. Numbers use Rust's shortest round-trip `Display`
//! form so identical runs serialize byte-identically.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use jcsc_core::series::{PointFlag, TrialSeries};

use crate::scenario::{ExperimentKind, Scenario};

pub const SCENARIO_BEGIN: &str = "# --- scenario ---";
pub const SCENARIO_END: &str = "# --- end scenario ---";

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "na".to_string()
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "na".to_string(),
    }
}

/// Render the whole CSV in memory: audit header, column header, rows.
pub fn render_csv(scenario: &Scenario, name: &str, series: &TrialSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# jcsc-sim csv v1");
    let _ = writeln!(out, "# scenario: {name}");
    let _ = writeln!(out, "{SCENARIO_BEGIN}");
    let toml = toml::to_string(scenario).expect("scenario serializes");
    for line in toml.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "{SCENARIO_END}");

    match scenario.experiment {
        ExperimentKind::Ber | ExperimentKind::Rmse => {
            let _ = writeln!(out, "snr_db,mode,metric,mean,ci_half_width,trials");
            for p in &series.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(p.axis),
                    p.variant,
                    p.metric,
                    fmt_f64(p.mean),
                    fmt_opt(p.ci_half_width),
                    p.trials
                );
            }
        }
        ExperimentKind::Nd => {
            let _ = writeln!(
                out,
                "neighbor_count,algorithm,mean_slots,ci_half_width,truncated_fraction,trials"
            );
            for p in &series.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(p.axis),
                    p.variant,
                    fmt_f64(p.mean),
                    fmt_opt(p.ci_half_width),
                    fmt_opt(p.truncated_fraction),
                    p.trials
                );
            }
        }
        ExperimentKind::Mac => {
            let _ = writeln!(
                out,
                "frame_slots,variant,mean_delay_slots,ci_half_width,saturation_flag,trials"
            );
            for p in &series.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(p.axis),
                    p.variant,
                    fmt_f64(p.mean),
                    fmt_opt(p.ci_half_width),
                    p.flag.as_str(),
                    p.trials
                );
            }
        }
    }
    out
}

/// Write atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        std::process::id()
    ));
    std::fs::write(&tmp, content)
        .with_context(|| format!("cannot write temporary file {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| {
        let _ = std::fs::remove_file(&tmp);
        format!("cannot move output into place at {}", path.display())
    })?;
    Ok(())
}

/// Extract the embedded scenario TOML from a CSV produced by `render_csv`.
pub fn extract_scenario(csv: &str) -> Option<String> {
    let mut lines = csv.lines();
    lines.by_ref().find(|l| *l == SCENARIO_BEGIN)?;
    let mut toml = String::new();
    for line in lines {
        if line == SCENARIO_END {
            return Some(toml);
        }
        toml.push_str(line.strip_prefix("# ").or_else(|| line.strip_prefix('#'))?);
        toml.push('\n');
    }
    None
}

/// One parsed data row, normalized across the experiment layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis: f64,
    pub variant: String,
    pub metric: String,
    pub mean: f64,
    pub flag: PointFlag,
}

/// Parse a results CSV back into normalized rows.
pub fn parse_csv(content: &str) -> Result<Vec<CsvRow>> {
    let mut lines = content.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().context("empty CSV")?;
    let columns: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| columns.iter().position(|c| *c == name);

    let metric_col = idx("metric");
    let mean_col = idx("mean").or_else(|| idx("mean_slots")).or_else(|| idx("mean_delay_slots"));
    let mean_col = mean_col.context("no mean column in header")?;
    let implied_metric = if idx("mean_slots").is_some() {
        "mean_slots"
    } else if idx("mean_delay_slots").is_some() {
        "mean_delay_slots"
    } else {
        "mean"
    };
    let flag_col = idx("saturation_flag");

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            bail!("row {} has {} fields, header has {}", lineno + 2, fields.len(), columns.len());
        }
        let axis: f64 = fields[0]
            .parse()
            .with_context(|| format!("row {}: bad axis value {:?}", lineno + 2, fields[0]))?;
        let mean: f64 = if fields[mean_col] == "na" {
            f64::NAN
        } else {
            fields[mean_col]
                .parse()
                .with_context(|| format!("row {}: bad mean {:?}", lineno + 2, fields[mean_col]))?
        };
        let flag = match flag_col.map(|c| fields[c]) {
            Some("saturated") => PointFlag::Saturated,
            Some("warn_no_hidden") => PointFlag::WarnNoHidden,
            Some("truncated") => PointFlag::Truncated,
            _ => PointFlag::Ok,
        };
        rows.push(CsvRow {
            axis,
            variant: fields[1].to_string(),
            metric: metric_col.map(|c| fields[c].to_string()).unwrap_or_else(|| implied_metric.to_string()),
            mean,
            flag,
        });
    }
    Ok(rows)
}
