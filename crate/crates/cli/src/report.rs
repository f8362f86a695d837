//! Result assembly: report CSV, JSON summary, and boxplot data.
//!
//! All writers emit rows in a deterministic order and format floats with the
//! shortest round-trip representation, so reruns with the same seed produce
//! byte-identical files regardless of worker count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mutred_core::indicators::{Indicator, IndicatorReport};
use mutred_core::{Error, Result};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| Error::input(format!("cannot create `{}`: {e}", parent.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| Error::input(format!("cannot write `{}`: {e}", path.display())))
}

pub fn reports_to_csv(reports: &[IndicatorReport]) -> String {
    let mut out = String::from(IndicatorReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorStats {
    pub mean: f64,
    pub std: f64,
    pub reps: usize,
}

pub fn stats_of(values: &[f64]) -> IndicatorStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    IndicatorStats { mean, std, reps: n }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StrategySummary {
    Ok {
        indicators: BTreeMap<String, IndicatorStats>,
        selection_size_first_rep: usize,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub reps: usize,
    pub suite_size: usize,
    pub mutants: usize,
    pub universe: usize,
    pub strategies: BTreeMap<String, StrategySummary>,
}

pub fn summary_to_json(summary: &RunSummary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Five-number summary with type-7 (linear interpolation) quartiles.
pub fn five_number_summary(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| -> f64 {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    };
    (
        sorted[0],
        quantile(0.25),
        quantile(0.5),
        quantile(0.75),
        sorted[sorted.len() - 1],
    )
}

/// Boxplot rows, one per (indicator, strategy), grouped from report rows.
pub fn boxplot_csv(reports: &[IndicatorReport], strategy_order: &[String]) -> String {
    let mut grouped: BTreeMap<(Indicator, &str), Vec<f64>> = BTreeMap::new();
    for r in reports {
        grouped
            .entry((r.indicator, r.strategy.as_str()))
            .or_default()
            .push(r.value);
    }
    let mut out = String::from("indicator,strategy,min,q1,median,q3,max\n");
    let indicators: Vec<Indicator> = {
        let mut seen: Vec<Indicator> = Vec::new();
        for r in reports {
            if !seen.contains(&r.indicator) {
                seen.push(r.indicator);
            }
        }
        seen
    };
    for ind in indicators {
        for strategy in strategy_order {
            if let Some(values) = grouped.get(&(ind, strategy.as_str())) {
                let (min, q1, median, q3, max) = five_number_summary(values);
                out.push_str(&format!(
                    "{ind},{strategy},{min},{q1},{median},{q3},{max}\n"
                ));
            }
        }
    }
    out
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
