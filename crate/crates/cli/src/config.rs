//! Experiment configuration: CLI flags merged over an optional JSON config
//! file, flag values winning.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use mutred_core::indicators::Indicator;
use mutred_core::{Error, Result};

/// How the base test suite for each repetition is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteMode {
    /// Use every test.
    Full,
    /// Simulate an insufficient suite: delete the even-position tests
    /// (0-based in column order), keeping positions 1, 3, 5, ...
    EvenThinned,
    /// Draw this many independent half-size suites; repetition `r` uses
    /// suite `r mod count`.
    RandomHalf(usize),
}

impl FromStr for SuiteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SuiteMode::Full),
            "even-thinned" => Ok(SuiteMode::EvenThinned),
            other => {
                if let Some(count) = other.strip_prefix("random-half=") {
                    let count: usize = count.parse().map_err(|_| {
                        Error::input(format!("random-half needs a count, got `{count}`"))
                    })?;
                    if count == 0 {
                        return Err(Error::input("random-half count must be at least 1"));
                    }
                    Ok(SuiteMode::RandomHalf(count))
                } else {
                    Err(Error::input(format!(
                        "unknown suite mode `{other}` (expected full, even-thinned, or random-half=N)"
                    )))
                }
            }
        }
    }
}

/// JSON config file mirroring the experiment fields. Every field is
/// optional; CLI flags override file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kill_path: Option<PathBuf>,
    pub coverage_path: Option<PathBuf>,
    pub operators_path: Option<PathBuf>,
    pub strategies: Option<Vec<String>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub suite_mode: Option<String>,
    pub chain: Option<String>,
    pub ratios: Option<Vec<f64>>,
    pub indicators: Option<Vec<String>>,
    pub output_dir: Option<PathBuf>,
    pub unpaired: Option<bool>,
    pub es_baseline_reps: Option<usize>,
    pub nop_pairs: Option<usize>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read config `{}`: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::input(format!("invalid config `{}`: {e}", path.display())))
    }
}

pub const DEFAULT_REPS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ES_BASELINE_REPS: usize = 100;

pub fn default_indicators() -> Vec<Indicator> {
    vec![
        Indicator::Ms,
        Indicator::Vms,
        Indicator::Rr,
        Indicator::Op,
        Indicator::Erop,
    ]
}

/// Sweep grid matching a 5-point step from keep-all to 95% reduction.
pub fn default_ratios() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 0.05).collect()
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kill_path: PathBuf,
    pub coverage_path: Option<PathBuf>,
    pub operators_path: Option<PathBuf>,
    pub strategies: Vec<String>,
    pub reps: usize,
    pub seed: u64,
    pub suite_mode: SuiteMode,
    pub chain: Option<String>,
    pub ratios: Vec<f64>,
    pub indicators: Vec<Indicator>,
    pub output_dir: PathBuf,
    pub unpaired: bool,
    pub es_baseline_reps: usize,
    pub nop_pairs: Option<usize>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::input("reps must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::input("at least one strategy is required"));
        }
        if self.indicators.is_empty() {
            return Err(Error::input("at least one indicator is required"));
        }
        for &r in &self.ratios {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::input(format!("ratios must lie in [0, 1), got {r}")));
            }
        }
        if self.ratios.is_empty() {
            return Err(Error::input("at least one ratio is required"));
        }
        if self.es_baseline_reps < 1 {
            return Err(Error::input("es-baseline-reps must be at least 1"));
        }
        if self.nop_pairs == Some(0) {
            return Err(Error::input("nop-pairs must be at least 1"));
        }
        Ok(())
    }
}

pub fn parse_indicator_list(text: &str) -> Result<Vec<Indicator>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let ind: Indicator = part.parse()?;
        if !out.contains(&ind) {
            out.push(ind);
        }
    }
    Ok(out)
}

pub fn parse_ratio_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("ratio `{part}` is not a number")))
        })
        .collect()
}
