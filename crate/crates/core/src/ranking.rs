//! Scott-Knott ESD ranking.
//!
//! Treatments are ordered by mean, recursively partitioned where the
//! Scott-Knott lambda statistic beats the chi-square critical value at
//! `alpha` (degrees of freedom `g / (pi - 2)` for a group of `g` means),
//! then adjacent groups whose pooled samples differ by a negligible Cohen's
//! d are merged back together. Ranks run 1..g, best first.

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Which end of the scale is rank 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone)]
pub struct SkConfig {
    pub alpha: f64,
    pub d_threshold: f64,
    pub direction: Direction,
    /// Apply `ln(1 + x)` to the samples before testing. Off by default:
    /// indicator values live in [0, 1] and may be exactly 0.
    pub log1p: bool,
}

impl Default for SkConfig {
    fn default() -> Self {
        SkConfig {
            alpha: 0.05,
            d_threshold: 0.2,
            direction: Direction::HigherIsBetter,
            log1p: false,
        }
    }
}

/// One treatment's rank. Entries are reported best-first; equal ranks mean
/// the treatments were statistically indistinguishable.
#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub treatment: String,
    pub mean: f64,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct RankResult {
    pub entries: Vec<RankEntry>,
    pub direction: Direction,
}

impl RankResult {
    pub fn rank_of(&self, treatment: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.treatment == treatment)
            .map(|e| e.rank)
    }

    pub fn group_count(&self) -> usize {
        self.entries.iter().map(|e| e.rank).max().unwrap_or(0)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], m: f64) -> f64 {
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Cohen's d with pooled standard deviation.
///
/// Degenerate samples: equal means with zero pooled variance give 0;
/// distinct means with zero pooled variance give a signed infinity, which
/// every threshold treats as a large effect.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::input(
            "cohens_d needs at least two values per sample",
        ));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a, ma), sample_variance(b, mb));
    let pooled =
        ((a.len() - 1) as f64 * va + (b.len() - 1) as f64 * vb) / (a.len() + b.len() - 2) as f64;
    let sd = pooled.sqrt();
    if sd == 0.0 {
        if ma == mb {
            return Ok(0.0);
        }
        return Ok(if ma > mb {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok((ma - mb) / sd)
}

struct Treatment {
    label: String,
    raw_mean: f64,
    values: Vec<f64>,
    stat_mean: f64,
}

/// Best split of the ordered means: maximal between-group sum of squares.
fn best_split(means: &[f64]) -> (usize, f64) {
    let g = means.len();
    let overall = mean(means);
    let mut best_at = 1usize;
    let mut best = -1.0f64;
    for cut in 1..g {
        let left = mean(&means[..cut]);
        let right = mean(&means[cut..]);
        let b0 = cut as f64 * (left - overall) * (left - overall)
            + (g - cut) as f64 * (right - overall) * (right - overall);
        if b0 > best {
            best = b0;
            best_at = cut;
        }
    }
    (best_at, best)
}

fn chi2_critical(alpha: f64, dof: f64) -> f64 {
    if alpha <= 0.0 {
        return f64::INFINITY;
    }
    if alpha >= 1.0 {
        return 0.0;
    }
    ChiSquared::new(dof)
        .expect("dof is positive")
        .inverse_cdf(1.0 - alpha)
}

fn split_group(treatments: &[Treatment], order: &[usize], alpha: f64, out: &mut Vec<Vec<usize>>) {
    let g = order.len();
    if g < 2 {
        out.push(order.to_vec());
        return;
    }
    let means: Vec<f64> = order.iter().map(|&i| treatments[i].stat_mean).collect();
    let (cut, b0) = best_split(&means);
    if b0 <= 1e-12 {
        out.push(order.to_vec());
        return;
    }

    // One-way ANOVA pieces over the group's samples.
    let n_total: usize = order.iter().map(|&i| treatments[i].values.len()).sum();
    let dof_err = (n_total - g) as f64;
    let sse: f64 = order
        .iter()
        .map(|&i| {
            let t = &treatments[i];
            t.values
                .iter()
                .map(|v| (v - t.stat_mean) * (v - t.stat_mean))
                .sum::<f64>()
        })
        .sum();
    let overall = mean(&means);
    let ss_means: f64 = means.iter().map(|m| (m - overall) * (m - overall)).sum();
    // Variance of a treatment mean, estimated from the pooled error.
    let mean_var = if dof_err > 0.0 {
        (sse / dof_err) / (n_total as f64 / g as f64)
    } else {
        0.0
    };
    let sigma0 = (ss_means + dof_err * mean_var) / (g as f64 + dof_err);

    let lambda = if sigma0 > 0.0 {
        PI / (2.0 * (PI - 2.0)) * b0 / sigma0
    } else {
        // Distinct means with no variance anywhere: infinitely significant.
        f64::INFINITY
    };
    let critical = chi2_critical(alpha, g as f64 / (PI - 2.0));
    if lambda > critical {
        split_group(treatments, &order[..cut], alpha, out);
        split_group(treatments, &order[cut..], alpha, out);
    } else {
        out.push(order.to_vec());
    }
}

fn pooled_values(treatments: &[Treatment], group: &[usize]) -> Vec<f64> {
    group
        .iter()
        .flat_map(|&i| treatments[i].values.iter().copied())
        .collect()
}

/// Ranks treatments from their per-repetition samples.
///
/// Input order never matters: treatments are sorted by mean under the
/// configured direction, with exact mean ties broken by label.
pub fn scott_knott_esd(samples: &[(String, Vec<f64>)], cfg: &SkConfig) -> Result<RankResult> {
    if samples.is_empty() {
        return Err(Error::input("ranking needs at least one treatment"));
    }
    let mut treatments = Vec::with_capacity(samples.len());
    for (label, values) in samples {
        if values.len() < 2 {
            return Err(Error::input(format!(
                "treatment `{label}` needs at least two values"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "treatment `{label}` has a non-finite value"
            )));
        }
        let stat_values: Vec<f64> = if cfg.log1p {
            values.iter().map(|v| v.ln_1p()).collect()
        } else {
            values.clone()
        };
        let stat_mean = mean(&stat_values);
        treatments.push(Treatment {
            label: label.clone(),
            raw_mean: mean(values),
            values: stat_values,
            stat_mean,
        });
    }

    let mut order: Vec<usize> = (0..treatments.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (&treatments[a], &treatments[b]);
        let by_mean = match cfg.direction {
            Direction::HigherIsBetter => tb.stat_mean.total_cmp(&ta.stat_mean),
            Direction::LowerIsBetter => ta.stat_mean.total_cmp(&tb.stat_mean),
        };
        by_mean.then_with(|| ta.label.cmp(&tb.label))
    });

    let mut groups: Vec<Vec<usize>> = Vec::new();
    split_group(&treatments, &order, cfg.alpha, &mut groups);

    // Effect-size pass: merge adjacent groups with negligible Cohen's d.
    let mut merged: Vec<Vec<usize>> = Vec::new();
    for group in groups {
        if let Some(last) = merged.last_mut() {
            let d = cohens_d(
                &pooled_values(&treatments, last),
                &pooled_values(&treatments, &group),
            )?;
            if d.abs() < cfg.d_threshold {
                last.extend(group);
                continue;
            }
        }
        merged.push(group);
    }

    let mut entries = Vec::with_capacity(treatments.len());
    for (rank, group) in merged.iter().enumerate() {
        for &i in group {
            entries.push(RankEntry {
                treatment: treatments[i].label.clone(),
                mean: treatments[i].raw_mean,
                rank: rank + 1,
            });
        }
    }
    Ok(RankResult {
        entries,
        direction: cfg.direction,
    })
}
