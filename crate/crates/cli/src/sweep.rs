//! `sweep`: mean OP and EROP per strategy across a reduction-ratio grid.
//!
//! Strategies here are size-free families (`rms`, `cos[:deny=..]`,
//! `cms[:init=sms]`, `sms`); the selection size at ratio `r` is
//! `|U| - round(r * |U|)`, clamped to at least one mutant. The subsuming
//! selection has a data-determined size, so it contributes a single point at
//! its own ratio. Half-sample chains are shared across every cell of a
//! repetition, so strategy and ratio comparisons are paired.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use mutred_core::indicators::{erop_term, op_single_chain, rr};
use mutred_core::sampling::{derive_seed, sample_k, seeded_rng};
use mutred_core::strategy::{
    apply_pipeline, default_cos_deny, select_cms_round_robin, select_cos, select_rms, select_sms,
    CmsCenters, CmsInit, PipelineStep, Selection,
};
use mutred_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::report::{out_path, write_file};
use crate::workbench::{chain_for_rep, load_workbench, Workbench, DOM_EROP_BASELINE, DOM_SELECT};

/// A size-free strategy family swept over the ratio grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepFamily {
    Rms,
    Cos(BTreeSet<String>),
    Cms(CmsInit),
    Sms,
    /// Pipeline steps; the ratio supplies the target count.
    Pipeline(Vec<PipelineStep>),
}

impl SweepFamily {
    pub fn label(&self) -> &'static str {
        match self {
            SweepFamily::Rms => "rms",
            SweepFamily::Cos(_) => "cos",
            SweepFamily::Cms(_) => "cms",
            SweepFamily::Sms => "sms",
            SweepFamily::Pipeline(_) => "pipe",
        }
    }
}

impl FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rms" => return Ok(SweepFamily::Rms),
            "cos" => return Ok(SweepFamily::Cos(default_cos_deny())),
            "cms" => return Ok(SweepFamily::Cms(CmsInit::PlusPlus)),
            "sms" => return Ok(SweepFamily::Sms),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("cos:deny=") {
            let deny: BTreeSet<String> = if rest.is_empty() {
                BTreeSet::new()
            } else {
                rest.split('|').map(|l| l.to_string()).collect()
            };
            return Ok(SweepFamily::Cos(deny));
        }
        if let Some(rest) = s.strip_prefix("cms:init=") {
            let init = match rest {
                "sms" => CmsInit::FromSms,
                "kmeans++" => CmsInit::PlusPlus,
                other => {
                    return Err(Error::input(format!(
                        "unknown cms init `{other}` (expected sms or kmeans++)"
                    )))
                }
            };
            return Ok(SweepFamily::Cms(init));
        }
        if s.starts_with("pipe:") {
            if let mutred_core::strategy::StrategySpec::Pipeline { steps } = s.parse()? {
                return Ok(SweepFamily::Pipeline(steps));
            }
        }
        Err(Error::input(format!(
            "unknown sweep strategy `{s}` (expected rms, cos[:deny=..], cms[:init=..], \
             sms, or pipe:[..])"
        )))
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    ratio: f64,
    strategy: String,
    mean_op: f64,
    mean_erop: f64,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    seed: u64,
    reps: usize,
    universe: usize,
    mutants: usize,
    rows: usize,
    skipped: Vec<SkippedCell>,
}

#[derive(Debug, Serialize)]
struct SkippedCell {
    ratio: f64,
    strategy: String,
    reason: String,
}

fn target_size(universe: usize, ratio: f64) -> usize {
    let n = universe - ((ratio * universe as f64).round() as usize).min(universe);
    n.max(1)
}

struct CellSpec {
    family_idx: usize,
    /// None marks the data-sized subsuming point.
    ratio: Option<f64>,
    ratio_idx: usize,
}

enum CellResult {
    Row(SweepRow),
    Skipped(SkippedCell),
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    bench: &Workbench,
    cfg: &ExperimentConfig,
    families: &[SweepFamily],
    sms_selection: &Selection,
    cell: &CellSpec,
) -> Result<CellResult> {
    let family = &families[cell.family_idx];
    let ratio = cell
        .ratio
        .unwrap_or_else(|| rr(bench.kill.mutant_count(), sms_selection.len()));
    let n = match cell.ratio {
        Some(r) => target_size(bench.universe.len(), r),
        None => sms_selection.len(),
    };

    let select = |rep: usize| -> Result<Selection> {
        let seed = derive_seed(
            cfg.seed,
            &[
                DOM_SELECT,
                cell.family_idx as u64,
                cell.ratio_idx as u64,
                rep as u64,
            ],
        );
        match family {
            SweepFamily::Rms => select_rms(&bench.universe, n, seed),
            SweepFamily::Cos(deny) => {
                let ops = bench
                    .operators
                    .as_ref()
                    .ok_or_else(|| Error::input("cos needs an operator map; pass --operators"))?;
                select_cos(&bench.universe, ops, deny, n, seed)
            }
            SweepFamily::Cms(init) => {
                let centers = match init {
                    CmsInit::PlusPlus => CmsCenters::PlusPlus,
                    CmsInit::FromSms => CmsCenters::Seeded(sms_selection.mutants()),
                };
                select_cms_round_robin(
                    &bench.cover,
                    &bench.universe,
                    sms_selection.len(),
                    n,
                    centers,
                    seed,
                )
            }
            SweepFamily::Sms => Ok(sms_selection.clone()),
            SweepFamily::Pipeline(steps) => {
                apply_pipeline(steps, &bench.universe, bench.operators.as_ref(), n, seed)
            }
        }
    };

    // Deterministic infeasibility (the cos filter) shows at repetition 0.
    if let Err(err) = select(0) {
        return match err {
            Error::Infeasible(reason) => Ok(CellResult::Skipped(SkippedCell {
                ratio,
                strategy: family.label().to_string(),
                reason,
            })),
            other => Err(other),
        };
    }

    let suite = bench.kill.full_suite();
    let mut op_sum = 0.0;
    let mut erop_sum = 0.0;
    for rep in 0..cfg.reps {
        let selection = select(rep)?;
        let chain = chain_for_rep(None, &suite, cfg.seed, cell.family_idx, rep, cfg.unpaired)?;
        op_sum += op_single_chain(&bench.kill, selection.mutants(), &chain);
        let mut rng = seeded_rng(derive_seed(
            cfg.seed,
            &[
                DOM_EROP_BASELINE,
                cell.family_idx as u64,
                cell.ratio_idx as u64,
                rep as u64,
            ],
        ));
        let baseline = sample_k(&mut rng, &bench.universe, selection.len());
        erop_sum += erop_term(&bench.kill, selection.mutants(), &baseline, &chain);
    }
    Ok(CellResult::Row(SweepRow {
        ratio,
        strategy: family.label().to_string(),
        mean_op: op_sum / cfg.reps as f64,
        mean_erop: erop_sum / cfg.reps as f64,
    }))
}

pub fn run(cfg: &ExperimentConfig, families: &[SweepFamily]) -> Result<()> {
    if families.is_empty() {
        return Err(Error::input("at least one sweep strategy is required"));
    }
    for (i, family) in families.iter().enumerate() {
        if families[..i].iter().any(|f| f.label() == family.label()) {
            return Err(Error::input(format!(
                "sweep strategy `{}` appears twice",
                family.label()
            )));
        }
    }
    cfg.validate()?;
    let bench = load_workbench(
        &cfg.kill_path,
        cfg.coverage_path.as_deref(),
        cfg.operators_path.as_deref(),
    )?;
    if bench.kill.test_count() < 2 {
        return Err(Error::domain("sweeping needs at least two tests"));
    }
    let sms_selection = select_sms(&bench.cover, &bench.universe)?;

    let mut cells: Vec<CellSpec> = Vec::new();
    for (family_idx, family) in families.iter().enumerate() {
        if matches!(family, SweepFamily::Sms) {
            // One data-sized point; the ratio grid does not apply.
            cells.push(CellSpec {
                family_idx,
                ratio: None,
                ratio_idx: usize::MAX,
            });
        } else {
            for (ratio_idx, &ratio) in cfg.ratios.iter().enumerate() {
                cells.push(CellSpec {
                    family_idx,
                    ratio: Some(ratio),
                    ratio_idx,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::input(format!("cannot build worker pool: {e}")))?;
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(&bench, cfg, families, &sms_selection, cell))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for result in results {
        match result {
            CellResult::Row(row) => rows.push(row),
            CellResult::Skipped(cell) => skipped.push(cell),
        }
    }
    let family_pos: BTreeMap<&str, usize> = families
        .iter()
        .enumerate()
        .map(|(i, f)| (f.label(), i))
        .collect();
    rows.sort_by(|a, b| {
        a.ratio
            .total_cmp(&b.ratio)
            .then_with(|| family_pos[a.strategy.as_str()].cmp(&family_pos[b.strategy.as_str()]))
    });

    let mut csv = String::from("ratio,strategy,mean_op,mean_erop\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.ratio, row.strategy, row.mean_op, row.mean_erop
        ));
    }
    write_file(&out_path(&cfg.output_dir, "sweep.csv"), &csv)?;
    let summary = SweepSummary {
        seed: cfg.seed,
        reps: cfg.reps,
        universe: bench.universe.len(),
        mutants: bench.kill.mutant_count(),
        rows: rows.len(),
        skipped,
    };
    let mut summary_text =
        serde_json::to_string_pretty(&summary).expect("sweep summary serializes");
    summary_text.push('\n');
    write_file(
        &out_path(&cfg.output_dir, "sweep_summary.json"),
        &summary_text,
    )?;
    println!(
        "wrote {} and {}",
        out_path(&cfg.output_dir, "sweep.csv").display(),
        out_path(&cfg.output_dir, "sweep_summary.json").display()
    );

    if rows.is_empty() {
        return Err(Error::infeasible(
            "every sweep cell was infeasible; see sweep_summary.json",
        ));
    }
    Ok(())
}
