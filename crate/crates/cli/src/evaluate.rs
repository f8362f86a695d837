//! `evaluate`: per-strategy, per-repetition indicator computation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use mutred_core::indicators::{avg_vms, full_oracle_op};
use mutred_core::indicators::{
    erop_term, nop, nop_default_pairs, op_single_chain, rr, strategy_effectiveness, vms, Indicator,
    IndicatorReport,
};
use mutred_core::matrix::{score_subset, SuiteChain, TestSuite};
use mutred_core::sampling::{derive_seed, sample_k, seeded_rng};
use mutred_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::report::{
    boxplot_csv, out_path, reports_to_csv, stats_of, summary_to_json, write_file, RunSummary,
    StrategySummary,
};
use crate::workbench::{
    build_suites, chain_for_rep, load_workbench, parse_chain, resolve_strategy, ResolvedStrategy,
    Workbench, DOM_EROP_BASELINE, DOM_ES_BASELINE, DOM_NOP, DOM_SELECT,
};

struct CellOutput {
    strat_idx: usize,
    rep: usize,
    selection_size: usize,
    reports: Vec<IndicatorReport>,
}

#[allow(clippy::too_many_arguments)]
fn eval_cell(
    bench: &Workbench,
    cfg: &ExperimentConfig,
    strat: &ResolvedStrategy,
    strat_idx: usize,
    rep: usize,
    suite: &TestSuite,
    fixed_chain: Option<&SuiteChain>,
) -> Result<CellOutput> {
    let sel_seed = derive_seed(cfg.seed, &[DOM_SELECT, strat_idx as u64, rep as u64]);
    let selection = strat.select(bench, sel_seed)?;
    let mutants = selection.mutants();

    let need_chain = cfg
        .indicators
        .iter()
        .any(|i| matches!(i, Indicator::AvgVms | Indicator::Op | Indicator::Erop));
    let chain = if need_chain {
        Some(chain_for_rep(
            fixed_chain,
            suite,
            cfg.seed,
            strat_idx,
            rep,
            cfg.unpaired,
        )?)
    } else {
        None
    };
    let op_value = chain
        .as_ref()
        .map(|c| op_single_chain(&bench.kill, mutants, c));

    let mut reports = Vec::with_capacity(cfg.indicators.len());
    for &indicator in &cfg.indicators {
        let value = match indicator {
            Indicator::Ms => score_subset(&bench.kill, mutants, suite),
            Indicator::Vms => vms(&bench.kill, mutants, suite),
            Indicator::AvgVms => avg_vms(
                &bench.kill,
                mutants,
                std::slice::from_ref(chain.as_ref().unwrap()),
            ),
            Indicator::Es => {
                let mut rng = seeded_rng(derive_seed(
                    cfg.seed,
                    &[DOM_ES_BASELINE, strat_idx as u64, rep as u64],
                ));
                strategy_effectiveness(
                    &bench.kill,
                    mutants,
                    &bench.universe,
                    suite,
                    cfg.es_baseline_reps,
                    &mut rng,
                )?
                .relative
            }
            Indicator::Rr => rr(bench.kill.mutant_count(), mutants.len()),
            Indicator::Op => op_value.unwrap(),
            Indicator::Erop => {
                let mut rng = seeded_rng(derive_seed(
                    cfg.seed,
                    &[DOM_EROP_BASELINE, strat_idx as u64, rep as u64],
                ));
                let baseline = sample_k(&mut rng, &bench.universe, mutants.len());
                erop_term(&bench.kill, mutants, &baseline, chain.as_ref().unwrap())
            }
            Indicator::Nop => {
                let tags: Vec<u64> = if cfg.unpaired {
                    vec![DOM_NOP, strat_idx as u64, rep as u64]
                } else {
                    vec![DOM_NOP, rep as u64]
                };
                let mut rng = seeded_rng(derive_seed(cfg.seed, &tags));
                let pairs = cfg
                    .nop_pairs
                    .unwrap_or_else(|| nop_default_pairs(suite.len()));
                nop(&bench.kill, mutants, suite, pairs, &mut rng)?
            }
            Indicator::OracleOp => full_oracle_op(&bench.kill, mutants, suite)?.preserved,
        };
        reports.push(IndicatorReport {
            strategy: strat.label.clone(),
            rep,
            indicator,
            value,
            seed: sel_seed,
        });
    }
    Ok(CellOutput {
        strat_idx,
        rep,
        selection_size: mutants.len(),
        reports,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    let bench = load_workbench(
        &cfg.kill_path,
        cfg.coverage_path.as_deref(),
        cfg.operators_path.as_deref(),
    )?;

    let (suites, fixed_chain) = match &cfg.chain {
        Some(spec) => {
            let chain = parse_chain(spec, &bench.kill)?;
            (vec![chain.suites()[0].clone()], Some(chain))
        }
        None => (build_suites(cfg.suite_mode, &bench.kill, cfg.seed)?, None),
    };

    if cfg.indicators.contains(&Indicator::OracleOp) {
        let too_big = suites.iter().map(TestSuite::len).max().unwrap_or(0);
        if too_big > 20 {
            return Err(Error::resource(format!(
                "ORACLE_OP is exponential and capped at 20 tests; this suite has {too_big}"
            )));
        }
    }

    // Resolve strategies, pre-flighting each once: a deterministic
    // infeasibility (the cos deny filter or a pipeline quota) shows up at
    // repetition 0 and skips the strategy rather than aborting the run.
    let mut included: Vec<(usize, ResolvedStrategy)> = Vec::new();
    let mut skipped: Vec<(String, String)> = Vec::new();
    let mut seen_labels: Vec<String> = Vec::new();
    for (idx, text) in cfg.strategies.iter().enumerate() {
        let resolved = resolve_strategy(text, &bench)?;
        if seen_labels.contains(&resolved.label) {
            return Err(Error::input(format!(
                "strategy `{}` appears twice",
                resolved.label
            )));
        }
        seen_labels.push(resolved.label.clone());
        let probe_seed = derive_seed(cfg.seed, &[DOM_SELECT, idx as u64, 0]);
        match resolved.select(&bench, probe_seed) {
            Ok(_) => included.push((idx, resolved)),
            Err(Error::Infeasible(reason)) => {
                eprintln!("skipping `{}`: {reason}", resolved.label);
                skipped.push((resolved.label, reason));
            }
            Err(other) => return Err(other),
        }
    }

    let cells: Vec<(usize, usize)> = included
        .iter()
        .enumerate()
        .flat_map(|(pos, _)| (0..cfg.reps).map(move |rep| (pos, rep)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::input(format!("cannot build worker pool: {e}")))?;
    let mut outputs: Vec<CellOutput> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(pos, rep)| {
                let (strat_idx, strat) = &included[pos];
                let suite = &suites[rep % suites.len()];
                eval_cell(
                    &bench,
                    cfg,
                    strat,
                    *strat_idx,
                    rep,
                    suite,
                    fixed_chain.as_ref(),
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    outputs.sort_by_key(|c| (c.strat_idx, c.rep));

    let reports: Vec<IndicatorReport> = outputs.iter().flat_map(|c| c.reports.clone()).collect();
    let strategy_order: Vec<String> = included.iter().map(|(_, s)| s.label.clone()).collect();

    // Per-strategy, per-indicator statistics.
    let mut strategies: BTreeMap<String, StrategySummary> = BTreeMap::new();
    for (pos, (_, strat)) in included.iter().enumerate() {
        let mut per_indicator: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut first_size = 0usize;
        for cell in outputs.iter().filter(|c| c.strat_idx == included[pos].0) {
            if cell.rep == 0 {
                first_size = cell.selection_size;
            }
            for r in &cell.reports {
                per_indicator
                    .entry(r.indicator.to_string())
                    .or_default()
                    .push(r.value);
            }
        }
        strategies.insert(
            strat.label.clone(),
            StrategySummary::Ok {
                indicators: per_indicator
                    .into_iter()
                    .map(|(k, v)| (k, stats_of(&v)))
                    .collect(),
                selection_size_first_rep: first_size,
            },
        );
    }
    for (label, reason) in &skipped {
        strategies.insert(
            label.clone(),
            StrategySummary::Skipped {
                reason: reason.clone(),
            },
        );
    }

    let summary = RunSummary {
        seed: cfg.seed,
        reps: cfg.reps,
        suite_size: suites[0].len(),
        mutants: bench.kill.mutant_count(),
        universe: bench.universe.len(),
        strategies,
    };

    write_file(
        &out_path(&cfg.output_dir, "reports.csv"),
        &reports_to_csv(&reports),
    )?;
    write_file(
        &out_path(&cfg.output_dir, "summary.json"),
        &summary_to_json(&summary),
    )?;
    write_file(
        &out_path(&cfg.output_dir, "boxplot.csv"),
        &boxplot_csv(&reports, &strategy_order),
    )?;
    println!(
        "wrote {}, {}, {}",
        out_path(&cfg.output_dir, "reports.csv").display(),
        out_path(&cfg.output_dir, "summary.json").display(),
        out_path(&cfg.output_dir, "boxplot.csv").display(),
    );

    if included.is_empty() {
        return Err(Error::infeasible(
            "every requested strategy was infeasible; see summary.json",
        ));
    }
    Ok(())
}
