//! Shared harness plumbing: matrix loading, suite construction, chain
//! parsing, strategy resolution, and sub-seed domains.

use std::path::Path;

use mutred_core::csv_io;
use mutred_core::matrix::{
    filter_uncovered, half_sample_chain, thin_even_index, verify_kill_implies_cover,
    CoverageMatrix, KillMatrix, OperatorMap, SuiteChain, TestSuite,
};
use mutred_core::sampling::{derive_seed, sample_k, seeded_rng};
use mutred_core::strategy::{
    apply_pipeline, select_cms, select_cos, select_fixed, select_rms, select_sms, CmsCenters,
    CmsInit, Selection, StrategySpec,
};
use mutred_core::{Error, Result};

// Sub-seed domains. Chain and NOP-pair draws deliberately omit the strategy
// tag unless the run is unpaired, so every strategy sees the same chains.
pub const DOM_CHAIN: u64 = 1;
pub const DOM_SELECT: u64 = 2;
pub const DOM_EROP_BASELINE: u64 = 3;
pub const DOM_ES_BASELINE: u64 = 4;
pub const DOM_NOP: u64 = 5;
pub const DOM_SUITE: u64 = 6;
pub const DOM_GEN: u64 = 7;

/// Loaded matrices plus the covered-mutant universe.
pub struct Workbench {
    pub kill: KillMatrix,
    pub cover: CoverageMatrix,
    pub operators: Option<OperatorMap>,
    pub universe: Vec<usize>,
}

pub fn load_workbench(
    kill_path: &Path,
    coverage_path: Option<&Path>,
    operators_path: Option<&Path>,
) -> Result<Workbench> {
    let kill = csv_io::read_matrix(kill_path)?;
    let cover = match coverage_path {
        Some(path) => {
            let cover = csv_io::read_matrix(path)?;
            verify_kill_implies_cover(&kill, &cover)?;
            cover
        }
        None => {
            eprintln!(
                "warning: no coverage matrix given; using the kill matrix as coverage \
                 (an upper-bound approximation)"
            );
            kill.clone()
        }
    };
    let operators = match operators_path {
        Some(path) => {
            let pairs = csv_io::read_operator_pairs(path)?;
            Some(OperatorMap::from_pairs(&pairs, &kill)?)
        }
        None => None,
    };
    let universe = filter_uncovered(&kill, &cover)?;
    if universe.is_empty() {
        return Err(Error::input(
            "every mutant is uncovered; there is nothing to select from",
        ));
    }
    Ok(Workbench {
        kill,
        cover,
        operators,
        universe,
    })
}

/// Parses a chain spec like `t1,t2,t3,t4;t1,t2;t1` and validates nesting and
/// halving against the matrix.
pub fn parse_chain(spec: &str, matrix: &KillMatrix) -> Result<SuiteChain> {
    let suites: Vec<TestSuite> = spec
        .split(';')
        .map(|part| {
            let ids: Vec<&str> = part.split(',').map(str::trim).collect();
            matrix.suite_from_ids(&ids)
        })
        .collect::<Result<_>>()?;
    SuiteChain::new(suites)
}

/// Base suites for the run; repetition `r` uses `suites[r % suites.len()]`.
pub fn build_suites(
    mode: crate::config::SuiteMode,
    matrix: &KillMatrix,
    seed: u64,
) -> Result<Vec<TestSuite>> {
    use crate::config::SuiteMode;
    let full = matrix.full_suite();
    let suites = match mode {
        SuiteMode::Full => vec![full],
        SuiteMode::EvenThinned => vec![thin_even_index(&full)?],
        SuiteMode::RandomHalf(count) => {
            let all: Vec<usize> = full.indices().to_vec();
            if all.len() < 2 {
                return Err(Error::domain("random-half needs at least two tests"));
            }
            (0..count)
                .map(|i| {
                    let mut rng = seeded_rng(derive_seed(seed, &[DOM_SUITE, i as u64]));
                    let half = sample_k(&mut rng, &all, all.len() / 2);
                    let ids: Vec<&str> = half
                        .iter()
                        .map(|&t| matrix.test_ids()[t].as_str())
                        .collect();
                    matrix.suite_from_ids(&ids)
                })
                .collect::<Result<_>>()?
        }
    };
    for suite in &suites {
        if suite.len() < 2 {
            return Err(Error::domain(
                "the base suite must have at least two tests for half-sample chains",
            ));
        }
    }
    Ok(suites)
}

/// A strategy with its data-dependent parts resolved once per run.
pub struct ResolvedStrategy {
    /// Canonical spec text, used as the report key.
    pub label: String,
    kind: ResolvedKind,
}

enum ResolvedKind {
    Rms {
        n: usize,
    },
    Cos {
        deny: std::collections::BTreeSet<String>,
        n: usize,
    },
    /// Deterministic: computed once.
    Sms(Selection),
    Cms {
        n: usize,
        centers: Option<Vec<usize>>,
    },
    Pipeline {
        steps: Vec<mutred_core::strategy::PipelineStep>,
    },
    Fixed {
        indices: Vec<usize>,
        ids: Vec<String>,
    },
}

pub fn resolve_strategy(text: &str, bench: &Workbench) -> Result<ResolvedStrategy> {
    let spec: StrategySpec = text.parse()?;
    let label = spec.to_string();
    let kind = match spec {
        StrategySpec::Rms { n } => ResolvedKind::Rms { n },
        StrategySpec::Cos { deny, n } => {
            if bench.operators.is_none() {
                return Err(Error::input("cos needs an operator map; pass --operators"));
            }
            ResolvedKind::Cos { deny, n }
        }
        StrategySpec::Sms => ResolvedKind::Sms(select_sms(&bench.cover, &bench.universe)?),
        StrategySpec::Cms { n, init } => {
            let centers = match init {
                CmsInit::PlusPlus => None,
                CmsInit::FromSms => {
                    let sms = select_sms(&bench.cover, &bench.universe)?;
                    if sms.len() != n {
                        return Err(Error::input(format!(
                            "cms init=sms needs n to match the subsuming selection size \
                             ({}); got n = {n}",
                            sms.len()
                        )));
                    }
                    Some(sms.mutants().to_vec())
                }
            };
            ResolvedKind::Cms { n, centers }
        }
        StrategySpec::Pipeline { steps } => {
            let needs_ops = steps
                .iter()
                .any(|s| !matches!(s, mutred_core::strategy::PipelineStep::RmsCount(_)));
            if needs_ops && bench.operators.is_none() {
                return Err(Error::input(
                    "this pipeline uses operator steps; pass --operators",
                ));
            }
            ResolvedKind::Pipeline { steps }
        }
        StrategySpec::Fixed { ids } => {
            let indices = bench.kill.mutant_indices(&ids)?;
            ResolvedKind::Fixed { indices, ids }
        }
    };
    Ok(ResolvedStrategy { label, kind })
}

impl ResolvedStrategy {
    /// Runs the strategy with the given sub-seed. Deterministic strategies
    /// ignore the seed beyond recording it.
    pub fn select(&self, bench: &Workbench, seed: u64) -> Result<Selection> {
        match &self.kind {
            ResolvedKind::Rms { n } => select_rms(&bench.universe, *n, seed),
            ResolvedKind::Cos { deny, n } => select_cos(
                &bench.universe,
                bench.operators.as_ref().expect("checked at resolve time"),
                deny,
                *n,
                seed,
            ),
            ResolvedKind::Sms(selection) => Ok(selection.clone()),
            ResolvedKind::Cms { n, centers } => {
                let init = match centers {
                    Some(c) => CmsCenters::Seeded(c),
                    None => CmsCenters::PlusPlus,
                };
                select_cms(&bench.cover, &bench.universe, *n, init, seed)
            }
            ResolvedKind::Pipeline { steps } => apply_pipeline(
                steps,
                &bench.universe,
                bench.operators.as_ref(),
                *pipeline_target(steps)?,
                seed,
            ),
            ResolvedKind::Fixed { indices, ids } => {
                select_fixed(&bench.universe, indices, ids.clone())
            }
        }
    }
}

/// A pipeline's target count is its last count step; a pipeline without one
/// has no way to state a size and is rejected up front.
fn pipeline_target(steps: &[mutred_core::strategy::PipelineStep]) -> Result<&usize> {
    steps
        .iter()
        .rev()
        .find_map(|s| match s {
            mutred_core::strategy::PipelineStep::RmsCount(n) => Some(n),
            _ => None,
        })
        .ok_or_else(|| {
            Error::input("pipeline needs an rms:n=<count> step to fix the selection size")
        })
}

/// Per-repetition chain: the fixed canonical chain when one was supplied,
/// otherwise a fresh half-sample drawn from the repetition's suite.
pub fn chain_for_rep(
    fixed: Option<&SuiteChain>,
    suite: &TestSuite,
    seed: u64,
    strat_idx: usize,
    rep: usize,
    unpaired: bool,
) -> Result<SuiteChain> {
    if let Some(chain) = fixed {
        return Ok(chain.clone());
    }
    let tags: Vec<u64> = if unpaired {
        vec![DOM_CHAIN, strat_idx as u64, rep as u64]
    } else {
        vec![DOM_CHAIN, rep as u64]
    };
    let mut rng = seeded_rng(derive_seed(seed, &tags));
    half_sample_chain(suite, &mut rng)
}
