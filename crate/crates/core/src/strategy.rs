//! Mutant reduction strategies.
//!
//! Every strategy selects from a universe of covered mutants (row indices,
//! sorted ascending) and returns a [`Selection`] carrying its provenance.
//! Randomized strategies take an explicit seed; equal seeds give equal
//! selections.
//!
//! The textual strategy grammar, round-trippable through
//! [`StrategySpec::to_string`] and [`str::parse`]:
//!
//! ```text
//! rms:n=10
//! cos:deny=RETURN_VALS|VOID_METHOD_CALL,n=10     (deny defaults to those two)
//! sms
//! cms:n=10[,init=sms|kmeans++]
//! pipe:[drop:LABEL;drop-largest;cos:deny=A|B;rms:n=10]
//! fixed:m1|m2
//! ```
//!
//! Labels and mutant ids must not contain `,` `;` `|` `:` or brackets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kmeans;
use crate::matrix::{CoverageMatrix, OperatorMap};
use crate::sampling::{sample_k, seeded_rng};

/// Operator labels dropped by `cos` when no explicit deny set is given.
pub const DEFAULT_COS_DENY: [&str; 2] = ["RETURN_VALS", "VOID_METHOD_CALL"];

pub fn default_cos_deny() -> BTreeSet<String> {
    DEFAULT_COS_DENY.iter().map(|s| s.to_string()).collect()
}

/// Seeding mode recorded in a `cms` spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmsInit {
    /// k-means++ distance-weighted seeding.
    PlusPlus,
    /// Run `sms` first and use its selection rows as initial centers.
    FromSms,
}

/// One step of a `pipe` strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineStep {
    /// Drop every mutant with this operator label.
    DropOperator(String),
    /// Drop the mutants of the most frequent operator in the working set.
    DropLargest,
    /// Drop mutants whose label is in the deny set.
    CosFilter(BTreeSet<String>),
    /// Keep a uniform random subset of this size.
    RmsCount(usize),
}

/// Parsed strategy description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    Rms { n: usize },
    Cos { deny: BTreeSet<String>, n: usize },
    Sms,
    Cms { n: usize, init: CmsInit },
    Pipeline { steps: Vec<PipelineStep> },
    Fixed { ids: Vec<String> },
}

fn join_labels(labels: &BTreeSet<String>) -> String {
    labels.iter().cloned().collect::<Vec<_>>().join("|")
}

impl fmt::Display for PipelineStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineStep::DropOperator(label) => write!(f, "drop:{label}"),
            PipelineStep::DropLargest => write!(f, "drop-largest"),
            PipelineStep::CosFilter(deny) => write!(f, "cos:deny={}", join_labels(deny)),
            PipelineStep::RmsCount(n) => write!(f, "rms:n={n}"),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Rms { n } => write!(f, "rms:n={n}"),
            StrategySpec::Cos { deny, n } => write!(f, "cos:deny={},n={n}", join_labels(deny)),
            StrategySpec::Sms => write!(f, "sms"),
            StrategySpec::Cms { n, init } => match init {
                CmsInit::PlusPlus => write!(f, "cms:n={n}"),
                CmsInit::FromSms => write!(f, "cms:n={n},init=sms"),
            },
            StrategySpec::Pipeline { steps } => {
                let rendered: Vec<String> = steps.iter().map(|s| s.to_string()).collect();
                write!(f, "pipe:[{}]", rendered.join(";"))
            }
            StrategySpec::Fixed { ids } => write!(f, "fixed:{}", ids.join("|")),
        }
    }
}

fn parse_count(text: &str, what: &str) -> Result<usize> {
    let n: usize = text
        .parse()
        .map_err(|_| Error::input(format!("{what} must be a positive integer, got `{text}`")))?;
    if n == 0 {
        return Err(Error::input(format!("{what} must be at least 1")));
    }
    Ok(n)
}

fn parse_deny(text: &str) -> BTreeSet<String> {
    if text.is_empty() {
        BTreeSet::new()
    } else {
        text.split('|').map(|s| s.to_string()).collect()
    }
}

fn parse_kv(part: &str) -> Result<(&str, &str)> {
    part.split_once('=')
        .ok_or_else(|| Error::input(format!("expected `key=value`, got `{part}`")))
}

fn parse_cos_args(rest: &str) -> Result<(Option<BTreeSet<String>>, Option<usize>)> {
    let mut deny = None;
    let mut n = None;
    for part in rest.split(',') {
        let (key, value) = parse_kv(part)?;
        match key {
            "deny" => deny = Some(parse_deny(value)),
            "n" => n = Some(parse_count(value, "n")?),
            other => return Err(Error::input(format!("unknown cos argument `{other}`"))),
        }
    }
    Ok((deny, n))
}

fn parse_pipeline_step(text: &str) -> Result<PipelineStep> {
    if text == "drop-largest" {
        return Ok(PipelineStep::DropLargest);
    }
    let (head, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::input(format!("unknown pipeline step `{text}`")))?;
    match head {
        "drop" => {
            if rest.is_empty() {
                return Err(Error::input("drop step needs an operator label"));
            }
            Ok(PipelineStep::DropOperator(rest.to_string()))
        }
        "cos" => {
            let (deny, n) = parse_cos_args(rest)?;
            if n.is_some() {
                return Err(Error::input(
                    "cos used as a pipeline step is a pure filter and takes no n",
                ));
            }
            Ok(PipelineStep::CosFilter(
                deny.unwrap_or_else(default_cos_deny),
            ))
        }
        "rms" => {
            let (key, value) = parse_kv(rest)?;
            if key != "n" {
                return Err(Error::input(format!("unknown rms argument `{key}`")));
            }
            Ok(PipelineStep::RmsCount(parse_count(value, "n")?))
        }
        other => Err(Error::input(format!("unknown pipeline step `{other}`"))),
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "sms" {
            return Ok(StrategySpec::Sms);
        }
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("unknown strategy `{s}`")))?;
        match head {
            "rms" => {
                let (key, value) = parse_kv(rest)?;
                if key != "n" {
                    return Err(Error::input(format!("unknown rms argument `{key}`")));
                }
                Ok(StrategySpec::Rms {
                    n: parse_count(value, "n")?,
                })
            }
            "cos" => {
                let (deny, n) = parse_cos_args(rest)?;
                let n = n.ok_or_else(|| Error::input("cos needs n=<count>"))?;
                Ok(StrategySpec::Cos {
                    deny: deny.unwrap_or_else(default_cos_deny),
                    n,
                })
            }
            "cms" => {
                let mut n = None;
                let mut init = CmsInit::PlusPlus;
                for part in rest.split(',') {
                    let (key, value) = parse_kv(part)?;
                    match key {
                        "n" => n = Some(parse_count(value, "n")?),
                        "init" => {
                            init = match value {
                                "sms" => CmsInit::FromSms,
                                "kmeans++" => CmsInit::PlusPlus,
                                other => {
                                    return Err(Error::input(format!(
                                        "unknown cms init `{other}` (expected sms or kmeans++)"
                                    )))
                                }
                            }
                        }
                        other => {
                            return Err(Error::input(format!("unknown cms argument `{other}`")))
                        }
                    }
                }
                Ok(StrategySpec::Cms {
                    n: n.ok_or_else(|| Error::input("cms needs n=<count>"))?,
                    init,
                })
            }
            "pipe" => {
                let inner = rest
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| Error::input("pipe steps must be wrapped in brackets"))?;
                if inner.is_empty() {
                    return Err(Error::input("pipeline must have at least one step"));
                }
                let steps = inner
                    .split(';')
                    .map(parse_pipeline_step)
                    .collect::<Result<Vec<_>>>()?;
                Ok(StrategySpec::Pipeline { steps })
            }
            "fixed" => {
                if rest.is_empty() {
                    return Err(Error::input("fixed needs at least one mutant id"));
                }
                Ok(StrategySpec::Fixed {
                    ids: rest.split('|').map(|s| s.to_string()).collect(),
                })
            }
            other => Err(Error::input(format!("unknown strategy `{other}`"))),
        }
    }
}

/// A strategy's chosen mutant subset plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    mutants: Vec<usize>,
    spec: StrategySpec,
    seed: u64,
    universe_size: usize,
}

impl Selection {
    fn new(mut mutants: Vec<usize>, spec: StrategySpec, seed: u64, universe_size: usize) -> Self {
        mutants.sort_unstable();
        debug_assert!(mutants.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(!mutants.is_empty());
        Selection {
            mutants,
            spec,
            seed,
            universe_size,
        }
    }

    /// Sorted matrix row indices of the selected mutants.
    pub fn mutants(&self) -> &[usize] {
        &self.mutants
    }

    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }

    pub fn spec(&self) -> &StrategySpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }
}

fn check_universe(universe: &[usize]) -> Result<()> {
    if universe.is_empty() {
        return Err(Error::input("strategy universe is empty"));
    }
    debug_assert!(universe.windows(2).all(|w| w[0] < w[1]));
    Ok(())
}

/// Wraps an explicit mutant choice as a selection, validating it against the
/// universe. `ids` is the textual form kept for provenance.
pub fn select_fixed(universe: &[usize], mutants: &[usize], ids: Vec<String>) -> Result<Selection> {
    check_universe(universe)?;
    if mutants.is_empty() {
        return Err(Error::input("fixed selection must not be empty"));
    }
    let mut picked = mutants.to_vec();
    picked.sort_unstable();
    picked.dedup();
    if picked.len() != mutants.len() {
        return Err(Error::input("duplicate mutant in fixed selection"));
    }
    for m in &picked {
        if universe.binary_search(m).is_err() {
            return Err(Error::input(format!(
                "fixed selection mutant index {m} is outside the covered universe"
            )));
        }
    }
    Ok(Selection::new(
        picked,
        StrategySpec::Fixed { ids },
        0,
        universe.len(),
    ))
}

/// Random mutant selection: a uniform `n`-subset of the universe.
pub fn select_rms(universe: &[usize], n: usize, seed: u64) -> Result<Selection> {
    check_universe(universe)?;
    if n < 1 || n > universe.len() {
        return Err(Error::input(format!(
            "rms n must be in 1..={}, got {n}",
            universe.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let picked = sample_k(&mut rng, universe, n);
    Ok(Selection::new(
        picked,
        StrategySpec::Rms { n },
        seed,
        universe.len(),
    ))
}

fn check_deny_labels(deny: &BTreeSet<String>, operators: &OperatorMap) -> Result<()> {
    for label in deny {
        if !operators.label_set().contains(label) {
            return Err(Error::input(format!(
                "deny label `{label}` is not in the operator map"
            )));
        }
    }
    Ok(())
}

/// Certain operator selection: drop denied-operator mutants, then pick a
/// uniform `n`-subset of the remainder. A remainder smaller than `n` makes
/// the strategy infeasible (callers exclude it from the analysis).
pub fn select_cos(
    universe: &[usize],
    operators: &OperatorMap,
    deny: &BTreeSet<String>,
    n: usize,
    seed: u64,
) -> Result<Selection> {
    check_universe(universe)?;
    if n < 1 {
        return Err(Error::input("cos n must be at least 1"));
    }
    check_deny_labels(deny, operators)?;
    let remaining: Vec<usize> = universe
        .iter()
        .copied()
        .filter(|&m| !deny.contains(operators.label(m)))
        .collect();
    if remaining.len() < n {
        return Err(Error::infeasible(format!(
            "cos leaves {} mutants after the deny filter, fewer than n = {n}",
            remaining.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let picked = sample_k(&mut rng, &remaining, n);
    Ok(Selection::new(
        picked,
        StrategySpec::Cos {
            deny: deny.clone(),
            n,
        },
        seed,
        universe.len(),
    ))
}

/// True when `a` coverage-subsumes `b`: `a` is covered by at least one test
/// and every test covering `a` also covers `b`.
pub fn coverage_subsumes_idx(cover: &CoverageMatrix, a: usize, b: usize) -> bool {
    !cover.row_is_empty(a) && cover.row_subset_of(a, b)
}

/// Id-based form of [`coverage_subsumes_idx`].
pub fn coverage_subsumes(cover: &CoverageMatrix, a: &str, b: &str) -> Result<bool> {
    let ai = cover
        .mutant_index(a)
        .ok_or_else(|| Error::input(format!("unknown mutant id `{a}`")))?;
    let bi = cover
        .mutant_index(b)
        .ok_or_else(|| Error::input(format!("unknown mutant id `{b}`")))?;
    Ok(coverage_subsumes_idx(cover, ai, bi))
}

/// Subsuming mutant selection over the coverage relation.
///
/// Mutants with identical cover sets mutually subsume each other; the class
/// representative with the smallest row index stands in for the class (the
/// raw non-subsumed-set definition would drop duplicated classes entirely).
/// A representative survives unless its cover set strictly contains another
/// representative's. The selection size is fixed by the data.
pub fn select_sms(cover: &CoverageMatrix, universe: &[usize]) -> Result<Selection> {
    check_universe(universe)?;
    for &m in universe {
        if cover.row_is_empty(m) {
            return Err(Error::input(format!(
                "mutant `{}` in the universe has no covering test",
                cover.mutant_id(m)
            )));
        }
    }
    let mut class_reps: HashMap<&[u64], usize> = HashMap::new();
    for &m in universe {
        class_reps.entry(cover.row_key(m)).or_insert(m);
    }
    let mut reps: Vec<usize> = class_reps.into_values().collect();
    reps.sort_unstable();
    let picked: Vec<usize> = reps
        .iter()
        .copied()
        .filter(|&r| {
            !reps
                .iter()
                .any(|&q| q != r && coverage_subsumes_idx(cover, q, r))
        })
        .collect();
    Ok(Selection::new(picked, StrategySpec::Sms, 0, universe.len()))
}

/// Initial centers for [`select_cms`].
#[derive(Debug, Clone, Copy)]
pub enum CmsCenters<'a> {
    /// k-means++ seeding.
    PlusPlus,
    /// Use these mutants' coverage rows as centers; the slice length must
    /// equal `n`.
    Seeded(&'a [usize]),
}

fn coverage_points(cover: &CoverageMatrix, mutants: &[usize]) -> Vec<Vec<f64>> {
    mutants
        .iter()
        .map(|&m| {
            (0..cover.test_count())
                .map(|t| if cover.cell(m, t) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

fn cluster_members(assignment: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (point, &c) in assignment.iter().enumerate() {
        members[c].push(point);
    }
    members
}

fn cms_clusters<R: Rng>(
    cover: &CoverageMatrix,
    universe: &[usize],
    k: usize,
    init: CmsCenters<'_>,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    check_universe(universe)?;
    if k < 1 || k > universe.len() {
        return Err(Error::input(format!(
            "cluster count must be in 1..={}, got {k}",
            universe.len()
        )));
    }
    let points = coverage_points(cover, universe);
    let init_centers = match init {
        CmsCenters::PlusPlus => None,
        CmsCenters::Seeded(centers) => {
            if centers.len() != k {
                return Err(Error::input(format!(
                    "seeded centers must match the cluster count: {} vs {k}",
                    centers.len()
                )));
            }
            Some(coverage_points(cover, centers))
        }
    };
    let assignment = kmeans::cluster(&points, k, init_centers, rng);
    let members = cluster_members(&assignment, k);
    debug_assert!(members.iter().all(|c| !c.is_empty()));
    Ok(members)
}

/// Clustering mutant selection: k-means with `k = n` over the coverage rows,
/// then one uniform random member per cluster.
pub fn select_cms(
    cover: &CoverageMatrix,
    universe: &[usize],
    n: usize,
    init: CmsCenters<'_>,
    seed: u64,
) -> Result<Selection> {
    let mut rng = seeded_rng(seed);
    let members = cms_clusters(cover, universe, n, init, &mut rng)?;
    let picked: Vec<usize> = members
        .iter()
        .map(|cluster| universe[cluster[rng.random_range(0..cluster.len())]])
        .collect();
    let init_spec = match init {
        CmsCenters::PlusPlus => CmsInit::PlusPlus,
        CmsCenters::Seeded(_) => CmsInit::FromSms,
    };
    Ok(Selection::new(
        picked,
        StrategySpec::Cms { n, init: init_spec },
        seed,
        universe.len(),
    ))
}

/// Sweep variant of clustering selection: cluster into a fixed `clusters`
/// count, then draw one random remaining member per cluster in a shuffled
/// round-robin until `n` mutants are selected.
pub fn select_cms_round_robin(
    cover: &CoverageMatrix,
    universe: &[usize],
    clusters: usize,
    n: usize,
    init: CmsCenters<'_>,
    seed: u64,
) -> Result<Selection> {
    if n < 1 || n > universe.len() {
        return Err(Error::input(format!(
            "cms selection size must be in 1..={}, got {n}",
            universe.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut members = cms_clusters(cover, universe, clusters, init, &mut rng)?;
    let mut visit_order: Vec<usize> = (0..clusters).collect();
    for i in 0..visit_order.len() {
        let j = rng.random_range(i..visit_order.len());
        visit_order.swap(i, j);
    }
    let mut picked = Vec::with_capacity(n);
    while picked.len() < n {
        for &c in &visit_order {
            if picked.len() == n {
                break;
            }
            let cluster = &mut members[c];
            if cluster.is_empty() {
                continue;
            }
            let chosen = cluster.swap_remove(rng.random_range(0..cluster.len()));
            picked.push(universe[chosen]);
        }
    }
    let init_spec = match init {
        CmsCenters::PlusPlus => CmsInit::PlusPlus,
        CmsCenters::Seeded(_) => CmsInit::FromSms,
    };
    Ok(Selection::new(
        picked,
        StrategySpec::Cms {
            n: clusters,
            init: init_spec,
        },
        seed,
        universe.len(),
    ))
}

fn largest_operator(working: &[usize], operators: &OperatorMap) -> String {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for &m in working {
        *counts.entry(operators.label(m)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .map(|(label, _)| label.to_string())
        .expect("working set is non-empty")
}

/// Applies pipeline steps in order. A step whose result would leave fewer
/// than `n` mutants is skipped. When the steps end with more than `n`
/// mutants in hand, a final uniform draw trims the set to exactly `n`.
pub fn apply_pipeline(
    steps: &[PipelineStep],
    universe: &[usize],
    operators: Option<&OperatorMap>,
    n: usize,
    seed: u64,
) -> Result<Selection> {
    check_universe(universe)?;
    if steps.is_empty() {
        return Err(Error::input("pipeline must have at least one step"));
    }
    if n < 1 {
        return Err(Error::input("pipeline n must be at least 1"));
    }
    if n > universe.len() {
        return Err(Error::infeasible(format!(
            "pipeline cannot reach {n} mutants from a universe of {}",
            universe.len()
        )));
    }
    let need_operators = steps.iter().any(|s| {
        matches!(
            s,
            PipelineStep::DropOperator(_) | PipelineStep::DropLargest | PipelineStep::CosFilter(_)
        )
    });
    if need_operators && operators.is_none() {
        return Err(Error::input(
            "pipeline uses operator-based steps but no operator map was given",
        ));
    }
    let mut rng = seeded_rng(seed);
    let mut working: Vec<usize> = universe.to_vec();
    for step in steps {
        let candidate: Vec<usize> = match step {
            PipelineStep::DropOperator(label) => {
                let ops = operators.unwrap();
                if !ops.label_set().contains(label) {
                    return Err(Error::input(format!(
                        "drop label `{label}` is not in the operator map"
                    )));
                }
                working
                    .iter()
                    .copied()
                    .filter(|&m| ops.label(m) != label)
                    .collect()
            }
            PipelineStep::DropLargest => {
                let ops = operators.unwrap();
                let label = largest_operator(&working, ops);
                working
                    .iter()
                    .copied()
                    .filter(|&m| ops.label(m) != label)
                    .collect()
            }
            PipelineStep::CosFilter(deny) => {
                let ops = operators.unwrap();
                check_deny_labels(deny, ops)?;
                working
                    .iter()
                    .copied()
                    .filter(|&m| !deny.contains(ops.label(m)))
                    .collect()
            }
            PipelineStep::RmsCount(count) => {
                if *count > working.len() {
                    // Not applicable to the working set; skipped like any
                    // step that would undershoot n.
                    continue;
                }
                sample_k(&mut rng, &working, *count)
            }
        };
        if candidate.len() < n {
            continue;
        }
        working = candidate;
    }
    if working.len() > n {
        working = sample_k(&mut rng, &working, n);
    }
    debug_assert_eq!(working.len(), n);
    Ok(Selection::new(
        working,
        StrategySpec::Pipeline {
            steps: steps.to_vec(),
        },
        seed,
        universe.len(),
    ))
}
