//! Reduction evaluation indicators.
//!
//! Baseline indicators: mutation score variation (`VMS`, `AVG_VMS`),
//! strategy effectiveness (`ES`), and reduction ratio (`RR`). Order
//! preservation indicators: `OP` over random half-sample chains, its
//! effort-aware relative form `EROP`, the unnested-pair variant `NOP`, and
//! the exhaustive remove-one-test oracle (`ORACLE_OP`) that checks every
//! subset pair directly.
//!
//! Score-order comparisons go through killed counts and are exact. One
//! direction of sign change is impossible: if the full mutant set cannot
//! distinguish two nested suites, no subset can. That fact is asserted at
//! computation time.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{half_sample_chain, KillMatrix, SuiteChain, TestSuite};
use crate::sampling::sample_k;

/// Labels for reported indicator values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indicator {
    Ms,
    Vms,
    AvgVms,
    Es,
    Rr,
    Op,
    Erop,
    Nop,
    OracleOp,
}

impl Indicator {
    pub const ALL: [Indicator; 9] = [
        Indicator::Ms,
        Indicator::Vms,
        Indicator::AvgVms,
        Indicator::Es,
        Indicator::Rr,
        Indicator::Op,
        Indicator::Erop,
        Indicator::Nop,
        Indicator::OracleOp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Indicator::Ms => "MS",
            Indicator::Vms => "VMS",
            Indicator::AvgVms => "AVG_VMS",
            Indicator::Es => "ES",
            Indicator::Rr => "RR",
            Indicator::Op => "OP",
            Indicator::Erop => "EROP",
            Indicator::Nop => "NOP",
            Indicator::OracleOp => "ORACLE_OP",
        }
    }

    /// Ranking direction: score-variation indicators are better when small,
    /// everything else when large.
    pub fn higher_is_better(&self) -> bool {
        !matches!(self, Indicator::Vms | Indicator::AvgVms)
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Indicator::ALL
            .iter()
            .find(|i| i.as_str() == upper)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown indicator label `{s}`")))
    }
}

/// One indicator value for one strategy repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    pub strategy: String,
    pub rep: usize,
    pub indicator: Indicator,
    pub value: f64,
    pub seed: u64,
}

impl IndicatorReport {
    pub const CSV_HEADER: &'static str = "strategy,rep,indicator,value,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.strategy, self.rep, self.indicator, self.value, self.seed
        )
    }
}

/// Reduction ratio `(|M| - |M_s|) / |M|`.
pub fn rr(mutant_count: usize, selected_count: usize) -> f64 {
    assert!(selected_count >= 1, "selection must be non-empty");
    assert!(
        selected_count <= mutant_count,
        "selection exceeds mutant set"
    );
    (mutant_count - selected_count) as f64 / mutant_count as f64
}

/// Variation of mutation score `|MS(M, T) - MS(M_s, T)|` on one suite.
pub fn vms(kill: &KillMatrix, selection: &[usize], suite: &TestSuite) -> f64 {
    (kill.mutation_score(suite) - crate::matrix::score_subset(kill, selection, suite)).abs()
}

/// Mean of [`vms`] over every suite of every chain, the original suite
/// included.
pub fn avg_vms(kill: &KillMatrix, selection: &[usize], chains: &[SuiteChain]) -> f64 {
    assert!(!chains.is_empty(), "avg_vms needs at least one chain");
    let mut sum = 0.0;
    let mut count = 0usize;
    for chain in chains {
        for suite in chain.suites() {
            sum += vms(kill, selection, suite);
            count += 1;
        }
    }
    sum / count as f64
}

/// Absolute and relative strategy effectiveness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effectiveness {
    /// `|KM(M, T_s)| / |KM(M, T)|` where `T_s` are the suite tests that kill
    /// at least one selected mutant.
    pub absolute: f64,
    /// `absolute` minus the mean absolute effectiveness of size-matched
    /// uniform random selections from the same universe.
    pub relative: f64,
}

fn killing_tests(kill: &KillMatrix, selection: &[usize], suite: &TestSuite) -> TestSuite {
    let picked: Vec<usize> = suite
        .indices()
        .iter()
        .copied()
        .filter(|&t| selection.iter().any(|&m| kill.cell(m, t)))
        .collect();
    TestSuite::from_sorted_indices(picked)
}

fn absolute_effectiveness(
    kill: &KillMatrix,
    selection: &[usize],
    suite: &TestSuite,
    killed_full: usize,
) -> f64 {
    let ts = killing_tests(kill, selection, suite);
    kill.killed_count(&ts) as f64 / killed_full as f64
}

/// Strategy effectiveness of a selection on one suite.
///
/// The random baseline draws `baseline_reps` selections of equal size from
/// `universe`, matching how a random reduction strategy would select.
pub fn strategy_effectiveness<R: Rng>(
    kill: &KillMatrix,
    selection: &[usize],
    universe: &[usize],
    suite: &TestSuite,
    baseline_reps: usize,
    rng: &mut R,
) -> Result<Effectiveness> {
    if baseline_reps == 0 {
        return Err(Error::input(
            "strategy effectiveness needs at least one baseline repetition",
        ));
    }
    let killed_full = kill.killed_count(suite);
    if killed_full == 0 {
        return Err(Error::domain(
            "strategy effectiveness is undefined when the suite kills nothing",
        ));
    }
    if selection.len() > universe.len() {
        return Err(Error::input("selection larger than its universe"));
    }
    let absolute = absolute_effectiveness(kill, selection, suite, killed_full);
    let mut baseline_sum = 0.0;
    for _ in 0..baseline_reps {
        let random_sel = sample_k(rng, universe, selection.len());
        baseline_sum += absolute_effectiveness(kill, &random_sel, suite, killed_full);
    }
    let relative = absolute - baseline_sum / baseline_reps as f64;
    Ok(Effectiveness { absolute, relative })
}

/// Order preservation of a selection along one chain: `1 - |X| / k`, where
/// `X` collects the indices whose sign collapsed from `>` to `=` under the
/// reduced set.
pub fn op_single_chain(kill: &KillMatrix, selection: &[usize], chain: &SuiteChain) -> f64 {
    let full: Vec<usize> = chain
        .suites()
        .iter()
        .map(|s| kill.killed_count(s))
        .collect();
    let reduced: Vec<usize> = chain
        .suites()
        .iter()
        .map(|s| kill.killed_count_within(selection, s))
        .collect();
    let k = chain.k();
    let mut changed = 0usize;
    for i in 0..k {
        let full_gt = full[i] > full[i + 1];
        let reduced_gt = reduced[i] > reduced[i + 1];
        // Equal-sign propagation: a suite pair the full set cannot
        // distinguish cannot be distinguished by any subset.
        assert!(
            full_gt || !reduced_gt,
            "sign flipped from = to > under reduction"
        );
        if full_gt && !reduced_gt {
            changed += 1;
        }
    }
    1.0 - changed as f64 / k as f64
}

/// Mean [`op_single_chain`] over `reps` freshly drawn half-sample chains.
/// Returns the mean and the per-chain values.
pub fn op_mean<R: Rng>(
    kill: &KillMatrix,
    selection: &[usize],
    suite: &TestSuite,
    reps: usize,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    if reps == 0 {
        return Err(Error::input("op_mean needs at least one repetition"));
    }
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let chain = half_sample_chain(suite, rng)?;
        values.push(op_single_chain(kill, selection, &chain));
    }
    Ok((values.iter().sum::<f64>() / reps as f64, values))
}

/// One paired EROP repetition: `RR * (OP(S, chain) - OP(baseline, chain))`
/// with the selection and its size-matched random baseline evaluated on the
/// same chain.
pub fn erop_term(
    kill: &KillMatrix,
    selection: &[usize],
    baseline: &[usize],
    chain: &SuiteChain,
) -> f64 {
    debug_assert_eq!(selection.len(), baseline.len());
    rr(kill.mutant_count(), selection.len())
        * (op_single_chain(kill, selection, chain) - op_single_chain(kill, baseline, chain))
}

/// Effort-aware relative order preservation `RR * (OP(S) - OP(random))`.
///
/// The design is paired: each repetition draws one chain and evaluates both
/// the selection and a fresh size-matched random selection from `universe`
/// on it.
pub fn erop<R: Rng>(
    kill: &KillMatrix,
    selection: &[usize],
    universe: &[usize],
    suite: &TestSuite,
    reps: usize,
    rng: &mut R,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::input("erop needs at least one repetition"));
    }
    if selection.len() > universe.len() {
        return Err(Error::input("selection larger than its universe"));
    }
    let mut sum = 0.0;
    for _ in 0..reps {
        let chain = half_sample_chain(suite, rng)?;
        let random_sel = sample_k(rng, universe, selection.len());
        sum += erop_term(kill, selection, &random_sel, &chain);
    }
    Ok(sum / reps as f64)
}

fn sample_nonempty_subset<R: Rng>(suite: &TestSuite, rng: &mut R) -> Vec<usize> {
    loop {
        let picked: Vec<usize> = suite
            .indices()
            .iter()
            .copied()
            .filter(|_| rng.random::<bool>())
            .collect();
        if !picked.is_empty() {
            return picked;
        }
    }
}

fn order_of(a: usize, b: usize) -> Ordering {
    a.cmp(&b)
}

/// Order preservation over random unnested subset pairs.
///
/// Draws `pairs` ordered pairs of distinct non-empty subsets of `suite`
/// (uniform over non-empty subsets, resampling on equality) and returns the
/// fraction whose `>/=/<` score relation is unchanged under the selection.
pub fn nop<R: Rng>(
    kill: &KillMatrix,
    selection: &[usize],
    suite: &TestSuite,
    pairs: usize,
    rng: &mut R,
) -> Result<f64> {
    if suite.len() < 2 {
        return Err(Error::domain(
            "nop needs at least two tests so that distinct subsets exist",
        ));
    }
    if pairs == 0 {
        return Err(Error::input("nop needs at least one pair"));
    }
    let mut preserved = 0usize;
    for _ in 0..pairs {
        let first = sample_nonempty_subset(suite, rng);
        let second = loop {
            let candidate = sample_nonempty_subset(suite, rng);
            if candidate != first {
                break candidate;
            }
        };
        let s1 = TestSuite::from_sorted_indices(first);
        let s2 = TestSuite::from_sorted_indices(second);
        let before = order_of(kill.killed_count(&s1), kill.killed_count(&s2));
        let after = order_of(
            kill.killed_count_within(selection, &s1),
            kill.killed_count_within(selection, &s2),
        );
        if before == after {
            preserved += 1;
        }
    }
    Ok(preserved as f64 / pairs as f64)
}

/// Default NOP sampling budget: `100 * floor(log2 |suite|)`.
pub fn nop_default_pairs(suite_len: usize) -> usize {
    assert!(suite_len >= 2);
    100 * (usize::BITS - 1 - suite_len.leading_zeros()) as usize
}

/// Outcome of the exhaustive remove-one-test comparison oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    /// `1 - changed / total`.
    pub preserved: f64,
    pub changed: u64,
    pub total: u64,
}

/// Number of remove-one-test comparisons over all subsets of an `n`-test
/// suite: `n * (2^(n-1) - 1)`.
pub fn p_count(n: u32) -> u64 {
    assert!((1..=57).contains(&n), "p_count supports 1 <= n <= 57");
    n as u64 * ((1u64 << (n - 1)) - 1)
}

/// Killed counts for every subset of an up-to-20-test suite, indexed by
/// subset bitmask. Uses a subset-sum sweep over the per-mutant masks:
/// `alive(s)` counts the rows contained in the complement of `s`.
fn subset_killed_counts(row_masks: &[u32], n: u32) -> Vec<u32> {
    let size = 1usize << n;
    let mut contained = vec![0u32; size];
    for &mask in row_masks {
        contained[mask as usize] += 1;
    }
    for bit in 0..n {
        let b = 1usize << bit;
        for s in 0..size {
            if s & b != 0 {
                contained[s] += contained[s ^ b];
            }
        }
    }
    let total = row_masks.len() as u32;
    let full = size - 1;
    (0..size).map(|s| total - contained[full ^ s]).collect()
}

fn suite_local_masks(kill: &KillMatrix, mutants: &[usize], suite: &TestSuite) -> Vec<u32> {
    mutants
        .iter()
        .map(|&m| {
            let mut mask = 0u32;
            for (j, &t) in suite.indices().iter().enumerate() {
                if kill.cell(m, t) {
                    mask |= 1 << j;
                }
            }
            mask
        })
        .collect()
}

/// Exhaustively compares every subset `T1` (|T1| >= 2) of `suite` against
/// each of its remove-one-test subsets, before and after reduction. The
/// comparison count always equals [`p_count`]. Exponential in the suite
/// size, hence the hard cap at 20 tests.
pub fn full_oracle_op(
    kill: &KillMatrix,
    selection: &[usize],
    suite: &TestSuite,
) -> Result<OracleOutcome> {
    let n = suite.len();
    if n < 2 {
        return Err(Error::domain("the oracle needs at least two tests"));
    }
    if n > 20 {
        return Err(Error::resource(format!(
            "exhaustive oracle capped at 20 tests, got {n}; use the sampled OP instead"
        )));
    }
    let all: Vec<usize> = (0..kill.mutant_count()).collect();
    let full_counts = subset_killed_counts(&suite_local_masks(kill, &all, suite), n as u32);
    let sel_counts = subset_killed_counts(&suite_local_masks(kill, selection, suite), n as u32);

    let mut changed = 0u64;
    let mut total = 0u64;
    for t1 in 1usize..(1 << n) {
        if t1.count_ones() < 2 {
            continue;
        }
        let mut bits = t1;
        while bits != 0 {
            let bit = bits & bits.wrapping_neg();
            bits ^= bit;
            let t2 = t1 ^ bit;
            total += 1;
            let full_gt = full_counts[t1] > full_counts[t2];
            let sel_gt = sel_counts[t1] > sel_counts[t2];
            assert!(
                full_gt || !sel_gt,
                "sign flipped from = to > under reduction"
            );
            if full_gt != sel_gt {
                changed += 1;
            }
        }
    }
    debug_assert_eq!(total, p_count(n as u32));
    Ok(OracleOutcome {
        preserved: 1.0 - changed as f64 / total as f64,
        changed,
        total,
    })
}
