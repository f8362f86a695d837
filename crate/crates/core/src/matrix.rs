//! Boolean mutant-by-test relation matrices and test-suite manipulation.
//!
//! A [`RelationMatrix`] stores one bit per (mutant, test) pair in packed
//! 64-bit words, row per mutant. The same representation serves two roles:
//! a kill matrix (`kill(m, t) = 1` when test `t` kills mutant `m`) and a
//! coverage matrix (`cover(m, t) = 1` when `t` executes the mutated
//! statement). Killing implies covering, so a kill matrix paired with a
//! coverage matrix over the same ids must be cell-wise dominated by it;
//! [`verify_kill_implies_cover`] checks that pairing invariant.
//!
//! Mutation scores along a nested suite chain are compared through killed
//! *counts*, never through floating-point scores, so score order decisions
//! are exact.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::sample_k;

/// Boolean relation between mutants (rows) and tests (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMatrix {
    mutant_ids: Vec<String>,
    test_ids: Vec<String>,
    mutant_index: HashMap<String, usize>,
    test_index: HashMap<String, usize>,
    words_per_row: usize,
    bits: Vec<u64>,
}

/// A relation matrix read as `kill(m, t)`.
pub type KillMatrix = RelationMatrix;
/// A relation matrix read as `cover(m, t)`.
pub type CoverageMatrix = RelationMatrix;

fn index_ids(kind: &str, ids: &[String]) -> Result<HashMap<String, usize>> {
    if ids.is_empty() {
        return Err(Error::input(format!("{kind} id list must be non-empty")));
    }
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() {
            return Err(Error::input(format!("{kind} id at position {i} is empty")));
        }
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::input(format!("duplicate {kind} id `{id}`")));
        }
    }
    Ok(index)
}

impl RelationMatrix {
    /// Builds a matrix from per-mutant boolean rows.
    pub fn from_rows(
        mutant_ids: Vec<String>,
        test_ids: Vec<String>,
        rows: &[Vec<bool>],
    ) -> Result<Self> {
        let mutant_index = index_ids("mutant", &mutant_ids)?;
        let test_index = index_ids("test", &test_ids)?;
        if rows.len() != mutant_ids.len() {
            return Err(Error::input(format!(
                "expected {} rows, got {}",
                mutant_ids.len(),
                rows.len()
            )));
        }
        let words_per_row = test_ids.len().div_ceil(64);
        let mut bits = vec![0u64; words_per_row * mutant_ids.len()];
        for (m, row) in rows.iter().enumerate() {
            if row.len() != test_ids.len() {
                return Err(Error::input(format!(
                    "row for mutant `{}` has {} cells, expected {}",
                    mutant_ids[m],
                    row.len(),
                    test_ids.len()
                )));
            }
            for (t, &cell) in row.iter().enumerate() {
                if cell {
                    bits[m * words_per_row + t / 64] |= 1u64 << (t % 64);
                }
            }
        }
        Ok(RelationMatrix {
            mutant_ids,
            test_ids,
            mutant_index,
            test_index,
            words_per_row,
            bits,
        })
    }

    pub fn mutant_count(&self) -> usize {
        self.mutant_ids.len()
    }

    pub fn test_count(&self) -> usize {
        self.test_ids.len()
    }

    pub fn mutant_ids(&self) -> &[String] {
        &self.mutant_ids
    }

    pub fn test_ids(&self) -> &[String] {
        &self.test_ids
    }

    pub fn mutant_id(&self, m: usize) -> &str {
        &self.mutant_ids[m]
    }

    pub fn mutant_index(&self, id: &str) -> Option<usize> {
        self.mutant_index.get(id).copied()
    }

    pub fn test_index(&self, id: &str) -> Option<usize> {
        self.test_index.get(id).copied()
    }

    pub fn cell(&self, m: usize, t: usize) -> bool {
        self.bits[m * self.words_per_row + t / 64] >> (t % 64) & 1 == 1
    }

    fn row(&self, m: usize) -> &[u64] {
        &self.bits[m * self.words_per_row..(m + 1) * self.words_per_row]
    }

    /// True when mutant `m` relates to no test at all.
    pub fn row_is_empty(&self, m: usize) -> bool {
        self.row(m).iter().all(|&w| w == 0)
    }

    /// True when every test related to `a` is also related to `b`.
    pub fn row_subset_of(&self, a: usize, b: usize) -> bool {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .all(|(&wa, &wb)| wa & !wb == 0)
    }

    pub fn rows_equal(&self, a: usize, b: usize) -> bool {
        self.row(a) == self.row(b)
    }

    pub(crate) fn row_key(&self, m: usize) -> &[u64] {
        self.row(m)
    }

    /// Maps mutant ids to row indices, rejecting unknown ids.
    pub fn mutant_indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                self.mutant_index(id.as_ref())
                    .ok_or_else(|| Error::input(format!("unknown mutant id `{}`", id.as_ref())))
            })
            .collect()
    }

    /// The suite containing every test column.
    pub fn full_suite(&self) -> TestSuite {
        TestSuite {
            indices: (0..self.test_count()).collect(),
        }
    }

    /// Builds a suite from test ids. Duplicates and unknown ids are input
    /// errors; an empty list yields the (explicitly allowed) empty suite,
    /// which kills nothing.
    pub fn suite_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<TestSuite> {
        let mut seen = BTreeSet::new();
        for id in ids {
            let idx = self
                .test_index(id.as_ref())
                .ok_or_else(|| Error::input(format!("unknown test id `{}`", id.as_ref())))?;
            if !seen.insert(idx) {
                return Err(Error::input(format!(
                    "duplicate test id `{}` in suite",
                    id.as_ref()
                )));
            }
        }
        Ok(TestSuite {
            indices: seen.into_iter().collect(),
        })
    }

    fn suite_mask(&self, suite: &TestSuite) -> Vec<u64> {
        let mut mask = vec![0u64; self.words_per_row];
        for &t in &suite.indices {
            assert!(t < self.test_count(), "suite index out of range");
            mask[t / 64] |= 1u64 << (t % 64);
        }
        mask
    }

    fn row_hits(&self, m: usize, mask: &[u64]) -> bool {
        self.row(m).iter().zip(mask).any(|(&w, &s)| w & s != 0)
    }

    /// Number of mutants related to at least one test of `suite`.
    pub fn killed_count(&self, suite: &TestSuite) -> usize {
        let mask = self.suite_mask(suite);
        (0..self.mutant_count())
            .filter(|&m| self.row_hits(m, &mask))
            .count()
    }

    /// Killed count restricted to the given mutant rows.
    pub fn killed_count_within(&self, mutants: &[usize], suite: &TestSuite) -> usize {
        let mask = self.suite_mask(suite);
        mutants.iter().filter(|&&m| self.row_hits(m, &mask)).count()
    }

    /// Mutation score `|KM(M, T)| / |M|`.
    ///
    /// The denominator is every mutant in the matrix; unkillable mutants are
    /// deliberately not filtered out. The empty suite kills nothing and
    /// scores 0.
    pub fn mutation_score(&self, suite: &TestSuite) -> f64 {
        self.killed_count(suite) as f64 / self.mutant_count() as f64
    }

    /// Row indices of the mutants killed by `suite`, ascending.
    pub fn killed_mutants(&self, suite: &TestSuite) -> Vec<usize> {
        let mask = self.suite_mask(suite);
        (0..self.mutant_count())
            .filter(|&m| self.row_hits(m, &mask))
            .collect()
    }

    /// Row-filtered copy keeping the given mutants. Rows keep the original
    /// matrix order regardless of the order of `mutants`; test columns are
    /// untouched.
    pub fn restrict(&self, mutants: &[usize]) -> Result<RelationMatrix> {
        if mutants.is_empty() {
            return Err(Error::input("cannot restrict to an empty mutant set"));
        }
        let mut picked = mutants.to_vec();
        picked.sort_unstable();
        picked.dedup();
        if picked.len() != mutants.len() {
            return Err(Error::input("duplicate mutant index in restriction"));
        }
        if let Some(&bad) = picked.iter().find(|&&m| m >= self.mutant_count()) {
            return Err(Error::input(format!("mutant index {bad} out of range")));
        }
        let mutant_ids: Vec<String> = picked.iter().map(|&m| self.mutant_ids[m].clone()).collect();
        let mutant_index = index_ids("mutant", &mutant_ids)?;
        let mut bits = Vec::with_capacity(picked.len() * self.words_per_row);
        for &m in &picked {
            bits.extend_from_slice(self.row(m));
        }
        Ok(RelationMatrix {
            mutant_ids,
            test_ids: self.test_ids.clone(),
            mutant_index,
            test_index: self.test_index.clone(),
            words_per_row: self.words_per_row,
            bits,
        })
    }

    /// Checks that `other` has identical mutant and test id sequences.
    pub fn verify_same_ids(&self, other: &RelationMatrix) -> Result<()> {
        if self.mutant_ids != other.mutant_ids {
            return Err(Error::input("mutant id lists differ between matrices"));
        }
        if self.test_ids != other.test_ids {
            return Err(Error::input("test id lists differ between matrices"));
        }
        Ok(())
    }
}

/// Checks the pairing invariant `kill(m, t) = 1 => cover(m, t) = 1`.
pub fn verify_kill_implies_cover(kill: &KillMatrix, cover: &CoverageMatrix) -> Result<()> {
    kill.verify_same_ids(cover)?;
    for m in 0..kill.mutant_count() {
        for (w, (&kw, &cw)) in kill.row(m).iter().zip(cover.row(m)).enumerate() {
            let violation = kw & !cw;
            if violation != 0 {
                let t = w * 64 + violation.trailing_zeros() as usize;
                return Err(Error::input(format!(
                    "kill({}, {}) = 1 but the pair is uncovered",
                    kill.mutant_ids[m], kill.test_ids[t]
                )));
            }
        }
    }
    Ok(())
}

/// Mutants with at least one covering test. This is the universe every
/// reduction strategy selects from; uncovered mutants never execute.
pub fn filter_uncovered(kill: &KillMatrix, cover: &CoverageMatrix) -> Result<Vec<usize>> {
    kill.verify_same_ids(cover)?;
    Ok((0..cover.mutant_count())
        .filter(|&m| !cover.row_is_empty(m))
        .collect())
}

/// `|KM(M, T) ∩ S| / |S|`: mutation score of the reduced set, counted
/// directly over the subset rows without materializing a restricted matrix.
pub fn score_subset(matrix: &RelationMatrix, subset: &[usize], suite: &TestSuite) -> f64 {
    assert!(!subset.is_empty(), "score_subset needs a non-empty subset");
    matrix.killed_count_within(subset, suite) as f64 / subset.len() as f64
}

/// A set of test columns of one matrix, held as sorted unique indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSuite {
    indices: Vec<usize>,
}

impl TestSuite {
    pub(crate) fn from_sorted_indices(indices: Vec<usize>) -> TestSuite {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        TestSuite { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, t: usize) -> bool {
        self.indices.binary_search(&t).is_ok()
    }

    pub fn is_subset_of(&self, other: &TestSuite) -> bool {
        self.indices.iter().all(|t| other.contains(*t))
    }

    /// Test ids of this suite in the matrix's column order.
    pub fn ids<'a>(&self, matrix: &'a RelationMatrix) -> Vec<&'a str> {
        self.indices
            .iter()
            .map(|&t| matrix.test_ids()[t].as_str())
            .collect()
    }
}

/// Score-order relation between a suite and one of its proper subsets.
/// Removing tests can only lose kills, so `Lt` cannot occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Gt,
    Eq,
}

/// A strictly nested suite sequence `T_0 ⊃ T_1 ⊃ ... ⊃ T_k` where each suite
/// has floor(half) the size of its predecessor and `|T_k| = 1`. The number
/// of adjacent comparisons is `k = floor(log2 |T_0|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteChain {
    suites: Vec<TestSuite>,
}

impl SuiteChain {
    pub fn new(suites: Vec<TestSuite>) -> Result<Self> {
        if suites.len() < 2 {
            return Err(Error::domain(
                "a suite chain needs at least two suites (|T_0| >= 2)",
            ));
        }
        for pair in suites.windows(2) {
            let (outer, inner) = (&pair[0], &pair[1]);
            if inner.len() != outer.len() / 2 {
                return Err(Error::input(format!(
                    "chain sizes must halve (rounding down): {} after {}",
                    inner.len(),
                    outer.len()
                )));
            }
            if !inner.is_subset_of(outer) {
                return Err(Error::input(
                    "each chain suite must nest in its predecessor",
                ));
            }
        }
        if suites.last().unwrap().len() != 1 {
            return Err(Error::input("a suite chain must end at a single test"));
        }
        Ok(SuiteChain { suites })
    }

    /// Number of adjacent comparisons, `floor(log2 |T_0|)`.
    pub fn k(&self) -> usize {
        self.suites.len() - 1
    }

    pub fn suites(&self) -> &[TestSuite] {
        &self.suites
    }
}

/// Draws a half-sample chain: starting from `suite`, repeatedly keep a
/// uniformly random floor(half)-size subset until one test remains.
pub fn half_sample_chain<R: Rng>(suite: &TestSuite, rng: &mut R) -> Result<SuiteChain> {
    if suite.len() < 2 {
        return Err(Error::domain(
            "half-sampling needs at least two tests; a single-test suite has no comparisons",
        ));
    }
    let mut suites = vec![suite.clone()];
    let mut current = suite.indices.clone();
    while current.len() > 1 {
        current = sample_k(rng, &current, current.len() / 2);
        suites.push(TestSuite::from_sorted_indices(current.clone()));
    }
    SuiteChain::new(suites)
}

/// Score-order signs along a chain: element `i` relates `T_i` to `T_{i+1}`.
/// Comparisons use killed counts, so they are exact.
pub fn sign_sequence(matrix: &RelationMatrix, chain: &SuiteChain) -> Vec<Sign> {
    let counts: Vec<usize> = chain
        .suites()
        .iter()
        .map(|s| matrix.killed_count(s))
        .collect();
    counts
        .windows(2)
        .map(|w| {
            assert!(w[0] >= w[1], "mutation score increased when removing tests");
            if w[0] > w[1] {
                Sign::Gt
            } else {
                Sign::Eq
            }
        })
        .collect()
}

/// Thins a suite to its odd positions (0-based) in column order, deleting
/// the even-position tests. `[t1, t2, t3, t4]` keeps `{t2, t4}`.
pub fn thin_even_index(suite: &TestSuite) -> Result<TestSuite> {
    if suite.len() < 2 {
        return Err(Error::domain(
            "thinning a suite with fewer than two tests would leave it empty",
        ));
    }
    Ok(TestSuite::from_sorted_indices(
        suite
            .indices
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % 2 == 1)
            .map(|(_, &t)| t)
            .collect(),
    ))
}

/// Operator labels aligned to a matrix's mutant rows. Every mutant has
/// exactly one label.
#[derive(Debug, Clone)]
pub struct OperatorMap {
    labels: Vec<String>,
    label_set: BTreeSet<String>,
}

impl OperatorMap {
    /// Builds the map from `(mutant_id, label)` pairs, requiring exactly one
    /// label per matrix mutant and no unknown ids.
    pub fn from_pairs<S: AsRef<str>, L: AsRef<str>>(
        pairs: &[(S, L)],
        matrix: &RelationMatrix,
    ) -> Result<Self> {
        let mut labels: Vec<Option<String>> = vec![None; matrix.mutant_count()];
        for (id, label) in pairs {
            let m = matrix.mutant_index(id.as_ref()).ok_or_else(|| {
                Error::input(format!("operator row for unknown mutant `{}`", id.as_ref()))
            })?;
            if label.as_ref().is_empty() {
                return Err(Error::input(format!(
                    "empty operator label for mutant `{}`",
                    id.as_ref()
                )));
            }
            if labels[m].replace(label.as_ref().to_string()).is_some() {
                return Err(Error::input(format!(
                    "mutant `{}` labeled more than once",
                    id.as_ref()
                )));
            }
        }
        let labels: Vec<String> = labels
            .into_iter()
            .enumerate()
            .map(|(m, l)| {
                l.ok_or_else(|| {
                    Error::input(format!(
                        "mutant `{}` has no operator label",
                        matrix.mutant_id(m)
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let label_set = labels.iter().cloned().collect();
        Ok(OperatorMap { labels, label_set })
    }

    pub fn label(&self, m: usize) -> &str {
        &self.labels[m]
    }

    pub fn label_set(&self) -> &BTreeSet<String> {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
