//! Property tests for the matrix model, strategies, and ranking.

use std::collections::BTreeSet;

use proptest::prelude::*;

use mutred_core::csv_io;
use mutred_core::indicators::op_single_chain;
use mutred_core::matrix::{half_sample_chain, score_subset, sign_sequence, RelationMatrix, Sign};
use mutred_core::ranking::{scott_knott_esd, SkConfig};
use mutred_core::sampling::{sample_k, seeded_rng};
use mutred_core::strategy::{
    coverage_subsumes_idx, select_rms, select_sms, CmsInit, PipelineStep, StrategySpec,
};

fn build_matrix(rows: Vec<Vec<bool>>) -> RelationMatrix {
    let mutants = rows.len();
    let tests = rows[0].len();
    RelationMatrix::from_rows(
        (0..mutants).map(|i| format!("m{i}")).collect(),
        (0..tests).map(|i| format!("t{i}")).collect(),
        &rows,
    )
    .unwrap()
}

fn matrix_strategy(max_mutants: usize, max_tests: usize) -> impl Strategy<Value = RelationMatrix> {
    (1..=max_mutants, 1..=max_tests).prop_flat_map(|(m, t)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), t), m).prop_map(build_matrix)
    })
}

/// Matrix plus two nested random suites (indices of the inner are a subset
/// of the outer).
fn matrix_with_nested_suites() -> impl Strategy<Value = (RelationMatrix, Vec<usize>, Vec<usize>)> {
    matrix_strategy(10, 10).prop_flat_map(|m| {
        let t = m.test_count();
        (
            Just(m),
            prop::collection::btree_set(0..t, 0..=t),
            any::<u64>(),
        )
            .prop_map(|(m, outer, seed)| {
                let outer: Vec<usize> = outer.into_iter().collect();
                let mut rng = seeded_rng(seed);
                let inner: Vec<usize> = if outer.is_empty() {
                    Vec::new()
                } else {
                    let size = rng.random_range(0..=outer.len());
                    sample_k(&mut rng, &outer, size)
                };
                (m, outer, inner)
            })
    })
}

fn suite_of(m: &RelationMatrix, indices: &[usize]) -> mutred_core::matrix::TestSuite {
    let ids: Vec<&str> = indices.iter().map(|&t| m.test_ids()[t].as_str()).collect();
    m.suite_from_ids(&ids).unwrap()
}

proptest! {
    // Adding tests to a suite never decreases its mutation score.
    #[test]
    fn score_monotonicity((m, outer, inner) in matrix_with_nested_suites()) {
        let outer_suite = suite_of(&m, &outer);
        let inner_suite = suite_of(&m, &inner);
        prop_assert!(m.mutation_score(&inner_suite) <= m.mutation_score(&outer_suite));
    }

    #[test]
    fn killed_set_monotonicity((m, outer, inner) in matrix_with_nested_suites()) {
        let outer_killed = m.killed_mutants(&suite_of(&m, &outer));
        let inner_killed = m.killed_mutants(&suite_of(&m, &inner));
        prop_assert!(inner_killed.iter().all(|x| outer_killed.contains(x)));
    }

    // A suite pair indistinguishable by the full mutant set stays
    // indistinguishable under every subset.
    #[test]
    fn equal_sign_propagation(
        m in matrix_strategy(10, 10),
        chain_seed in any::<u64>(),
        subset_seed in any::<u64>(),
    ) {
        prop_assume!(m.test_count() >= 2);
        let mut rng = seeded_rng(chain_seed);
        let chain = half_sample_chain(&m.full_suite(), &mut rng).unwrap();
        let mut rng = seeded_rng(subset_seed);
        let all: Vec<usize> = (0..m.mutant_count()).collect();
        let size = rng.random_range(1..=all.len());
        let subset = sample_k(&mut rng, &all, size);
        let restricted = m.restrict(&subset).unwrap();
        let full_signs = sign_sequence(&m, &chain);
        let sub_signs = sign_sequence(&restricted, &chain);
        for (full, sub) in full_signs.iter().zip(&sub_signs) {
            if *full == Sign::Eq {
                prop_assert_eq!(*sub, Sign::Eq);
            }
        }
        // op_single_chain re-asserts the same fact internally.
        let _ = op_single_chain(&m, &subset, &chain);
    }

    // Restricted-matrix score equals the direct subset count.
    #[test]
    fn restrict_score_equivalence(
        m in matrix_strategy(10, 10),
        subset_seed in any::<u64>(),
        suite_seed in any::<u64>(),
    ) {
        let mut rng = seeded_rng(subset_seed);
        let all: Vec<usize> = (0..m.mutant_count()).collect();
        let size = rng.random_range(1..=all.len());
        let subset = sample_k(&mut rng, &all, size);
        let mut rng = seeded_rng(suite_seed);
        let tests: Vec<usize> = (0..m.test_count()).collect();
        let picked_size = rng.random_range(0..=tests.len());
        let picked = sample_k(&mut rng, &tests, picked_size);
        let suite = suite_of(&m, &picked);
        let direct = score_subset(&m, &subset, &suite);
        let via_restrict = m.restrict(&subset).unwrap().mutation_score(&suite);
        prop_assert_eq!(direct, via_restrict);
    }

    // Coverage subsumption is a preorder on covered mutants.
    #[test]
    fn subsumption_reflexive_and_transitive(m in matrix_strategy(10, 8)) {
        let n = m.mutant_count();
        for a in 0..n {
            if !m.row_is_empty(a) {
                prop_assert!(coverage_subsumes_idx(&m, a, a));
            }
            for b in 0..n {
                for c in 0..n {
                    if coverage_subsumes_idx(&m, a, b) && coverage_subsumes_idx(&m, b, c) {
                        prop_assert!(coverage_subsumes_idx(&m, a, c));
                    }
                }
            }
        }
    }

    // RMS selections are in-universe, correctly sized, and seed-stable.
    #[test]
    fn rms_selection_contract(
        m in 2..40usize,
        n_frac in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let universe: Vec<usize> = (0..m).collect();
        let n = 1 + ((m - 1) as f64 * n_frac) as usize;
        let a = select_rms(&universe, n, seed).unwrap();
        let b = select_rms(&universe, n, seed).unwrap();
        prop_assert_eq!(a.mutants(), b.mutants());
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.mutants().iter().all(|x| universe.contains(x)));
    }

    // SMS output is a subset of the universe and never empty.
    #[test]
    fn sms_selection_contract(m in matrix_strategy(12, 8)) {
        let covered: Vec<usize> = (0..m.mutant_count())
            .filter(|&i| !m.row_is_empty(i))
            .collect();
        prop_assume!(!covered.is_empty());
        let sel = select_sms(&m, &covered).unwrap();
        prop_assert!(!sel.is_empty());
        prop_assert!(sel.mutants().iter().all(|x| covered.contains(x)));
    }

    // Matrix CSV encoding round-trips.
    #[test]
    fn matrix_csv_round_trip(m in matrix_strategy(10, 10)) {
        let text = csv_io::matrix_to_csv(&m);
        let parsed = csv_io::parse_matrix(&text, "roundtrip").unwrap();
        prop_assert_eq!(parsed, m);
    }

    // Scott-Knott ranks ignore treatment input order.
    #[test]
    fn scott_knott_permutation_invariance(
        seed in any::<u64>(),
        levels in prop::collection::vec(0.0..1.0f64, 2..5),
    ) {
        let mut rng = seeded_rng(seed);
        let samples: Vec<(String, Vec<f64>)> = levels
            .iter()
            .enumerate()
            .map(|(i, &base)| {
                let values: Vec<f64> =
                    (0..20).map(|_| base + rng.random::<f64>() * 0.05).collect();
                (format!("s{i}"), values)
            })
            .collect();
        let forward = scott_knott_esd(&samples, &SkConfig::default()).unwrap();
        let mut shuffled = samples.clone();
        shuffled.reverse();
        let backward = scott_knott_esd(&shuffled, &SkConfig::default()).unwrap();
        for (label, _) in &samples {
            prop_assert_eq!(forward.rank_of(label), backward.rank_of(label));
        }
    }
}

fn arb_labels() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set("[A-Z]{2,6}", 0..3)
}

fn arb_step() -> impl Strategy<Value = PipelineStep> {
    prop_oneof![
        "[A-Z]{2,6}".prop_map(PipelineStep::DropOperator),
        Just(PipelineStep::DropLargest),
        arb_labels().prop_map(PipelineStep::CosFilter),
        (1..50usize).prop_map(PipelineStep::RmsCount),
    ]
}

fn arb_spec() -> impl Strategy<Value = StrategySpec> {
    prop_oneof![
        (1..100usize).prop_map(|n| StrategySpec::Rms { n }),
        (arb_labels(), 1..100usize).prop_map(|(deny, n)| StrategySpec::Cos { deny, n }),
        Just(StrategySpec::Sms),
        (1..100usize, prop::bool::ANY).prop_map(|(n, from_sms)| StrategySpec::Cms {
            n,
            init: if from_sms {
                CmsInit::FromSms
            } else {
                CmsInit::PlusPlus
            },
        }),
        prop::collection::vec(arb_step(), 1..4).prop_map(|steps| StrategySpec::Pipeline { steps }),
        prop::collection::vec("[a-z][a-z0-9]{0,5}", 1..4)
            .prop_map(|ids| StrategySpec::Fixed { ids }),
    ]
}

proptest! {
    // The strategy grammar is round-trippable.
    #[test]
    fn strategy_spec_text_round_trip(spec in arb_spec()) {
        let text = spec.to_string();
        let parsed: StrategySpec = text.parse().unwrap();
        prop_assert_eq!(parsed, spec);
    }
}

/// Chain shapes for suite sizes across the supported range: sizes halve
/// (rounding down) and the comparison count is floor(log2 n).
#[test]
fn half_sample_chain_shape_across_sizes() {
    let mut rng = seeded_rng(123);
    let mut sizes: Vec<usize> = vec![2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 100, 1023, 1024, 10_000];
    for _ in 0..60 {
        sizes.push(rng.random_range(2..=10_000));
    }
    for n in sizes {
        let matrix = RelationMatrix::from_rows(
            vec!["m0".to_string()],
            (0..n).map(|i| format!("t{i}")).collect(),
            &[vec![true; n]],
        )
        .unwrap();
        let chain = half_sample_chain(&matrix.full_suite(), &mut rng).unwrap();
        let expected_k = (usize::BITS - 1 - n.leading_zeros()) as usize;
        assert_eq!(chain.k(), expected_k, "n = {n}");
        let mut size = n;
        for suite in chain.suites() {
            assert_eq!(suite.len(), size, "n = {n}");
            size /= 2;
        }
        assert_eq!(chain.suites().last().unwrap().len(), 1);
    }
}
