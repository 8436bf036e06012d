use std::collections::HashSet;

use c3::eval::{
    cluster_coverage, fisher_exclusivity_p, fisher_point, pairwise_distances, permutation_baseline,
    ContingencyTable, EvalContext, Statistic, Tail,
};
use c3::ingest::{Catalog, InteractionNetwork, MutationMatrix};
use proptest::prelude::*;

fn matrix(genes: usize, samples: usize, rows: Vec<Vec<bool>>) -> MutationMatrix {
    MutationMatrix::new(
        Catalog::new((0..genes).map(|i| format!("g{i}")).collect()).unwrap(),
        Catalog::new((0..samples).map(|i| format!("s{i}")).collect()).unwrap(),
        rows,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn fisher_tail_is_monotone_and_normalized(n in 1u64..120, row_frac in 0.0f64..=1.0, col_frac in 0.0f64..=1.0) {
        let row = (row_frac * n as f64) as u64;
        let col = (col_frac * n as f64) as u64;
        let lo = col.saturating_sub(n - row);
        let hi = row.min(col);
        let table = |a: u64| ContingencyTable::new(a, row - a, col - a, n + a - row - col);
        let total: f64 = (lo..=hi).map(|a| fisher_point(&table(a))).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut prev = 0.0;
        for a in lo..=hi {
            let p = fisher_exclusivity_p(&table(a));
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert!(p >= prev);
            prev = p;
        }
        prop_assert!((fisher_exclusivity_p(&table(hi)) - 1.0).abs() < 1e-12);
        prop_assert!((fisher_exclusivity_p(&table(lo)) - fisher_point(&table(lo))).abs() < 1e-15);
    }

    #[test]
    fn coverage_grows_with_the_block(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 10), 2..8)) {
        let g = rows.len();
        let m = matrix(g, 10, rows);
        let mut prev = 0.0;
        for k in 1..=g {
            let c = cluster_coverage(&(0..k).collect::<Vec<_>>(), &m);
            prop_assert!((0.0..=1.0).contains(&c) && c >= prev);
            prev = c;
        }
    }

    #[test]
    fn distances_ignore_gene_order(
        edges in prop::collection::vec((0usize..10, 0usize..10), 1..25),
        order in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let named: Vec<(String, String)> = edges
            .iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (format!("g{a}"), format!("g{b}")))
            .collect();
        prop_assume!(!named.is_empty());
        let net = InteractionNetwork::from_edges(&named).unwrap();
        let genes: Vec<String> = (0..12).map(|i| format!("g{i}")).collect();
        let shuffled: Vec<String> = order.iter().map(|&i| genes[i].clone()).collect();
        let a = pairwise_distances(&genes, &net);
        let b = pairwise_distances(&shuffled, &net);
        prop_assert_eq!(a.pairs, b.pairs);
        prop_assert_eq!(a.excluded, b.excluded);
        prop_assert_eq!(a.mean, b.mean);
    }
}

#[test]
fn distance_baseline_matches_exact_expectation() {
    // path g0 - g1 - g2 - g3 - g4: pair distances 1 x4, 2 x3, 3 x2, 4 x1
    let edges = [("g0", "g1"), ("g1", "g2"), ("g2", "g3"), ("g3", "g4")];
    let net = InteractionNetwork::from_edges(&edges).unwrap();
    let m = matrix(5, 3, vec![vec![true, false, false]; 5]);
    let ctx = EvalContext { mutations: &m, network: Some(&net), drivers: None, tail: Tail::Left };
    let expected: f64 = (4.0 * 1.0 + 3.0 * 2.0 + 2.0 * 3.0 + 4.0) / 10.0;
    let second = (4.0 * 1.0 + 3.0 * 4.0 + 2.0 * 9.0 + 16.0) / 10.0;
    let sd = (second - expected * expected).sqrt();
    let trials = 20_000;
    let b = permutation_baseline(&ctx, &[vec![0, 4]], Statistic::Distance, trials, 3).unwrap().unwrap();
    assert_eq!(b.observed, 4.0);
    assert!((b.mean - expected).abs() <= 4.0 * sd / (trials as f64).sqrt(), "{} vs {expected}", b.mean);
    // nothing is farther than the observed pair: every draw is at least as close
    assert_eq!(b.p_value, 1.0);
}

#[test]
fn constant_statistic_gives_unit_p_value() {
    let m = matrix(6, 4, vec![vec![true, true, true, true]; 6]);
    let drivers: HashSet<String> = (0..6).map(|i| format!("g{i}")).collect();
    let ctx = EvalContext { mutations: &m, network: None, drivers: Some(&drivers), tail: Tail::Left };
    for stat in [Statistic::Coverage, Statistic::DriverProportion] {
        let b = permutation_baseline(&ctx, &[vec![0, 1], vec![2]], stat, 50, 1).unwrap().unwrap();
        assert_eq!(b.p_value, 1.0);
        assert_eq!(b.mean, b.observed);
    }
    assert!(permutation_baseline(&ctx, &[vec![0, 1]], Statistic::Coverage, 0, 1).is_err());
}
