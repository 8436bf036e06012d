use c3::rounding::Clustering;
use c3::synth::{compare_clusterings, make_planted, make_random, Level};
use proptest::prelude::*;

#[test]
fn multinomial_frequencies_within_three_sigma() {
    let levels: Vec<Level> = (1..=9).map(|i| Level { value: i as f64 / 10.0, probability: 1.0 }).collect();
    // 142 vertices give 10011 pairs
    let w = make_random(142, &levels, 5).unwrap();
    let mut counts = [0usize; 9];
    let mut draws = 0usize;
    for (u, v) in w.pairs() {
        let idx = (w.plus(u, v) * 10.0).round() as usize - 1;
        counts[idx] += 1;
        draws += 1;
        assert!((w.plus(u, v) + w.minus(u, v) - 1.0).abs() < 1e-15);
    }
    assert!(draws >= 10_000);
    let p = 1.0 / 9.0;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - mean).abs() <= 3.0 * sigma, "count {c}, expected {mean} +- {sigma}");
    }
}

#[test]
fn random_instances_are_reproducible() {
    let levels = [Level { value: 0.2, probability: 0.5 }, Level { value: 0.8, probability: 0.5 }];
    assert_eq!(make_random(9, &levels, 4).unwrap(), make_random(9, &levels, 4).unwrap());
    assert_ne!(make_random(9, &levels, 4).unwrap(), make_random(9, &levels, 5).unwrap());
}

proptest! {
    #[test]
    fn comparison_is_symmetric_and_label_invariant(
        a in prop::collection::vec(0usize..5, 1..20),
        shift in 1usize..50,
        b_seed in prop::collection::vec(0usize..5, 20),
    ) {
        let n = a.len();
        let b: Vec<usize> = b_seed[..n].to_vec();
        let ca = Clustering::from_labels(&a);
        let cb = Clustering::from_labels(&b);
        let relabeled = Clustering::from_labels(&a.iter().map(|l| (l * 7 + shift) % 97).collect::<Vec<_>>());
        let ab = compare_clusterings(&ca, &cb).unwrap();
        prop_assert_eq!(ab, compare_clusterings(&cb, &ca).unwrap());
        prop_assert_eq!(ab, compare_clusterings(&relabeled, &cb).unwrap());
        prop_assert!(ab.overlap > 0.0 && ab.overlap <= 1.0);
        prop_assert_eq!(ab.exact_match, ab.overlap == 1.0);
        let same = compare_clusterings(&ca, &relabeled).unwrap();
        prop_assert!(same.exact_match && same.overlap == 1.0);
    }

    #[test]
    fn planted_weights_are_probabilities(gamma in 0.51f64..0.99, flips in 0usize..40, seed in any::<u64>()) {
        let inst = make_planted(&[4, 5, 3], gamma, flips, seed).unwrap();
        prop_assert_eq!(inst.flips.len(), flips);
        for (u, v) in inst.weights.pairs() {
            let (p, m) = (inst.weights.plus(u, v), inst.weights.minus(u, v));
            prop_assert!((p + m - 1.0).abs() < 1e-15 && (0.0..=1.0).contains(&p));
            let flipped = inst.flips.contains(&(u, v));
            let inside = inst.truth.same_block(u, v);
            let expect = if inside != flipped { gamma } else { 1.0 - gamma };
            prop_assert!((p - expect).abs() < 1e-15);
        }
    }
}
