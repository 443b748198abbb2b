//! AUC against a brute-force pair count.

use mogen_core::experiment::auc;
use proptest::prelude::*;

/// Share of (positive, negative) pairs ordered correctly, ties counting half.
fn pair_count(labels: &[bool], scores: &[f64]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

fn labelled() -> impl Strategy<Value = (Vec<bool>, Vec<f64>)> {
    // few distinct scores so ties are common
    prop::collection::vec((any::<bool>(), 0i32..8), 0..60)
        .prop_map(|v| v.into_iter().map(|(l, s)| (l, f64::from(s))).unzip())
}

proptest! {
    #[test]
    fn matches_pair_count((labels, scores) in labelled()) {
        match (auc(&labels, &scores), pair_count(&labels, &scores)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}"),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn invariant_under_increasing_maps((labels, scores) in labelled()) {
        let mapped: Vec<f64> = scores.iter().map(|s| (s / 3.0).exp() - 7.0).collect();
        prop_assert_eq!(auc(&labels, &scores), auc(&labels, &mapped));
    }

    #[test]
    fn negating_scores_complements((labels, scores) in labelled()) {
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        if let (Some(a), Some(b)) = (auc(&labels, &scores), auc(&labels, &negated)) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }
}
