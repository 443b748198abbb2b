use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityOptions, Measure, PathAnalysis};
use crate::models::PathModel;
use crate::pathdata::{Node, PathDataset};

/// Test-set ranking of node sequences by one measure, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub measure: Measure,
    pub ranking: Vec<(Vec<Node>, f64)>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    /// Marks the first `ceil(fraction * n)` ranked states as positive.
    pub fn top_labels(&self, fraction: f64) -> Vec<bool> {
        let n = self.ranking.len();
        let positives = (fraction * n as f64).ceil() as usize;
        (0..n).map(|i| i < positives).collect()
    }
}

/// Every distinct contiguous sub-path of length `1..=max_len`, ordered by
/// node ids.
pub fn sub_paths(ds: &PathDataset, max_len: usize) -> Vec<Vec<Node>> {
    let mut out: Vec<Vec<Node>> = ds
        .paths()
        .iter()
        .flat_map(|p| (1..=max_len.min(p.len())).flat_map(move |k| p.nodes.windows(k)))
        .map(<[Node]>::to_vec)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Path-model scores of all sub-paths of the test data up to `k_truth`
/// nodes, sorted descending with ties broken by label order.
pub fn ground_truth(
    test: &PathDataset,
    measure: Measure,
    k_truth: usize,
    options: &CentralityOptions,
) -> GroundTruth {
    let model = PathModel::new(test.clone());
    let analysis = PathAnalysis::new(&model);
    let targets = sub_paths(test, k_truth);
    let scores = analysis.sequence_scores(measure, &targets, options);
    rank(test, measure, targets.into_iter().zip(scores).collect())
}

pub(super) fn rank(ds: &PathDataset, measure: Measure, mut ranking: Vec<(Vec<Node>, f64)>) -> GroundTruth {
    let vocab = ds.vocabulary();
    ranking.sort_by(|(sa, xa), (sb, xb)| {
        xb.total_cmp(xa)
            .then_with(|| vocab.cmp_sequences(sa, sb))
    });
    GroundTruth { measure, ranking }
}

/// What a target without any scored suffix receives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// The minimum of all available scores.
    #[default]
    Minimum,
    /// No prediction; the target is left out of the evaluation.
    Exclude,
}

/// Gives each target the score of its longest suffix present in `scores`.
pub fn project_up(
    scores: &HashMap<Vec<Node>, f64>,
    targets: &[Vec<Node>],
    fallback: Fallback,
) -> Vec<Option<f64>> {
    let longest = scores.keys().map(Vec::len).max().unwrap_or(0);
    let minimum = scores.values().copied().reduce(f64::min);
    targets
        .iter()
        .map(|t| {
            (1..=longest.min(t.len()))
                .rev()
                .find_map(|k| scores.get(&t[t.len() - k..]).copied())
                .or(match fallback {
                    Fallback::Minimum => minimum,
                    Fallback::Exclude => None,
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn end_ranking() {
        let test = PathDataset::from_labels([("A,B", 9), ("A,C", 1)]).unwrap();
        let gt = ground_truth(&test, Measure::PathEnd, 1, &CentralityOptions::default());
        let labels: Vec<String> = gt.ranking.iter().map(|(s, _)| test.vocabulary().join(s, "|")).collect();
        assert_eq!(labels, ["B", "C", "A"]);
        assert_eq!(gt.ranking[0].1, 0.9);
    }

    #[test]
    fn ties_in_label_order() {
        let test = PathDataset::from_labels([("C", 1), ("A", 1), ("B", 1)]).unwrap();
        let gt = ground_truth(&test, Measure::PathEnd, 1, &CentralityOptions::default());
        let labels: Vec<&str> = gt.ranking.iter().map(|(s, _)| test.label(s[0])).collect();
        assert_eq!(labels, ["A", "B", "C"]);
    }

    #[test]
    fn longer_sequences_join_the_pool() {
        let test = PathDataset::from_labels([("A,B", 3), ("C,B", 1)]).unwrap();
        let gt = ground_truth(&test, Measure::PathEnd, 2, &CentralityOptions::default());
        assert_eq!(gt.len(), 5);
        let v = test.vocabulary();
        let ab = vec![v.get("A").unwrap(), v.get("B").unwrap()];
        let score = gt.ranking.iter().find(|(s, _)| *s == ab).unwrap().1;
        assert_eq!(score, 0.75);
    }

    #[test]
    fn top_decile_uses_ceiling() {
        let gt = GroundTruth {
            measure: Measure::PathEnd,
            ranking: (0..11).map(|i| (vec![], i as f64)).collect(),
        };
        assert_eq!(gt.top_labels(0.1).iter().filter(|&&b| b).count(), 2);
    }

    fn seq(ds: &PathDataset, s: &str) -> Vec<Node> {
        s.chars().map(|c| ds.vocabulary().get(&c.to_string()).unwrap()).collect()
    }

    #[test]
    fn projection_prefers_longest_suffix() {
        let ds = PathDataset::from_labels([("A,B,C", 1)]).unwrap();
        let net: HashMap<_, _> = [(seq(&ds, "A"), 1.0), (seq(&ds, "B"), 2.0)].into();
        assert_eq!(project_up(&net, &[seq(&ds, "AB")], Fallback::Minimum), [Some(2.0)]);

        let m2: HashMap<_, _> = [(seq(&ds, "AB"), 7.0), (seq(&ds, "B"), 2.0)].into();
        assert_eq!(project_up(&m2, &[seq(&ds, "CAB")], Fallback::Minimum), [Some(7.0)]);

        assert_eq!(project_up(&net, &[seq(&ds, "C")], Fallback::Minimum), [Some(1.0)]);
        assert_eq!(project_up(&net, &[seq(&ds, "C")], Fallback::Exclude), [None]);
    }
}
