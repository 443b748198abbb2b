use std::collections::HashMap;

use rayon::prelude::*;

use super::{harmonic, CentralityOptions, Direction, Measure};
use crate::models::PathModel;
use crate::pathdata::Node;

/// Occurrence scans over the training multiset. An occurrence of a sequence
/// is identified by the path and the position of its last node.
pub struct PathAnalysis<'a> {
    model: &'a PathModel,
    total: f64,
    node_occurrences: f64,
}

impl<'a> PathAnalysis<'a> {
    pub fn new(model: &'a PathModel) -> Self {
        let data = model.data();
        let node_occurrences = data
            .paths()
            .iter()
            .map(|p| p.multiplicity as f64 * p.len() as f64)
            .sum();
        PathAnalysis {
            model,
            total: data.total() as f64,
            node_occurrences,
        }
    }

    pub fn model(&self) -> &'a PathModel {
        self.model
    }

    /// `(path index, end position)` of every occurrence of each sequence.
    fn occurrences(&self, sequences: &[Vec<Node>]) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); sequences.len()];
        let mut by_len: HashMap<usize, HashMap<&[Node], Vec<usize>>> = HashMap::new();
        for (q, s) in sequences.iter().enumerate() {
            by_len
                .entry(s.len())
                .or_default()
                .entry(s.as_slice())
                .or_default()
                .push(q);
        }
        let mut lens: Vec<usize> = by_len.keys().copied().collect();
        lens.sort_unstable();
        for (pi, p) in self.model.data().paths().iter().enumerate() {
            for &k in &lens {
                let wanted = &by_len[&k];
                for j in k.saturating_sub(1)..p.len() {
                    if let Some(qs) = wanted.get(&p.nodes[j + 1 - k..=j]) {
                        for &q in qs {
                            out[q].push((pi, j));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn occurs(&self, sequences: &[Vec<Node>]) -> Vec<bool> {
        self.occurrences(sequences)
            .iter()
            .map(|o| !o.is_empty())
            .collect()
    }

    fn distances_at(
        &self,
        occ: &[(usize, usize)],
        direction: Direction,
        n_vocab: usize,
    ) -> Vec<Option<u32>> {
        let paths = self.model.data().paths();
        let mut best: Vec<Option<u32>> = vec![None; n_vocab];
        let mut relax = |node: Node, d: usize| {
            let d = d as u32;
            let slot = &mut best[node.index()];
            if slot.is_none_or(|b| d < b) {
                *slot = Some(d);
            }
        };
        for &(pi, j) in occ {
            let nodes = &paths[pi].nodes;
            match direction {
                Direction::From => {
                    for (jj, &node) in nodes.iter().enumerate().skip(j + 1) {
                        relax(node, jj - j);
                    }
                }
                Direction::To => {
                    for (jj, &node) in nodes.iter().enumerate().take(j) {
                        relax(node, j - jj);
                    }
                }
            }
        }
        best
    }

    /// Shortest observed sub-path distances between `seq` and every node.
    pub fn distances(&self, seq: &[Node], direction: Direction, n_vocab: usize) -> Vec<Option<u32>> {
        let occ = self.occurrences(&[seq.to_vec()]).pop().unwrap_or_default();
        self.distances_at(&occ, direction, n_vocab)
    }

    pub fn sequence_scores(
        &self,
        measure: Measure,
        sequences: &[Vec<Node>],
        options: &CentralityOptions,
    ) -> Vec<f64> {
        let paths = self.model.data().paths();
        let occurrences = self.occurrences(sequences);
        let n_vocab = self.model.vocabulary().len();
        occurrences
            .par_iter()
            .zip(sequences)
            .map(|(occ, seq)| {
                let weighted = |f: &dyn Fn(usize, usize) -> f64| -> f64 {
                    occ.iter()
                        .map(|&(pi, j)| paths[pi].multiplicity as f64 * f(paths[pi].len(), j))
                        .sum()
                };
                let count = weighted(&|_, _| 1.0);
                let ends = weighted(&|l, j| (j + 1 == l) as u8 as f64);
                let mean = |x: f64| if count > 0.0 { x / count } else { 0.0 };
                match measure {
                    Measure::Betweenness => weighted(&|l, j| (j > 0 && j + 1 < l) as u8 as f64),
                    Measure::PathEnd => ends / self.total,
                    Measure::PathContinuation => {
                        if count > 0.0 {
                            1.0 - ends / count
                        } else {
                            0.0
                        }
                    }
                    Measure::PathReach => mean(weighted(&|l, j| (l - 1 - j) as f64)),
                    Measure::Visitation => count / self.node_occurrences,
                    Measure::Closeness => harmonic(
                        &self.distances_at(occ, options.closeness, n_vocab),
                        *seq.last().expect("non-empty sequence"),
                    ),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::centrality::{first_order, CentralityOptions};
    use crate::models::ModelRef;
    use crate::pathdata::PathDataset;

    fn scores(ds: &PathDataset, m: Measure) -> BTreeMap<String, f64> {
        let pm = PathModel::new(ds.clone());
        first_order(ModelRef::Path(&pm), m, &CentralityOptions::default())
            .unwrap()
            .scores
            .into_iter()
            .map(|(s, x)| (ds.vocabulary().join(&s, "|"), x))
            .collect()
    }

    fn toy() -> PathDataset {
        PathDataset::from_labels([("A,C,D,E", 1), ("B,C,D,F", 1)]).unwrap()
    }

    #[test]
    fn toy_betweenness() {
        let b = scores(&toy(), Measure::Betweenness);
        assert_eq!(b["C"], 2.0);
        assert_eq!(b["D"], 2.0);
        for l in ["A", "B", "E", "F"] {
            assert_eq!(b[l], 0.0);
        }
    }

    #[test]
    fn toy_end_continuation_visitation() {
        let ds = toy();
        let e = scores(&ds, Measure::PathEnd);
        assert_eq!((e["E"], e["F"], e["C"]), (0.5, 0.5, 0.0));
        let f = scores(&ds, Measure::PathContinuation);
        assert_eq!((f["C"], f["E"]), (1.0, 0.0));
        let v = scores(&ds, Measure::Visitation);
        assert_eq!(v["C"], 0.25);
    }

    #[test]
    fn reach_by_position() {
        let ds = PathDataset::from_labels([("A,C,D,E", 1)]).unwrap();
        let r = scores(&ds, Measure::PathReach);
        assert_eq!((r["A"], r["C"], r["D"], r["E"]), (3.0, 2.0, 1.0, 0.0));
    }

    #[test]
    fn half_terminal_node() {
        let ds = PathDataset::from_labels([("A,B", 1), ("B,C", 1)]).unwrap();
        assert_eq!(scores(&ds, Measure::PathContinuation)["B"], 0.5);
    }

    #[test]
    fn closeness_needs_an_observed_sub_path() {
        let ds = PathDataset::from_labels([("A,B", 1), ("B,C", 1)]).unwrap();
        assert_eq!(scores(&ds, Measure::Closeness)["A"], 1.0);
    }

    #[test]
    fn single_node_path() {
        let ds = PathDataset::from_labels([("A", 1)]).unwrap();
        assert_eq!(scores(&ds, Measure::Betweenness)["A"], 0.0);
        assert_eq!(scores(&ds, Measure::Visitation)["A"], 1.0);
    }

    #[test]
    fn sequence_occurrences() {
        let ds = PathDataset::from_labels([("A,B,A,B", 2), ("A,B", 1)]).unwrap();
        let pm = PathModel::new(ds.clone());
        let a = PathAnalysis::new(&pm);
        let v = ds.vocabulary();
        let ab = vec![v.get("A").unwrap(), v.get("B").unwrap()];
        let opts = CentralityOptions::default();
        // (A,B) ends at positions 1 and 3 of the long path, 1 of the short one
        assert_eq!(a.sequence_scores(Measure::Betweenness, std::slice::from_ref(&ab), &opts), [2.0]);
        assert_eq!(a.sequence_scores(Measure::PathEnd, std::slice::from_ref(&ab), &opts), [1.0]);
        assert_eq!(a.sequence_scores(Measure::Visitation, &[ab], &opts), [5.0 / 10.0]);
    }
}
