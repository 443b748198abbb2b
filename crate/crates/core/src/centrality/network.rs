use std::collections::VecDeque;

use rayon::prelude::*;

use super::{harmonic, CentralityOptions, Direction, Measure};
use crate::error::{Error, Result};
use crate::models::NetworkModel;
use crate::pathdata::Node;

/// Unweighted directed topology of a network model.
pub struct NetworkAnalysis<'a> {
    model: &'a NetworkModel,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl<'a> NetworkAnalysis<'a> {
    pub fn new(model: &'a NetworkModel) -> Self {
        let n = model.vocabulary().len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in model.edges().keys() {
            out[u.index()].push(v.index());
            inc[v.index()].push(u.index());
        }
        NetworkAnalysis { model, out, inc }
    }

    pub fn model(&self) -> &'a NetworkModel {
        self.model
    }

    /// Hop distances from (or to) `v`, indexed by node id.
    pub fn distances(&self, v: Node, direction: Direction) -> Vec<Option<u32>> {
        let adj = match direction {
            Direction::From => &self.out,
            Direction::To => &self.inc,
        };
        let mut dist = vec![None; adj.len()];
        dist[v.index()] = Some(0);
        let mut queue = VecDeque::from([v.index()]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes have a distance");
            for &w in &adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Dependencies of every node on shortest paths from `s`.
    fn dependencies(&self, s: usize, partial: &mut [f64]) {
        let n = self.out.len();
        let mut stack = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &self.out[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                partial[w] += delta[w];
            }
        }
    }

    /// Brandes accumulation over every ordered source/target pair. Sources
    /// are summed in fixed chunks and the chunks in order, so the result does
    /// not depend on thread scheduling.
    fn betweenness(&self) -> Vec<f64> {
        const CHUNK: usize = 64;
        let n = self.out.len();
        let partials: Vec<Vec<f64>> = self
            .model
            .nodes()
            .par_chunks(CHUNK)
            .map(|sources| {
                let mut partial = vec![0.0; n];
                for s in sources {
                    self.dependencies(s.index(), &mut partial);
                }
                partial
            })
            .collect();
        let mut total = vec![0.0; n];
        for p in partials {
            total.iter_mut().zip(p).for_each(|(x, y)| *x += y);
        }
        total
    }

    pub fn sequence_scores(
        &self,
        measure: Measure,
        sequences: &[Vec<Node>],
        options: &CentralityOptions,
    ) -> Result<Vec<f64>> {
        if let Some(s) = sequences.iter().find(|s| s.len() > 1) {
            return Err(Error::InvalidArgument(format!(
                "a network model scores single nodes, not sequences of length {}",
                s.len()
            )));
        }
        let in_range = |v: Node| v.index() < self.out.len();
        match measure {
            Measure::Betweenness => {
                let b = self.betweenness();
                Ok(sequences
                    .iter()
                    .map(|s| if in_range(s[0]) { b[s[0].index()] } else { 0.0 })
                    .collect())
            }
            Measure::Closeness => Ok(sequences
                .par_iter()
                .map(|s| {
                    if !in_range(s[0]) {
                        return 0.0;
                    }
                    harmonic(&self.distances(s[0], options.closeness), s[0])
                })
                .collect()),
            _ => unreachable!("unsupported measures are rejected by the caller"),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::centrality::{betweenness, closeness, path_end};
    use crate::models::{fit_network, ModelRef};
    use crate::pathdata::PathDataset;

    fn by_label(ds: &PathDataset, v: &crate::centrality::CentralityVector) -> BTreeMap<String, f64> {
        v.scores
            .iter()
            .map(|(s, x)| (ds.vocabulary().join(s, "|"), *x))
            .collect()
    }

    #[test]
    fn chain_closeness() {
        let ds = PathDataset::from_labels([("A,B,C", 1)]).unwrap();
        let net = fit_network(&ds).unwrap();
        let c = closeness(ModelRef::Network(&net), &CentralityOptions::default()).unwrap();
        let c = by_label(&ds, &c);
        assert_eq!(c["A"], 1.5);
        assert_eq!(c["B"], 1.0);
        assert_eq!(c["C"], 0.0);

        let to = CentralityOptions {
            closeness: Direction::To,
            ..Default::default()
        };
        let c = by_label(&ds, &closeness(ModelRef::Network(&net), &to).unwrap());
        assert_eq!(c["A"], 0.0);
        assert_eq!(c["C"], 1.5);
    }

    #[test]
    fn star_betweenness_is_k_squared() {
        let k = 4;
        let paths: Vec<(String, u64)> = (0..k)
            .flat_map(|i| (0..k).map(move |j| (format!("in{i},hub,out{j}"), 1)))
            .collect();
        let ds = PathDataset::from_labels(paths).unwrap();
        let net = fit_network(&ds).unwrap();
        let b = by_label(&ds, &betweenness(ModelRef::Network(&net), &CentralityOptions::default()).unwrap());
        assert_eq!(b["hub"], (k * k) as f64);
        assert!(b.iter().filter(|(l, _)| *l != "hub").all(|(_, &x)| x == 0.0));
    }

    #[test]
    fn split_shortest_paths_share_credit() {
        // two equally short routes from A to D
        let ds = PathDataset::from_labels([("A,B,D", 1), ("A,C,D", 1)]).unwrap();
        let net = fit_network(&ds).unwrap();
        let b = by_label(&ds, &betweenness(ModelRef::Network(&net), &CentralityOptions::default()).unwrap());
        assert_eq!(b["B"], 0.5);
        assert_eq!(b["C"], 0.5);
        assert_eq!(b["A"], 0.0);
    }

    #[test]
    fn path_end_unsupported() {
        let ds = PathDataset::from_labels([("A,B", 1)]).unwrap();
        let net = fit_network(&ds).unwrap();
        let err = path_end(ModelRef::Network(&net), &CentralityOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "path_end cannot be computed for a network model");
    }

    #[test]
    fn isolated_node_has_zero_closeness() {
        let ds = PathDataset::from_labels([("A", 1), ("B,C", 1)]).unwrap();
        let net = fit_network(&ds).unwrap();
        let c = by_label(&ds, &closeness(ModelRef::Network(&net), &CentralityOptions::default()).unwrap());
        assert_eq!(c["A"], 0.0);
    }
}
