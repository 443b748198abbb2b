use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use super::{harmonic, CentralityOptions, Direction, Measure};
use crate::error::Result;
use crate::models::{FundamentalMatrix, MoGenModel, SolverOptions};
use crate::pathdata::Node;

/// Expected visits and residual lengths of a MOGen model, plus the suffix
/// index used to project states onto node sequences.
pub struct MoGenAnalysis<'a> {
    model: &'a MoGenModel,
    fundamental: FundamentalMatrix,
    visits: Vec<f64>,
    row_sums: Vec<f64>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    by_suffix: HashMap<Vec<Node>, Vec<usize>>,
}

impl<'a> MoGenAnalysis<'a> {
    pub fn new(model: &'a MoGenModel, solver: SolverOptions) -> Result<Self> {
        let fundamental = FundamentalMatrix::new(model, solver)?;
        let visits = fundamental.solve_left(model.start())?;
        let row_sums = fundamental.row_sums()?;
        let m = model.n_states();
        let mut succ = vec![Vec::new(); m];
        let mut pred = vec![Vec::new(); m];
        for (i, out) in succ.iter_mut().enumerate() {
            for &(j, p) in model.transitions(i) {
                if p > 0.0 {
                    out.push(j);
                    pred[j].push(i);
                }
            }
        }
        let mut by_suffix: HashMap<Vec<Node>, Vec<usize>> = HashMap::new();
        for (i, s) in model.states().iter().enumerate() {
            for k in 1..=s.len() {
                by_suffix.entry(s[s.len() - k..].to_vec()).or_default().push(i);
            }
        }
        Ok(MoGenAnalysis {
            model,
            fundamental,
            visits,
            row_sums,
            succ,
            pred,
            by_suffix,
        })
    }

    pub fn model(&self) -> &'a MoGenModel {
        self.model
    }

    pub fn fundamental(&self) -> &FundamentalMatrix {
        &self.fundamental
    }

    /// Expected visits per path, S·F.
    pub fn visits(&self) -> &[f64] {
        &self.visits
    }

    /// Expected number of states visited from each state onwards, F·1.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// First-order nodes that some state ends in, in id order.
    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes: Vec<Node> = self.model.states().iter().map(|s| s.last()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// States whose trailing nodes equal `seq`, in index order.
    pub fn states_ending_in(&self, seq: &[Node]) -> &[usize] {
        self.by_suffix.get(seq).map_or(&[], Vec::as_slice)
    }

    /// Per-state value of a measure. Betweenness is scaled to the number of
    /// training paths so that it counts interior visits like the path model.
    pub fn state_values(&self, measure: Measure, options: &CentralityOptions) -> Vec<f64> {
        let m = self.model;
        let n = m.observations() as f64;
        let total_visits: f64 = self.visits.iter().sum();
        (0..m.n_states())
            .into_par_iter()
            .map(|i| {
                let (x, s, r) = (self.visits[i], m.start()[i], m.end()[i]);
                match measure {
                    Measure::Betweenness if options.raw_betweenness => n * (x - s - r),
                    Measure::Betweenness => n * (x - s - x * r + s * r),
                    Measure::PathEnd => x * r,
                    Measure::PathContinuation => 1.0 - r,
                    Measure::PathReach => self.row_sums[i] - 1.0,
                    Measure::Visitation => x / total_visits,
                    Measure::Closeness => harmonic(
                        &self.bfs(&[i], options.closeness),
                        m.state(i).last(),
                    ),
                }
            })
            .collect()
    }

    /// Shortest distances from the given states to each first-order node,
    /// minimised over all states ending in that node.
    fn bfs(&self, sources: &[usize], direction: Direction) -> Vec<Option<u32>> {
        let adj = match direction {
            Direction::From => &self.succ,
            Direction::To => &self.pred,
        };
        let mut dist = vec![u32::MAX; adj.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        let mut best = vec![None; self.model.vocabulary().len()];
        while let Some(u) = queue.pop_front() {
            let d = dist[u];
            let slot: &mut Option<u32> = &mut best[self.model.state(u).last().index()];
            if slot.is_none_or(|b| d < b) {
                *slot = Some(d);
            }
            for &w in &adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        best
    }

    /// Distances between `seq` and every first-order node, indexed by node id.
    pub fn distances(&self, seq: &[Node], direction: Direction) -> Vec<Option<u32>> {
        self.bfs(self.states_ending_in(seq), direction)
    }

    pub fn sequence_scores(
        &self,
        measure: Measure,
        sequences: &[Vec<Node>],
        options: &CentralityOptions,
    ) -> Vec<f64> {
        if measure == Measure::Closeness {
            return sequences
                .par_iter()
                .map(|q| {
                    let d = self.distances(q, options.closeness);
                    harmonic(&d, *q.last().expect("non-empty sequence"))
                })
                .collect();
        }
        let values = self.state_values(measure, options);
        sequences
            .iter()
            .map(|q| {
                let states = self.states_ending_in(q);
                match measure {
                    Measure::Betweenness | Measure::PathEnd | Measure::Visitation => {
                        states.iter().map(|&i| values[i]).sum()
                    }
                    // visit-weighted averages
                    _ => {
                        let weight: f64 = states.iter().map(|&i| self.visits[i]).sum();
                        if weight > 0.0 {
                            states.iter().map(|&i| self.visits[i] * values[i]).sum::<f64>() / weight
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect()
    }
}
