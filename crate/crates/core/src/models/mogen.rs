use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{transient_states, HigherOrderState, State};
use crate::error::{Error, Result};
use crate::pathdata::{Node, Path, PathDataset, Vocabulary};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Multi-order generative model with start and absorbing end states.
///
/// Transient states are indexed `0..m`, sorted by tuple length and then by
/// node labels. `start[i]` is the start distribution S, `end[i]` the
/// absorption column R and `transitions[i]` the sparse row `i` of Q, sorted
/// by column.
#[derive(Clone, Debug)]
pub struct MoGenModel {
    order: usize,
    observations: u64,
    vocab: Arc<Vocabulary>,
    states: Vec<State>,
    index: HashMap<State, usize>,
    start: Vec<f64>,
    end: Vec<f64>,
    transitions: Vec<Vec<(usize, f64)>>,
}

/// Fits a MOGen model of maximum order `k`: transition counts of all encoded
/// paths, weighted by multiplicity, then row-normalised.
pub fn fit_mogen(ds: &PathDataset, k: usize) -> Result<MoGenModel> {
    if k < 1 {
        return Err(Error::InvalidArgument("maximum order must be at least 1".into()));
    }
    let mut ids: HashMap<&[Node], usize> = HashMap::new();
    let mut raw_states: Vec<&[Node]> = Vec::new();
    let mut start_counts: HashMap<usize, u64> = HashMap::new();
    let mut end_counts: HashMap<usize, u64> = HashMap::new();
    let mut trans_counts: HashMap<(usize, usize), u64> = HashMap::new();

    for p in ds.paths() {
        let mut prev = None;
        for s in transient_states(&p.nodes, k) {
            let id = *ids.entry(s).or_insert_with(|| {
                raw_states.push(s);
                raw_states.len() - 1
            });
            match prev {
                None => *start_counts.entry(id).or_insert(0) += p.multiplicity,
                Some(from) => *trans_counts.entry((from, id)).or_insert(0) += p.multiplicity,
            }
            prev = Some(id);
        }
        if let Some(last) = prev {
            *end_counts.entry(last).or_insert(0) += p.multiplicity;
        }
    }

    let vocab = ds.vocabulary().clone();
    let mut order: Vec<usize> = (0..raw_states.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (raw_states[a], raw_states[b]);
        sa.len()
            .cmp(&sb.len())
            .then_with(|| vocab.cmp_sequences(sa, sb))
    });
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let states: Vec<State> = order.iter().map(|&old| State::new(raw_states[old])).collect();
    let m = states.len();

    let mut out_total = vec![0u64; m];
    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); m];
    for (&(from, to), &c) in &trans_counts {
        rows[remap[from]].push((remap[to], c));
        out_total[remap[from]] += c;
    }
    let mut end = vec![0.0; m];
    for (&s, &c) in &end_counts {
        out_total[remap[s]] += c;
        end[remap[s]] = c as f64;
    }
    for (i, e) in end.iter_mut().enumerate() {
        *e /= out_total[i] as f64;
    }
    let transitions = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.sort_unstable();
            row.into_iter()
                .map(|(j, c)| (j, c as f64 / out_total[i] as f64))
                .collect()
        })
        .collect();
    let n = ds.total() as f64;
    let mut start = vec![0.0; m];
    for (&s, &c) in &start_counts {
        start[remap[s]] = c as f64 / n;
    }

    let index = states.iter().cloned().zip(0..).collect();
    Ok(MoGenModel {
        order: k,
        observations: ds.total(),
        vocab,
        states,
        index,
        start,
        end,
        transitions,
    })
}

impl MoGenModel {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of training path instances, N.
    pub fn observations(&self) -> u64 {
        self.observations
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    /// Number of transient states, m.
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn state_index(&self, nodes: &[Node]) -> Option<usize> {
        self.index.get(nodes).copied()
    }

    /// Start distribution S over transient states.
    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// Absorption probabilities R (transition to the end state).
    pub fn end(&self) -> &[f64] {
        &self.end
    }

    /// Row `i` of Q as `(column, probability)` pairs.
    pub fn transitions(&self, i: usize) -> &[(usize, f64)] {
        &self.transitions[i]
    }

    pub fn q_entry(&self, i: usize, j: usize) -> f64 {
        let row = &self.transitions[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .map(|pos| row[pos].1)
            .unwrap_or(0.0)
    }

    /// Entry of the full multi-order transition matrix T.
    pub fn probability(&self, from: &HigherOrderState, to: &HigherOrderState) -> f64 {
        let idx = |s: &State| self.state_index(s);
        match (from, to) {
            (HigherOrderState::Start, HigherOrderState::Nodes(s)) => {
                idx(s).map_or(0.0, |i| self.start[i])
            }
            (HigherOrderState::Nodes(s), HigherOrderState::End) => {
                idx(s).map_or(0.0, |i| self.end[i])
            }
            (HigherOrderState::Nodes(a), HigherOrderState::Nodes(b)) => match (idx(a), idx(b)) {
                (Some(i), Some(j)) => self.q_entry(i, j),
                _ => 0.0,
            },
            _ => 0.0,
        }
    }

    /// Probability the model generates exactly this path.
    pub fn path_probability(&self, nodes: &[Node]) -> f64 {
        self.path_log_probability(nodes).exp()
    }

    fn path_log_probability(&self, nodes: &[Node]) -> f64 {
        let mut prev: Option<usize> = None;
        let mut logp = 0.0;
        for s in transient_states(nodes, self.order) {
            let Some(i) = self.state_index(s) else {
                return f64::NEG_INFINITY;
            };
            let p = match prev {
                None => self.start[i],
                Some(from) => self.q_entry(from, i),
            };
            logp += p.ln();
            prev = Some(i);
        }
        match prev {
            Some(last) => logp + self.end[last].ln(),
            None => f64::NEG_INFINITY,
        }
    }

    /// Log-likelihood of a dataset, weighting each path by its multiplicity.
    pub fn log_likelihood(&self, ds: &PathDataset) -> f64 {
        ds.paths()
            .iter()
            .map(|p: &Path| p.multiplicity as f64 * self.path_log_probability(&p.nodes))
            .sum()
    }

    /// Free parameters: per row (start and every transient state), the number
    /// of non-zero outgoing probabilities minus one.
    pub fn degrees_of_freedom(&self) -> usize {
        let nonzero = |row: &mut dyn Iterator<Item = f64>| row.filter(|&p| p > 0.0).count();
        let start = nonzero(&mut self.start.iter().copied()).saturating_sub(1);
        let transient: usize = (0..self.n_states())
            .map(|i| {
                let mut row = self.transitions[i]
                    .iter()
                    .map(|&(_, p)| p)
                    .chain(std::iter::once(self.end[i]));
                nonzero(&mut row).saturating_sub(1)
            })
            .sum();
        start + transient
    }

    /// Checks stochasticity and the multi-order transition structure.
    pub fn validate(&self) -> Result<()> {
        let m = self.n_states();
        if m == 0 {
            return Err(Error::InvalidModel("model has no states".into()));
        }
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let prob_ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        let s_sum: f64 = self.start.iter().sum();
        if (s_sum - 1.0).abs() > STOCHASTIC_TOL {
            return bad(format!("start distribution sums to {s_sum}"));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.len() > self.order {
                return bad(format!("state {i} longer than the maximum order"));
            }
            if !prob_ok(self.start[i]) || !prob_ok(self.end[i]) {
                return bad(format!("state {i} has an invalid start/end probability"));
            }
            if self.start[i] > 0.0 && s.len() != 1 {
                return bad(format!("start transition into order-{} state {i}", s.len()));
            }
            let row = &self.transitions[i];
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return bad(format!("row {i} is not strictly sorted"));
            }
            let mut total = self.end[i];
            for &(j, p) in row {
                if j >= m || !prob_ok(p) {
                    return bad(format!("invalid transition {i} -> {j}"));
                }
                total += p;
                if p > 0.0 && !self.is_valid_step(s, &self.states[j]) {
                    return bad(format!("transition {i} -> {j} breaks the multi-order structure"));
                }
            }
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return bad(format!("row {i} sums to {total}"));
            }
        }
        Ok(())
    }

    fn is_valid_step(&self, from: &[Node], to: &[Node]) -> bool {
        if from.len() < self.order {
            to.len() == from.len() + 1 && to[..from.len()] == *from
        } else {
            to.len() == self.order && to[..self.order - 1] == from[1..]
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            order: self.order,
            observations: self.observations,
            states: self
                .states
                .iter()
                .map(|s| self.vocab.labels(s).map(str::to_owned).collect())
                .collect(),
            start: self.start.clone(),
            end: self.end.clone(),
            transitions: self
                .transitions
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().map(move |&(j, p)| (i, j, p)))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses and validates a model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let m = doc.states.len();
        if doc.order < 1 {
            return Err(Error::InvalidModel("order must be at least 1".into()));
        }
        if doc.observations < 1 {
            return Err(Error::InvalidModel("a model needs at least one observation".into()));
        }
        if doc.start.len() != m || doc.end.len() != m {
            return Err(Error::InvalidModel("start/end vectors must match the state list".into()));
        }
        let mut vocab = Vocabulary::new();
        let mut states = Vec::with_capacity(m);
        for labels in &doc.states {
            if labels.is_empty() {
                return Err(Error::InvalidModel("empty state tuple".into()));
            }
            let nodes = labels
                .iter()
                .map(|l| vocab.intern(l))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Error::InvalidModel)?;
            states.push(State::new(nodes));
        }
        let index: HashMap<State, usize> = states.iter().cloned().zip(0..).collect();
        if index.len() != m {
            return Err(Error::InvalidModel("duplicate state".into()));
        }
        let mut transitions = vec![Vec::new(); m];
        let mut seen = HashSet::new();
        for &(i, j, p) in &doc.transitions {
            if i >= m || j >= m {
                return Err(Error::InvalidModel(format!("transition {i} -> {j} out of range")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidModel(format!("duplicate transition {i} -> {j}")));
            }
            transitions[i].push((j, p));
        }
        for row in &mut transitions {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        let model = MoGenModel {
            order: doc.order,
            observations: doc.observations,
            vocab: Arc::new(vocab),
            states,
            index,
            start: doc.start,
            end: doc.end,
            transitions,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    order: usize,
    observations: u64,
    states: Vec<Vec<String>>,
    start: Vec<f64>,
    end: Vec<f64>,
    transitions: Vec<(usize, usize, f64)>,
}
