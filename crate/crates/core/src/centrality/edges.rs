use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{CentralityOptions, CentralityVector, Measure, MoGenAnalysis};
use crate::error::{Error, Result};
use crate::models::{MoGenModel, ModelKind};
use crate::pathdata::{Node, Vocabulary};

/// Centralities of one edge, i.e. of all states ending in `(source, target)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeEntry {
    pub source: Node,
    pub target: Node,
    /// Share of expected visits among all states of order two and above.
    pub visitation: f64,
    pub scores: BTreeMap<Measure, f64>,
}

/// Edges passing the visitation threshold, sorted by source then target label.
#[derive(Clone, Debug)]
pub struct EdgeReport {
    pub vocab: Arc<Vocabulary>,
    pub min_visitation: f64,
    pub entries: Vec<EdgeEntry>,
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    source: &'a str,
    target: &'a str,
    visitation: f64,
    scores: &'a BTreeMap<Measure, f64>,
}

impl EdgeReport {
    pub fn with_source(&self, node: Node) -> impl Iterator<Item = &EdgeEntry> {
        self.entries.iter().filter(move |e| e.source == node)
    }

    pub fn with_target(&self, node: Node) -> impl Iterator<Item = &EdgeEntry> {
        self.entries.iter().filter(move |e| e.target == node)
    }

    /// Edges where `node` is the source or the target.
    pub fn involving(&self, node: Node) -> impl Iterator<Item = &EdgeEntry> {
        self.entries
            .iter()
            .filter(move |e| e.source == node || e.target == node)
    }

    pub fn get(&self, source: Node, target: Node) -> Option<&EdgeEntry> {
        self.entries
            .iter()
            .find(|e| e.source == source && e.target == target)
    }

    /// Per-measure vectors keyed by the two-node sequence.
    pub fn vectors(&self) -> Vec<CentralityVector> {
        let measures: Vec<Measure> = self
            .entries
            .first()
            .map(|e| e.scores.keys().copied().collect())
            .unwrap_or_default();
        measures
            .into_iter()
            .map(|m| CentralityVector {
                measure: m,
                model: ModelKind::MoGen,
                scores: self
                    .entries
                    .iter()
                    .map(|e| (vec![e.source, e.target], e.scores[&m]))
                    .collect(),
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<JsonEdge> = self
            .entries
            .iter()
            .map(|e| JsonEdge {
                source: self.vocab.label(e.source),
                target: self.vocab.label(e.target),
                visitation: e.visitation,
                scores: &e.scores,
            })
            .collect();
        serde_json::to_value(rows).expect("edges serialise")
    }
}

/// Centralities of order-2 states, keeping edges whose visitation share is
/// at least `min_visitation`.
pub fn edge_centralities(
    model: &MoGenModel,
    measures: &[Measure],
    min_visitation: f64,
    options: &CentralityOptions,
) -> Result<EdgeReport> {
    if model.order() < 2 {
        return Err(Error::InvalidArgument(
            "edge centralities need a model of order 2 or more".into(),
        ));
    }
    if !(0.0..=1.0).contains(&min_visitation) {
        return Err(Error::InvalidArgument(format!(
            "visitation threshold {min_visitation} outside [0, 1]"
        )));
    }
    let analysis = MoGenAnalysis::new(model, options.solver)?;
    let mut edges: Vec<Vec<Node>> = model
        .states()
        .iter()
        .filter_map(|s| s.suffix(2).map(<[Node]>::to_vec))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let visits = analysis.visits();
    let edge_total: f64 = model
        .states()
        .iter()
        .zip(visits)
        .filter(|(s, _)| s.len() >= 2)
        .map(|(_, x)| x)
        .sum();
    let shares: Vec<f64> = edges
        .iter()
        .map(|e| {
            let x: f64 = analysis.states_ending_in(e).iter().map(|&i| visits[i]).sum();
            x / edge_total
        })
        .collect();
    let kept: Vec<usize> = (0..edges.len())
        .filter(|&i| shares[i] >= min_visitation)
        .collect();
    let kept_edges: Vec<Vec<Node>> = kept.iter().map(|&i| edges[i].clone()).collect();

    let mut per_measure = BTreeMap::new();
    for &m in measures {
        per_measure.insert(m, analysis.sequence_scores(m, &kept_edges, options));
    }
    let vocab = model.vocabulary().clone();
    let mut entries: Vec<EdgeEntry> = kept
        .iter()
        .enumerate()
        .map(|(r, &i)| EdgeEntry {
            source: edges[i][0],
            target: edges[i][1],
            visitation: shares[i],
            scores: per_measure.iter().map(|(&m, v)| (m, v[r])).collect(),
        })
        .collect();
    entries.sort_by(|a, b| vocab.cmp_sequences(&[a.source, a.target], &[b.source, b.target]));
    Ok(EdgeReport {
        vocab,
        min_visitation,
        entries,
    })
}
