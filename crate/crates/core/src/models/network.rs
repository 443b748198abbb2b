use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Result;
use crate::pathdata::{Node, PathDataset, Vocabulary};

/// First-order network: every observed transition as a weighted directed edge.
#[derive(Clone, Debug)]
pub struct NetworkModel {
    vocab: Arc<Vocabulary>,
    nodes: Vec<Node>,
    edges: BTreeMap<(Node, Node), u64>,
    successors: Vec<Vec<Node>>,
}

pub fn fit_network(ds: &PathDataset) -> Result<NetworkModel> {
    let mut edges = BTreeMap::new();
    for p in ds.paths() {
        for w in p.nodes.windows(2) {
            *edges.entry((w[0], w[1])).or_insert(0) += p.multiplicity;
        }
    }
    Ok(NetworkModel::from_edges(
        ds.vocabulary().clone(),
        ds.observed_nodes(),
        edges,
    ))
}

impl NetworkModel {
    pub fn from_edges(
        vocab: Arc<Vocabulary>,
        nodes: Vec<Node>,
        edges: BTreeMap<(Node, Node), u64>,
    ) -> Self {
        let mut successors = vec![Vec::new(); vocab.len()];
        for &(u, v) in edges.keys() {
            successors[u.index()].push(v);
        }
        NetworkModel {
            vocab,
            nodes,
            edges,
            successors,
        }
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    /// Nodes observed in the training paths.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(Node, Node), u64> {
        &self.edges
    }

    pub fn weight(&self, from: Node, to: Node) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn successors(&self, node: Node) -> &[Node] {
        &self.successors[node.index()]
    }

    /// Row-normalised transition probability; 0 for nodes without out-edges.
    pub fn transition_probability(&self, from: Node, to: Node) -> f64 {
        let total: u64 = self
            .successors(from)
            .iter()
            .map(|&v| self.weight(from, v))
            .sum();
        if total == 0 {
            0.0
        } else {
            self.weight(from, to) as f64 / total as f64
        }
    }
}
