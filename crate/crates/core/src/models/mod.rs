//! The three model families fitted to path data: the first-order network
//! model, the lossless path model and the multi-order generative model, plus
//! the absorbing-chain machinery behind the latter.

mod fundamental;
mod mogen;
mod network;
mod selection;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathdata::{Node, PathDataset, Vocabulary, END_MARKER, START_MARKER};

pub use fundamental::{FundamentalMatrix, SolverOptions};
pub use mogen::{fit_mogen, MoGenModel};
pub use network::{fit_network, NetworkModel};
pub use selection::{order_scores, select_order, OrderScore};

/// A tuple of 1..=K consecutive nodes; the walk is in the last node having
/// traversed the preceding ones.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State(Box<[Node]>);

impl State {
    pub fn new(nodes: impl Into<Box<[Node]>>) -> Self {
        let nodes = nodes.into();
        assert!(!nodes.is_empty(), "state must hold at least one node");
        State(nodes)
    }

    pub fn single(node: Node) -> Self {
        State(Box::new([node]))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.0
    }

    /// The node the walk currently sits in.
    pub fn last(&self) -> Node {
        *self.0.last().expect("non-empty state")
    }

    /// The final `k` nodes, or `None` if the state is shorter than `k`.
    pub fn suffix(&self, k: usize) -> Option<&[Node]> {
        (k >= 1 && k <= self.0.len()).then(|| &self.0[self.0.len() - k..])
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        DisplayState(self, vocab)
    }
}

impl std::borrow::Borrow<[Node]> for State {
    fn borrow(&self) -> &[Node] {
        &self.0
    }
}

impl Deref for State {
    type Target = [Node];

    fn deref(&self) -> &[Node] {
        &self.0
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter().map(|n| n.index())).finish()
    }
}

struct DisplayState<'a>(&'a State, &'a Vocabulary);

impl fmt::Display for DisplayState<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.1.join(self.0, "|"))
    }
}

/// A position in an encoded path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HigherOrderState {
    Start,
    Nodes(State),
    End,
}

impl HigherOrderState {
    pub fn render(&self, vocab: &Vocabulary) -> String {
        match self {
            HigherOrderState::Start => START_MARKER.to_owned(),
            HigherOrderState::End => END_MARKER.to_owned(),
            HigherOrderState::Nodes(s) => format!("({})", vocab.join(s, ",")),
        }
    }
}

/// The transient states a path visits under maximum order `k`: tuples grow
/// from length 1 up to `k`, then slide.
pub fn transient_states(path: &[Node], k: usize) -> impl Iterator<Item = &[Node]> {
    (0..path.len()).map(move |i| &path[(i + 1).saturating_sub(k)..=i])
}

/// Encodes a path as `START, (v1), (v1,v2), ..., (v_{l-k+1},...,v_l), END`.
pub fn encode_path(path: &[Node], k: usize) -> Result<Vec<HigherOrderState>> {
    if k < 1 {
        return Err(Error::InvalidArgument("maximum order must be at least 1".into()));
    }
    if path.is_empty() {
        return Err(Error::InvalidArgument("cannot encode an empty path".into()));
    }
    let mut out = Vec::with_capacity(path.len() + 2);
    out.push(HigherOrderState::Start);
    out.extend(transient_states(path, k).map(|s| HigherOrderState::Nodes(State::new(s))));
    out.push(HigherOrderState::End);
    Ok(out)
}

/// The lossless model: the training multiset of paths itself.
#[derive(Clone, Debug)]
pub struct PathModel {
    data: PathDataset,
}

impl PathModel {
    pub fn new(data: PathDataset) -> Self {
        PathModel { data }
    }

    pub fn data(&self) -> &PathDataset {
        &self.data
    }

    pub fn vocabulary(&self) -> &std::sync::Arc<Vocabulary> {
        self.data.vocabulary()
    }
}

/// Any of the three model families.
#[derive(Clone, Copy, Debug)]
pub enum ModelRef<'a> {
    Network(&'a NetworkModel),
    Path(&'a PathModel),
    MoGen(&'a MoGenModel),
}

/// The family a model belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Network,
    Path,
    MoGen,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Network => "network",
            ModelKind::Path => "path",
            ModelKind::MoGen => "mogen",
        })
    }
}

impl ModelRef<'_> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelRef::Network(_) => ModelKind::Network,
            ModelRef::Path(_) => ModelKind::Path,
            ModelRef::MoGen(_) => ModelKind::MoGen,
        }
    }

    pub fn vocabulary(&self) -> &std::sync::Arc<Vocabulary> {
        match self {
            ModelRef::Network(m) => m.vocabulary(),
            ModelRef::Path(m) => m.vocabulary(),
            ModelRef::MoGen(m) => m.vocabulary(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (PathDataset, Vec<Node>) {
        let ds = PathDataset::from_labels([("A,C,D,E", 1)]).unwrap();
        let path = ds.paths()[0].nodes.clone();
        (ds, path)
    }

    fn render(ds: &PathDataset, enc: &[HigherOrderState]) -> Vec<String> {
        enc.iter().map(|s| s.render(ds.vocabulary())).collect()
    }

    #[test]
    fn first_order_encoding() {
        let (ds, p) = toy();
        let enc = encode_path(&p, 1).unwrap();
        assert_eq!(render(&ds, &enc), ["*", "(A)", "(C)", "(D)", "(E)", "†"]);
    }

    #[test]
    fn third_order_encoding() {
        let (ds, p) = toy();
        let enc = encode_path(&p, 3).unwrap();
        assert_eq!(
            render(&ds, &enc),
            ["*", "(A)", "(A,C)", "(A,C,D)", "(C,D,E)", "†"]
        );
    }

    #[test]
    fn second_order_encoding_slides() {
        let (ds, p) = toy();
        let enc = encode_path(&p, 2).unwrap();
        assert_eq!(render(&ds, &enc), ["*", "(A)", "(A,C)", "(C,D)", "(D,E)", "†"]);
        // l + 1 transitions
        assert_eq!(enc.len() - 1, p.len() + 1);
    }

    #[test]
    fn order_zero_rejected() {
        let (_, p) = toy();
        assert!(encode_path(&p, 0).is_err());
    }

    #[test]
    fn state_suffix() {
        let (_, p) = toy();
        let s = State::new(&p[..]);
        assert_eq!(s.suffix(2), Some(&p[2..]));
        assert_eq!(s.suffix(5), None);
        assert_eq!(s.last(), p[3]);
    }
}
