//! Path datasets: ingestion, time-respecting path extraction, rolling windows
//! and summary statistics.

mod parse;
mod stats;
mod temporal;
mod windows;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::{parse_actions, parse_paths, parse_temporal_edges, write_paths, PathFormat};
pub use stats::{stats, DatasetStats};
pub use temporal::{extract_paths, paths_from_actions, ActionRecord, TemporalEdge};
pub use windows::{rolling_windows, TimeWindow, Window};

/// Label of the synthetic start state.
pub const START_MARKER: &str = "*";
/// Label of the synthetic absorbing end state.
pub const END_MARKER: &str = "†";

/// Upper bound on a single path's multiplicity accepted from input files.
pub const MAX_MULTIPLICITY: u64 = 1 << 40;

/// Interned node identifier, an index into a [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node(u32);

impl Node {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        Node(i as u32)
    }
}

/// Bidirectional mapping between node labels and [`Node`] ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, Node>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Checks a label against the node-id invariants.
    pub fn validate_label(label: &str) -> Result<(), String> {
        if label.is_empty() {
            return Err("empty node label".into());
        }
        if label == START_MARKER || label == END_MARKER {
            return Err(format!("node label {label:?} is reserved"));
        }
        if let Some(c) = label.chars().find(|c| matches!(c, '\n' | '\r' | ';' | '|')) {
            return Err(format!("node label {label:?} contains forbidden character {c:?}"));
        }
        Ok(())
    }

    /// Returns the id of `label`, adding it if unseen.
    pub fn intern(&mut self, label: &str) -> Result<Node, String> {
        if let Some(&node) = self.index.get(label) {
            return Ok(node);
        }
        Self::validate_label(label)?;
        let node = Node::from_index(self.labels.len());
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), node);
        Ok(node)
    }

    pub fn get(&self, label: &str) -> Option<Node> {
        self.index.get(label).copied()
    }

    pub fn label(&self, node: Node) -> &str {
        &self.labels[node.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.labels.len()).map(Node::from_index)
    }

    /// Labels of a node sequence.
    pub fn labels<'a>(&'a self, nodes: &'a [Node]) -> impl Iterator<Item = &'a str> + 'a {
        nodes.iter().map(move |&n| self.label(n))
    }

    /// Compares two node sequences by their labels.
    pub fn cmp_sequences(&self, a: &[Node], b: &[Node]) -> std::cmp::Ordering {
        self.labels(a).cmp(self.labels(b))
    }

    /// Renders a node sequence as labels joined by `sep`.
    pub fn join(&self, nodes: &[Node], sep: &str) -> String {
        self.labels(nodes).collect::<Vec<_>>().join(sep)
    }
}

/// An observed path: an ordered node sequence with a multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<Node>,
    pub multiplicity: u64,
    pub start_time: Option<i64>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A multiset of paths over a shared vocabulary.
///
/// Identical `(nodes, start_time)` entries are merged on construction, so the
/// number of stored paths is the number of distinct entries while
/// [`PathDataset::total`] counts instances.
#[derive(Clone, Debug)]
pub struct PathDataset {
    vocab: Arc<Vocabulary>,
    paths: Vec<Path>,
}

impl PathDataset {
    /// Builds a dataset from comma-separated label sequences with counts.
    pub fn from_labels<I, S>(paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut builder = DatasetBuilder::new();
        for (i, (seq, count)) in paths.into_iter().enumerate() {
            let labels: Vec<&str> = seq
                .as_ref()
                .split(',')
                .map(str::trim)
                .collect();
            builder
                .push_labels(&labels, count, None)
                .map_err(|m| Error::parse(i + 1, m))?;
        }
        builder.finish()
    }

    pub(crate) fn from_parts(vocab: Arc<Vocabulary>, paths: Vec<Path>) -> Result<Self> {
        let mut builder = DatasetBuilder::with_vocabulary(vocab);
        for p in paths {
            builder.push(p.nodes, p.multiplicity, p.start_time);
        }
        builder.finish()
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    /// Total number of path instances, N.
    pub fn total(&self) -> u64 {
        self.paths.iter().map(|p| p.multiplicity).sum()
    }

    pub fn max_len(&self) -> usize {
        self.paths.iter().map(Path::len).max().unwrap_or(0)
    }

    pub fn label(&self, node: Node) -> &str {
        self.vocab.label(node)
    }

    /// Nodes that occur on at least one path, in id order.
    pub fn observed_nodes(&self) -> Vec<Node> {
        let mut seen = vec![false; self.vocab.len()];
        for p in &self.paths {
            for &n in &p.nodes {
                seen[n.index()] = true;
            }
        }
        self.vocab.nodes().filter(|n| seen[n.index()]).collect()
    }

    /// Keeps the paths matching `keep`; errors if nothing is left.
    pub fn filter(&self, mut keep: impl FnMut(&Path) -> bool) -> Result<Self> {
        let paths = self.paths.iter().filter(|p| keep(p)).cloned().collect();
        Self::from_parts(self.vocab.clone(), paths)
    }

    /// Iterates every instance once, unrolling multiplicities.
    pub fn instances(&self) -> impl Iterator<Item = &Path> {
        self.paths
            .iter()
            .flat_map(|p| std::iter::repeat_n(p, p.multiplicity as usize))
    }
}

impl fmt::Display for PathDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.paths {
            writeln!(f, "{} x{}", self.vocab.join(&p.nodes, "->"), p.multiplicity)?;
        }
        Ok(())
    }
}

/// Incrementally assembles a [`PathDataset`], merging duplicates.
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    vocab: Vocabulary,
    shared: Option<Arc<Vocabulary>>,
    paths: Vec<Path>,
    seen: HashMap<(Vec<Node>, Option<i64>), usize>,
}

impl DatasetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// A builder that only accepts labels already in `vocab`.
    pub fn with_vocabulary(vocab: Arc<Vocabulary>) -> Self {
        DatasetBuilder {
            shared: Some(vocab),
            ..Self::default()
        }
    }

    pub fn intern(&mut self, label: &str) -> Result<Node, String> {
        match &self.shared {
            Some(v) => v
                .get(label)
                .ok_or_else(|| format!("node {label:?} not in vocabulary")),
            None => self.vocab.intern(label),
        }
    }

    pub fn push_labels(
        &mut self,
        labels: &[&str],
        multiplicity: u64,
        start_time: Option<i64>,
    ) -> Result<(), String> {
        if labels.is_empty() {
            return Err("path has no nodes".into());
        }
        if multiplicity == 0 || multiplicity > MAX_MULTIPLICITY {
            return Err(format!("path count {multiplicity} out of range"));
        }
        let nodes = labels
            .iter()
            .map(|l| self.intern(l))
            .collect::<Result<Vec<_>, _>>()?;
        self.push(nodes, multiplicity, start_time);
        Ok(())
    }

    /// Adds a path of already interned nodes.
    pub fn push(&mut self, nodes: Vec<Node>, multiplicity: u64, start_time: Option<i64>) {
        debug_assert!(!nodes.is_empty() && multiplicity > 0);
        let key = (nodes, start_time);
        if let Some(&i) = self.seen.get(&key) {
            self.paths[i].multiplicity = self.paths[i].multiplicity.saturating_add(multiplicity);
            return;
        }
        self.seen.insert(key.clone(), self.paths.len());
        self.paths.push(Path {
            nodes: key.0,
            multiplicity,
            start_time,
        });
    }

    pub fn finish(self) -> Result<PathDataset> {
        if self.paths.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let vocab = self.shared.unwrap_or_else(|| Arc::new(self.vocab));
        Ok(PathDataset {
            vocab,
            paths: self.paths,
        })
    }
}
