//! Path centralities for the three model families, their projection onto
//! first-order nodes and node sequences, and edge (order-2 state) reports.

mod edges;
mod mogen;
mod network;
mod path;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelRef, SolverOptions};
use crate::pathdata::Node;

pub use edges::{edge_centralities, EdgeEntry, EdgeReport};
pub use mogen::MoGenAnalysis;
pub use network::NetworkAnalysis;
pub use path::PathAnalysis;
pub use report::{format_sig, CentralityReport, Level, ReportRow};

/// The six measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Betweenness,
    Closeness,
    PathEnd,
    PathContinuation,
    PathReach,
    Visitation,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Betweenness,
        Measure::Closeness,
        Measure::PathEnd,
        Measure::PathContinuation,
        Measure::PathReach,
        Measure::Visitation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Betweenness => "betweenness",
            Measure::Closeness => "closeness",
            Measure::PathEnd => "path_end",
            Measure::PathContinuation => "path_continuation",
            Measure::PathReach => "path_reach",
            Measure::Visitation => "visitation",
        }
    }

    /// Whether a first-order network can express the measure.
    pub fn supported_by(self, kind: ModelKind) -> bool {
        kind != ModelKind::Network || matches!(self, Measure::Betweenness | Measure::Closeness)
    }

    fn unsupported(self, kind: ModelKind) -> Error {
        Error::UnsupportedMeasure {
            measure: self.name().to_owned(),
            model: kind.to_string(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "betweenness" => Measure::Betweenness,
            "closeness" => Measure::Closeness,
            "path_end" | "end" => Measure::PathEnd,
            "path_continuation" | "continuation" => Measure::PathContinuation,
            "path_reach" | "reach" => Measure::PathReach,
            "visitation" => Measure::Visitation,
            other => return Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        })
    }
}

/// Which way harmonic closeness measures distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Sum of 1/d(v, i): how easily v reaches the others.
    #[default]
    From,
    /// Sum of 1/d(i, v): how easily the others reach v.
    To,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CentralityOptions {
    pub closeness: Direction,
    /// MOGen betweenness as expected visits minus start and end probabilities,
    /// without the expected-termination correction. Single-node paths then
    /// score -1 instead of 0.
    pub raw_betweenness: bool,
    pub solver: SolverOptions,
}

/// Scores of one measure for one model, keyed by node sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralityVector {
    pub measure: Measure,
    pub model: ModelKind,
    pub scores: Vec<(Vec<Node>, f64)>,
}

impl CentralityVector {
    pub fn get(&self, seq: &[Node]) -> Option<f64> {
        self.scores
            .iter()
            .find(|(s, _)| s.as_slice() == seq)
            .map(|&(_, v)| v)
    }
}

/// A fitted model prepared for centrality queries.
pub enum Analysis<'a> {
    Network(NetworkAnalysis<'a>),
    Path(PathAnalysis<'a>),
    MoGen(MoGenAnalysis<'a>),
}

impl<'a> Analysis<'a> {
    pub fn new(model: ModelRef<'a>, options: &CentralityOptions) -> Result<Self> {
        Ok(match model {
            ModelRef::Network(m) => Analysis::Network(NetworkAnalysis::new(m)),
            ModelRef::Path(m) => Analysis::Path(PathAnalysis::new(m)),
            ModelRef::MoGen(m) => Analysis::MoGen(MoGenAnalysis::new(m, options.solver)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Analysis::Network(_) => ModelKind::Network,
            Analysis::Path(_) => ModelKind::Path,
            Analysis::MoGen(_) => ModelKind::MoGen,
        }
    }

    /// Nodes that occur in the model, in id order.
    pub fn nodes(&self) -> Vec<Node> {
        match self {
            Analysis::Network(a) => a.model().nodes().to_vec(),
            Analysis::Path(a) => a.model().data().observed_nodes(),
            Analysis::MoGen(a) => a.nodes(),
        }
    }

    /// Whether each sequence is represented in the model: a node of the
    /// network, an observed sub-path, or the suffix of some MOGen state.
    pub fn available(&self, sequences: &[Vec<Node>]) -> Vec<bool> {
        match self {
            Analysis::Network(a) => sequences
                .iter()
                .map(|s| s.len() == 1 && a.model().nodes().binary_search(&s[0]).is_ok())
                .collect(),
            Analysis::Path(a) => a.occurs(sequences),
            Analysis::MoGen(a) => sequences
                .iter()
                .map(|s| !a.states_ending_in(s).is_empty())
                .collect(),
        }
    }

    /// Scores of node sequences. Sequences of length one are first-order
    /// nodes; longer ones aggregate every state or occurrence ending in that
    /// sequence. A network only scores single nodes.
    pub fn sequence_scores(
        &self,
        measure: Measure,
        sequences: &[Vec<Node>],
        options: &CentralityOptions,
    ) -> Result<Vec<f64>> {
        if !measure.supported_by(self.kind()) {
            return Err(measure.unsupported(self.kind()));
        }
        if sequences.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidArgument("empty node sequence".into()));
        }
        match self {
            Analysis::Network(a) => a.sequence_scores(measure, sequences, options),
            Analysis::Path(a) => Ok(a.sequence_scores(measure, sequences, options)),
            Analysis::MoGen(a) => Ok(a.sequence_scores(measure, sequences, options)),
        }
    }

    /// First-order projection over the model's nodes.
    pub fn first_order(&self, measure: Measure, options: &CentralityOptions) -> Result<CentralityVector> {
        let seqs: Vec<Vec<Node>> = self.nodes().into_iter().map(|n| vec![n]).collect();
        let values = self.sequence_scores(measure, &seqs, options)?;
        Ok(CentralityVector {
            measure,
            model: self.kind(),
            scores: seqs.into_iter().zip(values).collect(),
        })
    }
}

/// First-order scores of `measure` for any model.
pub fn first_order(
    model: ModelRef<'_>,
    measure: Measure,
    options: &CentralityOptions,
) -> Result<CentralityVector> {
    if !measure.supported_by(model.kind()) {
        return Err(measure.unsupported(model.kind()));
    }
    Analysis::new(model, options)?.first_order(measure, options)
}

macro_rules! measure_fn {
    ($(#[$doc:meta])* $name:ident, $measure:expr) => {
        $(#[$doc])*
        pub fn $name(model: ModelRef<'_>, options: &CentralityOptions) -> Result<CentralityVector> {
            first_order(model, $measure, options)
        }
    };
}

measure_fn!(
    /// Shortest-path betweenness for a network, interior occurrence counts
    /// for paths, expected interior visits scaled to the training size for
    /// MOGen.
    betweenness,
    Measure::Betweenness
);
measure_fn!(
    /// Harmonic closeness, with unreachable pairs contributing 0.
    closeness,
    Measure::Closeness
);
measure_fn!(
    /// Probability that a path ends in each node.
    path_end,
    Measure::PathEnd
);
measure_fn!(
    /// Probability that a path continues after visiting each node.
    path_continuation,
    Measure::PathContinuation
);
measure_fn!(
    /// Expected number of transitions remaining after each node.
    path_reach,
    Measure::PathReach
);
measure_fn!(
    /// Share of all node occurrences.
    visitation,
    Measure::Visitation
);

/// Pairwise first-order distances; `None` where unreachable.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    pub nodes: Vec<Node>,
    pub distances: Vec<Vec<Option<u32>>>,
}

impl DistanceMatrix {
    pub fn get(&self, from: Node, to: Node) -> Option<u32> {
        let i = self.nodes.binary_search(&from).ok()?;
        let j = self.nodes.binary_search(&to).ok()?;
        self.distances[i][j]
    }
}

/// Shortest first-order distances: network hops, shortest observed sub-path
/// for the path model, and the multi-order topology minimised over state
/// pairs for MOGen.
pub fn distance_matrix(model: ModelRef<'_>, options: &CentralityOptions) -> Result<DistanceMatrix> {
    let analysis = Analysis::new(model, options)?;
    let nodes = analysis.nodes();
    let n_vocab = model.vocabulary().len();
    let distances = nodes
        .iter()
        .map(|&v| {
            let row = match &analysis {
                Analysis::Network(a) => a.distances(v, Direction::From),
                Analysis::Path(a) => a.distances(&[v], Direction::From, n_vocab),
                Analysis::MoGen(a) => a.distances(&[v], Direction::From),
            };
            nodes
                .iter()
                .map(|&u| if u == v { Some(0) } else { row[u.index()] })
                .collect()
        })
        .collect();
    Ok(DistanceMatrix { nodes, distances })
}

/// Harmonic sum over targets other than `exclude`.
fn harmonic(distances: &[Option<u32>], exclude: Node) -> f64 {
    distances
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != exclude.index())
        .filter_map(|(_, d)| *d)
        .map(|d| 1.0 / d as f64)
        .sum()
}
