use std::collections::HashMap;

use super::{DatasetBuilder, Node, PathDataset};
use crate::error::{Error, Result};

/// A time-stamped directed interaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalEdge {
    pub source: String,
    pub target: String,
    pub time: i64,
}

impl TemporalEdge {
    pub fn new(source: &str, target: &str, time: i64) -> Self {
        TemporalEdge {
            source: source.to_owned(),
            target: target.to_owned(),
            time,
        }
    }
}

/// A time-stamped action by `actor`, grouped under `key` (e.g. an issue id).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionRecord {
    pub key: String,
    pub actor: String,
    pub time: i64,
}

impl ActionRecord {
    pub fn new(key: &str, actor: &str, time: i64) -> Self {
        ActionRecord {
            key: key.to_owned(),
            actor: actor.to_owned(),
            time,
        }
    }
}

/// Builds one path per key, ordering each key's actors by timestamp. Equal
/// timestamps keep their input order.
pub fn paths_from_actions(records: &[ActionRecord]) -> Result<PathDataset> {
    let mut groups: Vec<(&str, Vec<&ActionRecord>)> = Vec::new();
    let mut by_key: HashMap<&str, usize> = HashMap::new();
    for r in records {
        if r.key.is_empty() {
            return Err(Error::InvalidArgument("action record with empty key".into()));
        }
        let slot = *by_key.entry(&r.key).or_insert_with(|| {
            groups.push((&r.key, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(r);
    }

    let mut builder = DatasetBuilder::new();
    for (key, mut actions) in groups {
        actions.sort_by_key(|r| r.time);
        let labels: Vec<&str> = actions.iter().map(|r| r.actor.as_str()).collect();
        builder
            .push_labels(&labels, 1, Some(actions[0].time))
            .map_err(|m| Error::InvalidArgument(format!("key {key:?}: {m}")))?;
    }
    builder.finish()
}

struct Chain {
    nodes: Vec<Node>,
    start: i64,
    last_time: i64,
}

/// Splits a temporal network into maximal time-respecting paths.
///
/// Edges are consumed in ascending time (input order on ties). An edge
/// `(v, w; t)` extends the oldest open chain that currently ends in `v` at a
/// time `t0` with `t0 < t <= t0 + delta`; otherwise it starts a new chain.
/// Every edge ends up on exactly one emitted path.
pub fn extract_paths(edges: &[TemporalEdge], delta: i64) -> Result<PathDataset> {
    if delta <= 0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let mut builder = DatasetBuilder::new();
    let mut order: Vec<(i64, usize, Node, Node)> = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let s = builder.intern(&e.source).map_err(Error::InvalidArgument)?;
        let t = builder.intern(&e.target).map_err(Error::InvalidArgument)?;
        order.push((e.time, i, s, t));
    }
    order.sort_unstable_by_key(|&(time, i, _, _)| (time, i));

    let mut chains: Vec<Chain> = Vec::new();
    // open chain ids per current end node, in creation order
    let mut open: HashMap<Node, Vec<usize>> = HashMap::new();
    for (time, _, source, target) in order {
        let mut chosen = None;
        if let Some(ids) = open.get_mut(&source) {
            ids.retain(|&c| time.saturating_sub(chains[c].last_time) <= delta);
            if let Some(pos) = ids.iter().position(|&c| chains[c].last_time < time) {
                chosen = Some(ids.remove(pos));
            }
        }
        let id = match chosen {
            Some(c) => {
                let chain = &mut chains[c];
                chain.nodes.push(target);
                chain.last_time = time;
                c
            }
            None => {
                chains.push(Chain {
                    nodes: vec![source, target],
                    start: time,
                    last_time: time,
                });
                chains.len() - 1
            }
        };
        let ids = open.entry(target).or_default();
        // keep ids sorted so the first eligible entry is the oldest chain
        let at = ids.partition_point(|&c| c < id);
        ids.insert(at, id);
    }

    for chain in chains {
        builder.push(chain.nodes, 1, Some(chain.start));
    }
    builder.finish()
}
