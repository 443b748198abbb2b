//! Seeded synthetic path generators with known structure, used to exercise
//! order selection, the prediction experiment and smell detection.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pathdata::{DatasetBuilder, PathDataset};

fn intern_all(builder: &mut DatasetBuilder, labels: &[String]) {
    for l in labels {
        builder.intern(l).expect("generated labels are valid");
    }
}

/// Paths of a first-order random walk: a uniformly chosen start node, then
/// moves along a fixed sparse random transition table, stopping after each
/// step with probability `stop`.
pub fn first_order_walk(n_paths: usize, n_nodes: usize, stop: f64, seed: u64) -> Result<PathDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n_nodes).map(|i| format!("v{i}")).collect();
    let out_degree = 3.min(n_nodes);
    let table: Vec<(Vec<usize>, WeightedIndex<f64>)> = (0..n_nodes)
        .map(|_| {
            let targets: Vec<usize> = rand::seq::index::sample(&mut rng, n_nodes, out_degree).into_vec();
            let weights: Vec<f64> = targets.iter().map(|_| rng.random_range(0.2..1.0)).collect();
            (targets, WeightedIndex::new(weights).expect("positive weights"))
        })
        .collect();
    let mut builder = DatasetBuilder::new();
    intern_all(&mut builder, &labels);
    for _ in 0..n_paths {
        let mut v = rng.random_range(0..n_nodes);
        let mut path = vec![labels[v].as_str()];
        while path.len() < 64 && !rng.random_bool(stop) {
            let (targets, dist) = &table[v];
            v = targets[dist.sample(&mut rng)];
            path.push(labels[v].as_str());
        }
        builder.push_labels(&path, 1, None).expect("valid path");
    }
    builder.finish()
}

/// Two families of paths that share a middle segment, in the spirit of
/// `A -> C -> D -> E` versus `B -> C -> D -> F`.
///
/// Each path picks a family, walks through that family's own entry nodes,
/// crosses the shared segment and then walks over exit nodes that both
/// families share. The families rank the exits in opposite orders and stop
/// with different probabilities, so which exit follows and whether the path
/// ends there depends on where the path came from.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFamilies {
    pub n_paths: usize,
    /// Entry nodes per family.
    pub entry_nodes: usize,
    /// Exit nodes, shared by both families.
    pub exit_nodes: usize,
    /// Length of the shared middle segment.
    pub middle_len: usize,
    /// Longest entry walk; actual lengths are uniform in `1..=max`.
    pub max_entry_len: usize,
    /// Zipf exponent of node popularity.
    pub skew: f64,
    /// Per-family probability of stopping after each exit node.
    pub stop: [f64; 2],
    /// Hard cap on path length.
    pub max_len: usize,
}

impl Default for TwoFamilies {
    fn default() -> Self {
        TwoFamilies {
            n_paths: 1000,
            entry_nodes: 3,
            exit_nodes: 5,
            middle_len: 1,
            max_entry_len: 2,
            skew: 1.0,
            stop: [0.9, 0.1],
            max_len: 9,
        }
    }
}

impl TwoFamilies {
    pub fn generate(&self, seed: u64) -> Result<PathDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zipf = |n: usize| {
            WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).powf(self.skew))).expect("positive weights")
        };
        let entries = [0, 1].map(|f| -> Vec<String> {
            let family = if f == 0 { 'a' } else { 'b' };
            (0..self.entry_nodes).map(|i| format!("{family}{i}")).collect()
        });
        let middle: Vec<String> = (0..self.middle_len).map(|i| format!("m{i}")).collect();
        let exits: Vec<String> = (0..self.exit_nodes).map(|i| format!("x{i}")).collect();
        let (entry_pick, exit_pick) = (zipf(self.entry_nodes), zipf(self.exit_nodes));

        let mut builder = DatasetBuilder::new();
        for e in &entries {
            intern_all(&mut builder, e);
        }
        intern_all(&mut builder, &middle);
        intern_all(&mut builder, &exits);
        for _ in 0..self.n_paths {
            let family = rng.random_range(0..2usize);
            let mut path: Vec<&str> = Vec::new();
            for _ in 0..rng.random_range(1..=self.max_entry_len) {
                path.push(&entries[family][entry_pick.sample(&mut rng)]);
            }
            path.extend(middle.iter().map(String::as_str));
            loop {
                let rank = exit_pick.sample(&mut rng);
                // family b sees the exits in reverse popularity order
                let i = if family == 0 { rank } else { self.exit_nodes - 1 - rank };
                path.push(&exits[i]);
                if rng.random_bool(self.stop[family]) || path.len() >= self.max_len {
                    break;
                }
            }
            builder.push_labels(&path, 1, None).expect("valid path");
        }
        builder.finish()
    }
}

/// Timestamped development paths for one platform of a smell corpus.
///
/// Every window-length period carries `paths_per_period` paths over the team
/// `m0..m{team-1}`. A path visits 2 to 5 random members; with probability
/// `dominance` it is closed by the planted member `m0`, otherwise by a random
/// member other than `m0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmellCorpus {
    pub team: usize,
    pub periods: usize,
    pub period: i64,
    pub paths_per_period: usize,
    pub dominance: f64,
}

impl Default for SmellCorpus {
    fn default() -> Self {
        SmellCorpus {
            team: 10,
            periods: 8,
            period: 86_400 * 90,
            paths_per_period: 150,
            dominance: 0.7,
        }
    }
}

impl SmellCorpus {
    pub fn planted_member(&self) -> String {
        "m0".to_owned()
    }

    pub fn generate(&self, seed: u64) -> Result<PathDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<String> = (0..self.team).map(|i| format!("m{i}")).collect();
        let mut builder = DatasetBuilder::new();
        intern_all(&mut builder, &members);
        for period in 0..self.periods {
            for _ in 0..self.paths_per_period {
                let t = period as i64 * self.period + rng.random_range(0..self.period);
                let len = rng.random_range(2..=5);
                let mut path: Vec<&str> = (0..len - 1)
                    .map(|_| members[rng.random_range(1..self.team)].as_str())
                    .collect();
                let last = if rng.random_bool(self.dominance) {
                    0
                } else {
                    rng.random_range(1..self.team)
                };
                path.push(&members[last]);
                builder.push_labels(&path, 1, Some(t)).expect("valid path");
            }
        }
        builder.finish()
    }
}
