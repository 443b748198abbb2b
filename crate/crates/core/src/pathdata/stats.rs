use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::PathDataset;
use crate::error::Result;

/// Summary statistics of a path dataset. Path lengths count nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total_paths: u64,
    pub unique_paths: u64,
    pub mean_len: f64,
    pub median_len: f64,
    pub n_nodes: u64,
    pub n_links: u64,
}

pub fn stats(ds: &PathDataset) -> Result<DatasetStats> {
    let total = ds.total();
    let mut unique = HashSet::new();
    let mut links = HashSet::new();
    let mut length_sum = 0u128;
    let mut lengths: Vec<(usize, u64)> = Vec::with_capacity(ds.paths().len());
    for p in ds.paths() {
        unique.insert(p.nodes.as_slice());
        links.extend(p.nodes.windows(2).map(|w| (w[0], w[1])));
        length_sum += p.len() as u128 * p.multiplicity as u128;
        lengths.push((p.len(), p.multiplicity));
    }
    lengths.sort_unstable();

    Ok(DatasetStats {
        total_paths: total,
        unique_paths: unique.len() as u64,
        mean_len: length_sum as f64 / total as f64,
        median_len: weighted_median(&lengths, total),
        n_nodes: ds.observed_nodes().len() as u64,
        n_links: links.len() as u64,
    })
}

/// Median of the multiset given as sorted `(value, count)` pairs; even totals
/// average the two middle values.
fn weighted_median(sorted: &[(usize, u64)], total: u64) -> f64 {
    let nth = |k: u64| {
        let mut seen = 0;
        for &(v, c) in sorted {
            seen += c;
            if seen > k {
                return v as f64;
            }
        }
        unreachable!("rank beyond total")
    };
    if total % 2 == 1 {
        nth(total / 2)
    } else {
        (nth(total / 2 - 1) + nth(total / 2)) / 2.0
    }
}
