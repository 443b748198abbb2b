use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathdata::{Path, PathDataset};

const MAX_ATTEMPTS: u64 = 100;

/// Train/test split settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub replicates: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.3,
            seed: 0,
            replicates: 5,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidArgument("at least one replicate required".into()));
        }
        Ok(())
    }
}

/// Random generator for one `(replicate, attempt)` pair, derived from the
/// seed by stream selection so replicates never share draws.
pub(crate) fn stream(seed: u64, replicate: usize, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replicate as u64) << 8) | attempt);
    rng
}

/// Split of replicate 0.
pub fn split(ds: &PathDataset, spec: &SplitSpec) -> Result<(PathDataset, PathDataset)> {
    split_replicate(ds, spec, 0)
}

/// Assigns every path instance independently to the training side with
/// probability `train_fraction`. Both sides share the input vocabulary.
pub fn split_replicate(
    ds: &PathDataset,
    spec: &SplitSpec,
    replicate: usize,
) -> Result<(PathDataset, PathDataset)> {
    spec.validate()?;
    if ds.total() < 2 {
        return Err(Error::DegenerateSplit(0));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream(spec.seed, replicate, attempt);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for p in ds.paths() {
            let binom = Binomial::new(p.multiplicity, spec.train_fraction)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let k = binom.sample(&mut rng);
            let part = |m: u64| Path {
                multiplicity: m,
                ..p.clone()
            };
            if k > 0 {
                train.push(part(k));
            }
            if k < p.multiplicity {
                test.push(part(p.multiplicity - k));
            }
        }
        if !train.is_empty() && !test.is_empty() {
            let vocab = ds.vocabulary().clone();
            return Ok((
                PathDataset::from_parts(vocab.clone(), train)?,
                PathDataset::from_parts(vocab, test)?,
            ));
        }
    }
    Err(Error::DegenerateSplit(MAX_ATTEMPTS as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(fraction: f64, seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: fraction,
            seed,
            replicates: 5,
        }
    }

    #[test]
    fn deterministic_and_roughly_binomial() {
        let ds = PathDataset::from_labels((0..1000).map(|i| (format!("n{},x", i % 37), 1))).unwrap();
        let (a, b) = split(&ds, &spec(0.3, 7)).unwrap();
        let (a2, b2) = split(&ds, &spec(0.3, 7)).unwrap();
        assert_eq!(a.paths(), a2.paths());
        assert_eq!(b.paths(), b2.paths());
        assert_eq!(a.total() + b.total(), 1000);
        // 5 standard deviations of Binomial(1000, 0.3)
        assert!((a.total() as i64 - 300).abs() < 73, "{}", a.total());
    }

    #[test]
    fn two_instances_end_up_one_each() {
        let ds = PathDataset::from_labels([("A,B", 1), ("C", 1)]).unwrap();
        for seed in 0..20 {
            let (a, b) = split(&ds, &spec(0.5, seed)).unwrap();
            assert_eq!((a.total(), b.total()), (1, 1));
        }
    }

    #[test]
    fn multiplicities_can_straddle() {
        let ds = PathDataset::from_labels([("A,B", 3)]).unwrap();
        let straddled = (0..50).any(|seed| {
            let (a, b) = split(&ds, &spec(0.5, seed)).unwrap();
            a.total() + b.total() == 3 && a.paths()[0].nodes == b.paths()[0].nodes
        });
        assert!(straddled);
    }

    #[test]
    fn replicates_differ() {
        let ds = PathDataset::from_labels((0..200).map(|i| (format!("n{i}"), 1))).unwrap();
        let s = spec(0.5, 1);
        let (a, _) = split_replicate(&ds, &s, 0).unwrap();
        let (b, _) = split_replicate(&ds, &s, 1).unwrap();
        assert_ne!(a.paths(), b.paths());
    }

    #[test]
    fn single_instance_is_degenerate() {
        let ds = PathDataset::from_labels([("A", 1)]).unwrap();
        assert!(matches!(split(&ds, &spec(0.5, 0)), Err(Error::DegenerateSplit(_))));
    }

    #[test]
    fn bad_fraction_rejected() {
        let ds = PathDataset::from_labels([("A", 2)]).unwrap();
        assert!(split(&ds, &spec(1.0, 0)).is_err());
        assert!(split(&ds, &spec(0.0, 0)).is_err());
    }
}
