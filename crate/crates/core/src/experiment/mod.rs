//! Prediction experiment: fit each model family on a training split, rank
//! the node sequences of the test split by their path-model centralities and
//! score how well each model's predictions find the top decile.

mod auc;
mod split;
mod truth;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{Analysis, CentralityOptions, Measure};
use crate::error::{Error, Result};
use crate::models::{fit_mogen, fit_network, ModelRef, PathModel};
use crate::pathdata::{Node, PathDataset};

pub use auc::auc;
pub use split::{split, split_replicate, SplitSpec};
pub use truth::{ground_truth, project_up, sub_paths, Fallback, GroundTruth};

/// Share of the ground truth labelled positive.
pub const TOP_FRACTION: f64 = 0.1;
/// Fewest ranked states that still give a meaningful decile.
pub const MIN_TARGETS: usize = 10;

/// A model family entering the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelSpec {
    Network,
    MoGen(usize),
    Path,
}

impl ModelSpec {
    /// Longest sequence the model scores directly.
    fn max_len(self, k_truth: usize) -> usize {
        match self {
            ModelSpec::Network => 1,
            ModelSpec::MoGen(k) => k,
            ModelSpec::Path => k_truth,
        }
    }

    fn kind(self) -> crate::models::ModelKind {
        use crate::models::ModelKind;
        match self {
            ModelSpec::Network => ModelKind::Network,
            ModelSpec::MoGen(_) => ModelKind::MoGen,
            ModelSpec::Path => ModelKind::Path,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Network => f.write_str("N"),
            ModelSpec::MoGen(k) => write!(f, "M{k}"),
            ModelSpec::Path => f.write_str("P"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "N" | "n" | "network" => Ok(ModelSpec::Network),
            "P" | "p" | "path" => Ok(ModelSpec::Path),
            _ => s
                .strip_prefix(['M', 'm'])
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(ModelSpec::MoGen)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Whether states of different lengths compete in one ranking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One ranking over all lengths.
    #[default]
    Mixed,
    /// A separate decile and AUC per sequence length, averaged.
    PerOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Longest test sub-path in the ground truth.
    pub k_truth: usize,
    pub pooling: Pooling,
    pub fallback: Fallback,
    pub centrality: CentralityOptions,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            k_truth: 5,
            pooling: Pooling::Mixed,
            fallback: Fallback::Minimum,
            centrality: CentralityOptions::default(),
        }
    }
}

/// Mean and per-replicate AUC of one model on one measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AUCResult {
    pub model: ModelSpec,
    pub measure: Measure,
    pub mean_auc: f64,
    pub replicate_aucs: Vec<f64>,
}

/// AUC of predictions against the top-decile labels of `truth`.
/// Targets without a prediction are dropped.
pub fn score_predictions(
    truth: &GroundTruth,
    predictions: &[Option<f64>],
    pooling: Pooling,
) -> Result<f64> {
    let groups: Vec<Vec<usize>> = match pooling {
        Pooling::Mixed => vec![(0..truth.len()).collect()],
        Pooling::PerOrder => {
            let mut by_len: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for (i, (s, _)) in truth.ranking.iter().enumerate() {
                by_len.entry(s.len()).or_default().push(i);
            }
            by_len.into_values().filter(|g| g.len() >= MIN_TARGETS).collect()
        }
    };
    if groups.is_empty() || groups[0].len() < MIN_TARGETS {
        return Err(Error::TargetSetTooSmall(truth.len()));
    }
    let mut aucs = Vec::new();
    for g in &groups {
        // ranking order within the group, so ceil(0.1 n) leads are positive
        let positives = (TOP_FRACTION * g.len() as f64).ceil() as usize;
        let mut labels = Vec::new();
        let mut scores = Vec::new();
        for (rank, &i) in g.iter().enumerate() {
            if let Some(p) = predictions[i] {
                labels.push(rank < positives);
                scores.push(p);
            }
        }
        if let Some(a) = auc(&labels, &scores) {
            aucs.push(a);
        }
    }
    if aucs.is_empty() {
        return Err(Error::TargetSetTooSmall(0));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Predictions of a fitted model for the ground-truth targets.
fn predict(
    analysis: &Analysis<'_>,
    spec: ModelSpec,
    measure: Measure,
    targets: &[Vec<Node>],
    options: &ExperimentOptions,
) -> Result<Vec<Option<f64>>> {
    let max_len = spec.max_len(options.k_truth);
    let mut candidates: Vec<Vec<Node>> = targets
        .iter()
        .flat_map(|t| (1..=max_len.min(t.len())).map(move |k| t[t.len() - k..].to_vec()))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let present = analysis.available(&candidates);
    let candidates: Vec<Vec<Node>> = candidates
        .into_iter()
        .zip(present)
        .filter_map(|(c, keep)| keep.then_some(c))
        .collect();
    let values = analysis.sequence_scores(measure, &candidates, &options.centrality)?;
    let scores: HashMap<Vec<Node>, f64> = candidates.into_iter().zip(values).collect();
    Ok(project_up(&scores, targets, options.fallback))
}

fn run_replicate(
    ds: &PathDataset,
    spec: &SplitSpec,
    replicate: usize,
    models: &[ModelSpec],
    measures: &[Measure],
    options: &ExperimentOptions,
) -> Result<Vec<Option<f64>>> {
    let (train, test) = split_replicate(ds, spec, replicate)?;
    let targets = sub_paths(&test, options.k_truth);
    if targets.len() < MIN_TARGETS {
        return Err(Error::TargetSetTooSmall(targets.len()));
    }
    let network = fit_network(&train)?;
    let path = PathModel::new(train.clone());
    let mogens = models
        .iter()
        .filter_map(|m| match m {
            ModelSpec::MoGen(k) => Some((*k, fit_mogen(&train, *k))),
            _ => None,
        })
        .map(|(k, m)| m.map(|m| (k, m)))
        .collect::<Result<HashMap<_, _>>>()?;
    let analyses = models
        .iter()
        .map(|spec| {
            let model = match spec {
                ModelSpec::Network => ModelRef::Network(&network),
                ModelSpec::Path => ModelRef::Path(&path),
                ModelSpec::MoGen(k) => ModelRef::MoGen(&mogens[k]),
            };
            Analysis::new(model, &options.centrality)
        })
        .collect::<Result<Vec<_>>>()?;

    let test_model = PathModel::new(test.clone());
    let test_analysis = crate::centrality::PathAnalysis::new(&test_model);
    let mut out = Vec::with_capacity(measures.len() * models.len());
    for &measure in measures {
        let truth_scores = test_analysis.sequence_scores(measure, &targets, &options.centrality);
        let truth = truth::rank(&test, measure, targets.iter().cloned().zip(truth_scores).collect());
        let ranked: Vec<Vec<Node>> = truth.ranking.iter().map(|(s, _)| s.clone()).collect();
        for (spec, analysis) in models.iter().zip(&analyses) {
            if !measure.supported_by(spec.kind()) {
                out.push(None);
                continue;
            }
            let predictions = predict(analysis, *spec, measure, &ranked, options)?;
            out.push(Some(score_predictions(&truth, &predictions, options.pooling)?));
        }
    }
    Ok(out)
}

/// Runs every replicate and averages the AUC of each (measure, model) pair.
/// Pairs a model cannot compute, such as path end for a network, are left
/// out.
pub fn evaluate(
    ds: &PathDataset,
    spec: &SplitSpec,
    models: &[ModelSpec],
    measures: &[Measure],
    options: &ExperimentOptions,
) -> Result<Vec<AUCResult>> {
    spec.validate()?;
    if options.k_truth < 1 {
        return Err(Error::InvalidArgument("k_truth must be at least 1".into()));
    }
    let per_replicate = (0..spec.replicates)
        .into_par_iter()
        .map(|r| run_replicate(ds, spec, r, models, measures, options))
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::new();
    for (mi, &measure) in measures.iter().enumerate() {
        for (si, &model) in models.iter().enumerate() {
            let cell = mi * models.len() + si;
            let aucs: Option<Vec<f64>> = per_replicate.iter().map(|r| r[cell]).collect();
            if let Some(aucs) = aucs {
                results.push(AUCResult {
                    model,
                    measure,
                    mean_auc: aucs.iter().sum::<f64>() / aucs.len() as f64,
                    replicate_aucs: aucs,
                });
            }
        }
    }
    Ok(results)
}

/// Writes a table with one row per dataset and one `measure:model` column per
/// evaluated pair, cells holding the mean AUC to three decimals.
pub fn write_table(out: impl Write, rows: &[(&str, &[AUCResult])]) -> Result<()> {
    let mut columns: Vec<(Measure, ModelSpec)> = Vec::new();
    for (_, results) in rows {
        for r in results.iter() {
            if !columns.contains(&(r.measure, r.model)) {
                columns.push((r.measure, r.model));
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("dataset".to_owned())
        .chain(columns.iter().map(|(m, s)| format!("{m}:{s}")))
        .collect();
    w.write_record(&header)?;
    for (name, results) in rows {
        let mut record = vec![name.to_string()];
        for &(m, s) in &columns {
            let cell = results
                .iter()
                .find(|r| r.measure == m && r.model == s)
                .map(|r| format!("{:.3}", r.mean_auc))
                .unwrap_or_default();
            record.push(cell);
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
