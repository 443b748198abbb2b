//! Longitudinal smell detection: per-window MOGen centralities for every team
//! member, deviation from the team mean, member ranking, and evidence for
//! bottleneck, silo and code-red hypotheses.
//!
//! Evidence flags are candidates for human review, not verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{edge_centralities, Analysis, CentralityOptions, EdgeReport, Measure};
use crate::error::{Error, Result};
use crate::models::{fit_mogen, select_order, ModelRef};
use crate::pathdata::{rolling_windows, Node, PathDataset, TimeWindow, Window};

mod series;

pub use series::write_member_csv;

/// How the maximum order of each window's model is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderChoice {
    Fixed(usize),
    /// Lowest-AIC order in `1..=k_max`, chosen per window.
    Select { k_max: usize },
}

impl Default for OrderChoice {
    fn default() -> Self {
        OrderChoice::Select { k_max: 3 }
    }
}

/// Per-window first-order centralities of one platform.
///
/// `values[member][measure][t]` is `None` in windows where the member does
/// not occur; `means[measure][t]` is the mean over active members and `None`
/// for empty windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlatformSeries {
    pub platform: String,
    pub windows: Vec<Window>,
    /// Maximum order fitted in each window; `None` for empty windows.
    pub orders: Vec<Option<usize>>,
    pub measures: Vec<Measure>,
    pub values: BTreeMap<String, BTreeMap<Measure, Vec<Option<f64>>>>,
    pub means: BTreeMap<Measure, Vec<Option<f64>>>,
}

impl PlatformSeries {
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn series(&self, member: &str, measure: Measure) -> Option<&[Option<f64>]> {
        self.values.get(member)?.get(&measure).map(Vec::as_slice)
    }

    pub fn active(&self, member: &str, t: usize) -> bool {
        self.values
            .get(member)
            .is_some_and(|m| m.values().any(|s| s[t].is_some()))
    }
}

struct WindowValues {
    order: usize,
    // member label -> value per measure, in `measures` order
    members: BTreeMap<String, Vec<f64>>,
}

fn fit_window(
    ds: &PathDataset,
    order: OrderChoice,
    measures: &[Measure],
    options: &CentralityOptions,
) -> Result<WindowValues> {
    let k = match order {
        OrderChoice::Fixed(k) => k,
        OrderChoice::Select { k_max } => select_order(ds, k_max)?,
    };
    let model = fit_mogen(ds, k)?;
    let analysis = Analysis::new(ModelRef::MoGen(&model), options)?;
    let nodes = ds.observed_nodes();
    let seqs: Vec<Vec<Node>> = nodes.iter().map(|&n| vec![n]).collect();
    let per_measure = measures
        .iter()
        .map(|&m| analysis.sequence_scores(m, &seqs, options))
        .collect::<Result<Vec<_>>>()?;
    let members = nodes
        .iter()
        .enumerate()
        .map(|(i, &n)| (ds.label(n).to_owned(), per_measure.iter().map(|v| v[i]).collect()))
        .collect();
    Ok(WindowValues { order: k, members })
}

/// Fits one MOGen model per non-empty window and collects the first-order
/// centralities of every member. Empty windows become gaps.
pub fn windowed_centralities(
    platform: &str,
    windows: &[(Window, Option<PathDataset>)],
    order: OrderChoice,
    measures: &[Measure],
    options: &CentralityOptions,
) -> Result<PlatformSeries> {
    if let OrderChoice::Fixed(0) | OrderChoice::Select { k_max: 0 } = order {
        return Err(Error::InvalidArgument("maximum order must be at least 1".into()));
    }
    if windows.iter().all(|(_, ds)| ds.is_none()) {
        return Err(Error::EmptyDataset);
    }
    if windows.windows(2).any(|w| w[0].0.start >= w[1].0.start) {
        return Err(Error::InvalidArgument("windows must be strictly ordered".into()));
    }
    let fitted: Vec<Option<WindowValues>> = windows
        .par_iter()
        .map(|(_, ds)| ds.as_ref().map(|d| fit_window(d, order, measures, options)).transpose())
        .collect::<Result<_>>()?;

    let n = windows.len();
    let mut values: BTreeMap<String, BTreeMap<Measure, Vec<Option<f64>>>> = BTreeMap::new();
    let mut means: BTreeMap<Measure, Vec<Option<f64>>> =
        measures.iter().map(|&m| (m, vec![None; n])).collect();
    for (t, w) in fitted.iter().enumerate() {
        let Some(w) = w else { continue };
        for (member, vals) in &w.members {
            let slot = values.entry(member.clone()).or_insert_with(|| {
                measures.iter().map(|&m| (m, vec![None; n])).collect()
            });
            for (m, &v) in measures.iter().zip(vals) {
                slot.get_mut(m).expect("measure slot")[t] = Some(v);
            }
        }
        let active = w.members.len() as f64;
        for (c, m) in measures.iter().enumerate() {
            let sum: f64 = w.members.values().map(|v| v[c]).sum();
            means.get_mut(m).expect("measure slot")[t] = Some(sum / active);
        }
    }
    Ok(PlatformSeries {
        platform: platform.to_owned(),
        windows: windows.iter().map(|(w, _)| *w).collect(),
        orders: fitted.iter().map(|w| w.as_ref().map(|w| w.order)).collect(),
        measures: measures.to_vec(),
        values,
        means,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationOptions {
    /// Terms whose team mean is below this in magnitude are skipped.
    pub epsilon: f64,
    /// Count windows where a member is absent as value 0 instead of skipping them.
    pub strict_absence: bool,
}

impl Default for DeviationOptions {
    fn default() -> Self {
        DeviationOptions {
            epsilon: 1e-9,
            strict_absence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationScore {
    pub member: String,
    /// Score per platform; 0 on platforms where the member never occurs.
    pub per_platform: BTreeMap<String, f64>,
    /// Mean of the platform scores.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviations {
    pub scores: Vec<DeviationScore>,
    /// (platform, measure, window) cells skipped because the team mean was near zero.
    pub skipped_terms: usize,
}

/// Relative deviation of each member from the team mean, summed over
/// measures and windows per platform, then averaged over platforms.
/// Members are listed in label order.
pub fn deviation_scores(series: &[PlatformSeries], options: &DeviationOptions) -> Deviations {
    let members: BTreeSet<&str> = series.iter().flat_map(|s| s.members()).collect();
    let mut skipped_terms = 0;
    for s in series {
        skipped_terms += s
            .means
            .values()
            .flatten()
            .filter(|m| m.is_some_and(|m| m.abs() < options.epsilon))
            .count();
    }
    let scores = members
        .into_iter()
        .map(|member| {
            let per_platform: BTreeMap<String, f64> = series
                .iter()
                .map(|s| (s.platform.clone(), platform_score(s, member, options)))
                .collect();
            let score = if series.is_empty() {
                0.0
            } else {
                per_platform.values().sum::<f64>() / series.len() as f64
            };
            DeviationScore {
                member: member.to_owned(),
                per_platform,
                score,
            }
        })
        .collect();
    Deviations {
        scores,
        skipped_terms,
    }
}

fn platform_score(s: &PlatformSeries, member: &str, options: &DeviationOptions) -> f64 {
    let Some(values) = s.values.get(member) else {
        return 0.0;
    };
    let mut total = 0.0;
    for (measure, means) in &s.means {
        let Some(own) = values.get(measure) else { continue };
        for (v, mean) in own.iter().zip(means) {
            let Some(mean) = *mean else { continue };
            if mean.abs() < options.epsilon {
                continue;
            }
            let v = match v {
                Some(v) => *v,
                None if options.strict_absence => 0.0,
                None => continue,
            };
            total += ((v - mean) / mean).abs();
        }
    }
    total
}

/// The `top_n` highest scores, ties broken by label.
pub fn rank_members(scores: &[DeviationScore], top_n: usize) -> Vec<&DeviationScore> {
    let mut ranked: Vec<&DeviationScore> = scores.iter().collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.member.cmp(&b.member)));
    ranked.truncate(top_n);
    ranked
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceThresholds {
    /// Path-end share that counts as dominating the final position.
    pub end_share: f64,
    /// Consecutive dominated windows needed to raise the flag.
    pub min_run: usize,
    /// Path-end share that counts as performing the closing role.
    pub role_share: f64,
    /// A window with at most this many role performers is a code-red candidate.
    pub max_performers: usize,
    /// Visitation share an order-2 state needs to count as a partner.
    pub min_visitation: f64,
}

impl Default for EvidenceThresholds {
    fn default() -> Self {
        EvidenceThresholds {
            end_share: 0.5,
            min_run: 4,
            role_share: 0.05,
            max_performers: 3,
            min_visitation: 0.02,
        }
    }
}

/// Inclusive range of window indices with the time span they cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowRange {
    pub first: usize,
    pub last: usize,
    pub start: i64,
    pub end: i64,
}

/// A window in which few members close paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeRedWindow {
    pub window: usize,
    pub start: i64,
    pub performers: Vec<String>,
}

/// Order-2 interaction partners above the visitation threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Breadth {
    /// Members `u` with a frequent state `(u, member)`.
    pub in_partners: Vec<String>,
    /// Members `w` with a frequent state `(member, w)`.
    pub out_partners: Vec<String>,
    pub partners: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmellEvidence {
    pub member: String,
    pub platform: String,
    pub path_end: Option<Vec<Option<f64>>>,
    pub betweenness: Option<Vec<Option<f64>>>,
    pub end_dominance: bool,
    pub dominated_runs: Vec<WindowRange>,
    /// Code-red candidate windows in which the member is one of the few performers.
    pub sole_performer: Vec<CodeRedWindow>,
    pub breadth: Option<Breadth>,
}

/// Runs of consecutive windows where the series is at least `threshold`.
fn runs_above(series: &[Option<f64>], threshold: f64, windows: &[Window], min_len: usize) -> Vec<WindowRange> {
    let mut runs = Vec::new();
    let mut start = None;
    for t in 0..=series.len() {
        let hit = t < series.len() && series[t].is_some_and(|v| v >= threshold);
        match (hit, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                if t - s >= min_len {
                    runs.push(WindowRange {
                        first: s,
                        last: t - 1,
                        start: windows[s].start,
                        end: windows[t - 1].end,
                    });
                }
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Windows where at most `max_performers` members reach `role_share` of path ends.
pub fn code_red_windows(series: &PlatformSeries, th: &EvidenceThresholds) -> Vec<CodeRedWindow> {
    if !series.measures.contains(&Measure::PathEnd) {
        return Vec::new();
    }
    (0..series.windows.len())
        .filter(|&t| !series.windows[t].empty)
        .filter_map(|t| {
            let performers: Vec<String> = series
                .values
                .iter()
                .filter(|(_, v)| v[&Measure::PathEnd][t].is_some_and(|x| x >= th.role_share))
                .map(|(m, _)| m.clone())
                .collect();
            (performers.len() <= th.max_performers).then(|| CodeRedWindow {
                window: t,
                start: series.windows[t].start,
                performers,
            })
        })
        .collect()
}

/// Frequent order-2 partners of `member` in an edge report.
pub fn breadth(edges: &EdgeReport, member: &str) -> Option<Breadth> {
    let node = edges.vocab.get(member)?;
    let label = |n: Node| edges.vocab.label(n).to_owned();
    let mut in_partners: Vec<String> = edges.with_target(node).map(|e| label(e.source)).collect();
    let mut out_partners: Vec<String> = edges.with_source(node).map(|e| label(e.target)).collect();
    in_partners.sort();
    out_partners.sort();
    let partners = in_partners.len() + out_partners.len();
    Some(Breadth {
        in_partners,
        out_partners,
        partners,
    })
}

pub fn evidence(
    series: &PlatformSeries,
    edges: Option<&EdgeReport>,
    member: &str,
    th: &EvidenceThresholds,
) -> Result<SmellEvidence> {
    let known = series.values.contains_key(member)
        || edges.is_some_and(|e| e.vocab.get(member).is_some());
    if !known {
        return Err(Error::UnknownMember(member.to_owned()));
    }
    let path_end = series.series(member, Measure::PathEnd).map(<[_]>::to_vec);
    let dominated_runs = path_end
        .as_deref()
        .map(|s| runs_above(s, th.end_share, &series.windows, th.min_run.max(1)))
        .unwrap_or_default();
    let sole_performer = code_red_windows(series, th)
        .into_iter()
        .filter(|w| w.performers.iter().any(|p| p == member))
        .collect();
    Ok(SmellEvidence {
        member: member.to_owned(),
        platform: series.platform.clone(),
        betweenness: series.series(member, Measure::Betweenness).map(<[_]>::to_vec),
        end_dominance: !dominated_runs.is_empty(),
        path_end,
        dominated_runs,
        sole_performer,
        breadth: edges.and_then(|e| breadth(e, member)),
    })
}

/// Everything the smell pipeline needs besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmellConfig {
    pub window: TimeWindow,
    pub order: OrderChoice,
    pub measures: Vec<Measure>,
    pub centrality: CentralityOptions,
    pub deviation: DeviationOptions,
    pub top_n: usize,
    pub thresholds: EvidenceThresholds,
}

impl Default for SmellConfig {
    fn default() -> Self {
        SmellConfig {
            window: TimeWindow::new(365 * 86_400, 90 * 86_400),
            order: OrderChoice::default(),
            measures: Measure::ALL.to_vec(),
            centrality: CentralityOptions::default(),
            deviation: DeviationOptions::default(),
            top_n: 5,
            thresholds: EvidenceThresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedMember {
    pub rank: usize,
    pub member: String,
    pub score: f64,
    pub per_platform: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmellReport {
    pub platforms: Vec<String>,
    pub ranked: Vec<RankedMember>,
    pub evidence: Vec<SmellEvidence>,
    pub skipped_terms: usize,
    pub strict_absence: bool,
    #[serde(skip)]
    pub series: Vec<PlatformSeries>,
}

impl SmellReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

/// Edge report over the whole platform at order 2, or `None` when no path
/// has two nodes.
fn platform_edges(ds: &PathDataset, config: &SmellConfig) -> Result<Option<EdgeReport>> {
    if ds.max_len() < 2 {
        return Ok(None);
    }
    let model = fit_mogen(ds, 2)?;
    edge_centralities(&model, &[Measure::Visitation], config.thresholds.min_visitation, &config.centrality)
        .map(Some)
}

/// Windows, fits, scores, ranks and gathers evidence for the top members of
/// every platform.
pub fn detect(platforms: &[(String, PathDataset)], config: &SmellConfig) -> Result<SmellReport> {
    if platforms.is_empty() {
        return Err(Error::InvalidArgument("at least one platform is required".into()));
    }
    let names: BTreeSet<&str> = platforms.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != platforms.len() {
        return Err(Error::InvalidArgument("platform names must be unique".into()));
    }
    if config.top_n == 0 {
        return Err(Error::InvalidArgument("top_n must be at least 1".into()));
    }
    let mut series = Vec::with_capacity(platforms.len());
    let mut edges = Vec::with_capacity(platforms.len());
    for (name, ds) in platforms {
        let windows = rolling_windows(ds, &config.window)?;
        series.push(windowed_centralities(
            name,
            &windows,
            config.order,
            &config.measures,
            &config.centrality,
        )?);
        edges.push(platform_edges(ds, config)?);
    }
    let deviations = deviation_scores(&series, &config.deviation);
    let ranked: Vec<RankedMember> = rank_members(&deviations.scores, config.top_n)
        .into_iter()
        .enumerate()
        .map(|(i, d)| RankedMember {
            rank: i + 1,
            member: d.member.clone(),
            score: d.score,
            per_platform: d.per_platform.clone(),
        })
        .collect();
    let mut found = Vec::new();
    for r in &ranked {
        for (s, e) in series.iter().zip(&edges) {
            match evidence(s, e.as_ref(), &r.member, &config.thresholds) {
                Ok(ev) => found.push(ev),
                Err(Error::UnknownMember(_)) => {}
                Err(other) => return Err(other),
            }
        }
    }
    Ok(SmellReport {
        platforms: platforms.iter().map(|(n, _)| n.clone()).collect(),
        ranked,
        evidence: found,
        skipped_terms: deviations.skipped_terms,
        strict_absence: config.deviation.strict_absence,
        series,
    })
}

/// Writes the per-member CSV of one platform.
pub fn write_series<W: Write>(report: &SmellReport, member: &str, platform: &str, out: W) -> Result<()> {
    let s = report
        .series
        .iter()
        .find(|s| s.platform == platform)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown platform {platform}")))?;
    write_member_csv(s, member, out)
}
