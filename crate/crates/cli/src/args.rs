//! Command-line arguments. Every argument struct is also the run
//! configuration that is serialised into the outputs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mogen_core::centrality::{Direction, Measure};
use mogen_core::experiment::{Fallback, ModelSpec, Pooling};

use crate::duration::parse_duration;

#[derive(Debug, Parser)]
#[command(name = "mogen", version, about = "Multi-order path models and path centralities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Log more (-v debug, -vv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalise paths, temporal edges or action logs into a path file plus statistics.
    Ingest(IngestArgs),
    /// Centralities of a network, path or MOGen model.
    Centrality(CentralityArgs),
    /// Top-decile AUC comparison of model families on a train/test split.
    Experiment(ExperimentArgs),
    /// Rolling-window deviation scores and smell evidence for team members.
    Smells(SmellsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// `v1,v2,...;count;timestamp` per line.
    Paths,
    /// `source,target,time` per line.
    TemporalEdges,
    /// `key,actor,time` per line.
    Actions,
}

/// How path files are laid out.
#[derive(Clone, Debug, Args, Serialize)]
pub struct PathFileArgs {
    /// Node delimiter within a path.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// The last field of each line is the path count.
    #[arg(long)]
    pub trailing_count: bool,
}

impl PathFileArgs {
    pub fn format(&self) -> mogen_core::pathdata::PathFormat {
        mogen_core::pathdata::PathFormat {
            delimiter: self.delimiter,
            trailing_count: self.trailing_count,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = InputFormat::Paths)]
    pub format: InputFormat,

    #[command(flatten)]
    pub paths: PathFileArgs,

    /// Longest gap between consecutive interactions of one path (temporal edges only).
    #[arg(long, value_parser = parse_duration)]
    pub delta: Option<i64>,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Network,
    Path,
    Mogen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    From,
    To,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::From => Direction::From,
            DirectionArg::To => Direction::To,
        }
    }
}

/// Maximum order of MOGen fits: fixed or selected from the data.
#[derive(Clone, Debug, Args, Serialize)]
pub struct OrderArgs {
    /// Maximum order of the MOGen model.
    #[arg(long, short = 'k', conflicts_with = "auto_order")]
    pub k: Option<usize>,

    /// Pick the order with the lowest AIC in 1..=k-max.
    #[arg(long)]
    pub auto_order: bool,

    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CentralityArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[command(flatten)]
    pub paths: PathFileArgs,

    #[arg(long, value_enum)]
    pub model: ModelArg,

    #[command(flatten)]
    pub order: OrderArgs,

    /// Comma-separated measures.
    #[arg(long = "measure", value_delimiter = ',', default_values_t = Measure::ALL.to_vec())]
    pub measures: Vec<Measure>,

    /// Closeness from a node to the others, or from the others to it.
    #[arg(long, value_enum, default_value_t = DirectionArg::From)]
    pub closeness: DirectionArg,

    /// MOGen betweenness without the correction for single-node paths.
    #[arg(long)]
    pub raw_betweenness: bool,

    /// Also report order-2 state (edge) centralities.
    #[arg(long)]
    pub edges: bool,

    /// Visitation share an edge needs to be reported.
    #[arg(long, default_value_t = 0.02)]
    pub min_visitation: f64,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolingArg {
    Mixed,
    PerOrder,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Mixed => Pooling::Mixed,
            PoolingArg::PerOrder => Pooling::PerOrder,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackArg {
    Minimum,
    Exclude,
}

impl From<FallbackArg> for Fallback {
    fn from(f: FallbackArg) -> Self {
        match f {
            FallbackArg::Minimum => Fallback::Minimum,
            FallbackArg::Exclude => Fallback::Exclude,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ExperimentArgs {
    /// Path files; each becomes one row of the result table.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,

    #[command(flatten)]
    pub paths: PathFileArgs,

    #[arg(long, value_delimiter = ',', default_value = "N,M1,M2,M3,M4,M5,P")]
    pub models: Vec<ModelSpec>,

    #[arg(long = "measure", value_delimiter = ',', default_values_t = Measure::ALL.to_vec())]
    pub measures: Vec<Measure>,

    #[arg(long, default_value_t = 0.3)]
    pub train_fraction: f64,

    #[arg(long, default_value_t = 5)]
    pub replicates: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Longest test sub-path in the ground truth.
    #[arg(long, default_value_t = 5)]
    pub k_truth: usize,

    #[arg(long, value_enum, default_value_t = PoolingArg::Mixed)]
    pub pooling: PoolingArg,

    #[arg(long, value_enum, default_value_t = FallbackArg::Minimum)]
    pub fallback: FallbackArg,

    #[arg(long, value_enum, default_value_t = DirectionArg::From)]
    pub closeness: DirectionArg,

    #[arg(long)]
    pub out: PathBuf,
}

fn parse_platform(text: &str) -> Result<(String, PathBuf), String> {
    let (name, file) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=FILE, got {text:?}"))?;
    if name.is_empty() || file.is_empty() {
        return Err(format!("expected NAME=FILE, got {text:?}"));
    }
    Ok((name.to_owned(), PathBuf::from(file)))
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SmellsArgs {
    /// Timestamped path file of one platform, as NAME=FILE; repeatable.
    #[arg(long = "platform", required = true, value_parser = parse_platform)]
    pub platforms: Vec<(String, PathBuf)>,

    #[command(flatten)]
    pub paths: PathFileArgs,

    #[arg(long, value_parser = parse_duration, default_value = "1y")]
    pub window: i64,

    #[arg(long, value_parser = parse_duration, default_value = "3m")]
    pub shift: i64,

    /// Start of the first window (seconds); defaults to the earliest path
    /// start rounded down to a multiple of the shift.
    #[arg(long, allow_negative_numbers = true)]
    pub window_start: Option<i64>,

    /// Fixed maximum order per window; without it the order is selected per window.
    #[arg(long, short = 'k')]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 3)]
    pub k_max: usize,

    #[arg(long = "measure", value_delimiter = ',', default_values_t = Measure::ALL.to_vec())]
    pub measures: Vec<Measure>,

    #[arg(long, default_value_t = 5)]
    pub top: usize,

    #[arg(long, default_value_t = 0.5)]
    pub end_share: f64,

    #[arg(long, default_value_t = 4)]
    pub min_run: usize,

    #[arg(long, default_value_t = 0.05)]
    pub role_share: f64,

    #[arg(long, default_value_t = 3)]
    pub max_performers: usize,

    #[arg(long, default_value_t = 0.02)]
    pub min_visitation: f64,

    /// Team means below this are skipped in the deviation score.
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,

    /// Count windows where a member is absent as value 0.
    #[arg(long)]
    pub strict_absence: bool,

    #[arg(long, value_enum, default_value_t = DirectionArg::From)]
    pub closeness: DirectionArg,

    /// Write series for every member, not only the ranked ones.
    #[arg(long)]
    pub all_series: bool,

    #[arg(long)]
    pub out: PathBuf,
}
