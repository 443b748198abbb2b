use std::collections::BTreeSet;
use std::path::Path;

use log::{info, warn};
use serde_json::json;

use mogen_core::centrality::{
    edge_centralities, format_sig, Analysis, CentralityOptions, CentralityReport, CentralityVector, EdgeReport,
    Measure,
};
use mogen_core::experiment::{evaluate, write_table, ExperimentOptions, SplitSpec};
use mogen_core::models::{fit_mogen, fit_network, select_order, ModelKind, ModelRef, PathModel};
use mogen_core::pathdata::{
    extract_paths, parse_actions, parse_paths, parse_temporal_edges, paths_from_actions, stats, write_paths,
    PathDataset, TimeWindow,
};
use mogen_core::smells::{
    detect, write_member_csv, DeviationOptions, EvidenceThresholds, OrderChoice, SmellConfig,
};

use crate::args::*;
use crate::error::CliError;
use crate::meta::{file_stem, read_input, InputDigest, OutDir, RunMeta};

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(command: &Command) -> CliResult {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Centrality(a) => centrality(a),
        Command::Experiment(a) => experiment(a),
        Command::Smells(a) => smells(a),
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn check_unit_interval(name: &str, x: f64) -> CliResult {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(usage(format!("--{name} must lie in [0, 1], got {x}")))
    }
}

fn load_paths(path: &Path, layout: &PathFileArgs) -> CliResult<(PathDataset, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let ds = parse_paths(bytes.as_slice(), &layout.format()).map_err(|e| CliError::in_file(path, e))?;
    Ok((ds, digest))
}

pub fn ingest(args: &IngestArgs) -> CliResult {
    let delta = match (args.format, args.delta) {
        (InputFormat::TemporalEdges, None) => return Err(usage("--delta is required with --format temporal-edges")),
        (InputFormat::TemporalEdges, Some(d)) if d <= 0 => return Err(usage("--delta must be positive")),
        (InputFormat::TemporalEdges, Some(d)) => d,
        (_, Some(_)) => return Err(usage("--delta only applies to --format temporal-edges")),
        (_, None) => 0,
    };
    let delimiter = u8::try_from(args.paths.delimiter)
        .ok()
        .filter(|_| args.paths.delimiter.is_ascii())
        .ok_or_else(|| usage("--delimiter must be an ASCII character"))?;

    let (bytes, digest) = read_input(&args.input)?;
    let in_file = |e| CliError::in_file(&args.input, e);
    let ds = match args.format {
        InputFormat::Paths => parse_paths(bytes.as_slice(), &args.paths.format()).map_err(in_file)?,
        InputFormat::TemporalEdges => {
            let edges = parse_temporal_edges(bytes.as_slice(), delimiter).map_err(in_file)?;
            extract_paths(&edges, delta).map_err(in_file)?
        }
        InputFormat::Actions => {
            let records = parse_actions(bytes.as_slice(), delimiter).map_err(in_file)?;
            paths_from_actions(&records).map_err(in_file)?
        }
    };
    let summary = stats(&ds)?;
    info!(
        "{} paths ({} unique) over {} nodes",
        summary.total_paths, summary.unique_paths, summary.n_nodes
    );

    let meta = RunMeta::new("ingest", args, vec![digest]);
    let out = OutDir::new(&args.out)?;
    let mut text = meta.comment_block().into_bytes();
    write_paths(&ds, &mut text, &mogen_core::pathdata::PathFormat::default())?;
    out.write("dataset.paths", &text)?;
    out.write_json("stats.json", &meta, "stats", serde_json::to_value(&summary).expect("stats serialise"))?;
    Ok(())
}

fn edges_csv(report: &EdgeReport, measures: &[Measure], out: &mut Vec<u8>) -> mogen_core::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["source".to_owned(), "target".to_owned(), "visitation".to_owned()];
    header.extend(measures.iter().map(|m| m.name().to_owned()));
    w.write_record(&header)?;
    for e in &report.entries {
        let mut row = vec![
            report.vocab.label(e.source).to_owned(),
            report.vocab.label(e.target).to_owned(),
            format_sig(e.visitation),
        ];
        row.extend(measures.iter().map(|m| format_sig(e.scores[m])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn centrality(args: &CentralityArgs) -> CliResult {
    check_unit_interval("min-visitation", args.min_visitation)?;
    if args.measures.is_empty() {
        return Err(usage("no measure requested"));
    }
    let mogen_order = args.model == ModelArg::Mogen;
    if !mogen_order && (args.order.k.is_some() || args.order.auto_order) {
        return Err(usage("--k and --auto-order only apply to --model mogen"));
    }
    if args.order.k == Some(0) || args.order.k_max == 0 {
        return Err(usage("maximum order must be at least 1"));
    }
    if args.edges && !mogen_order {
        return Err(usage("--edges needs --model mogen"));
    }
    let (ds, digest) = load_paths(&args.input, &args.paths)?;
    let options = CentralityOptions {
        closeness: args.closeness.into(),
        raw_betweenness: args.raw_betweenness,
        ..Default::default()
    };

    let network;
    let path_model;
    let mogen;
    let mut selected = None;
    let model = match args.model {
        ModelArg::Network => {
            network = fit_network(&ds)?;
            ModelRef::Network(&network)
        }
        ModelArg::Path => {
            path_model = PathModel::new(ds.clone());
            ModelRef::Path(&path_model)
        }
        ModelArg::Mogen => {
            let k = match args.order.k {
                Some(k) => k,
                None if args.order.auto_order => {
                    let k = select_order(&ds, args.order.k_max)?;
                    info!("selected maximum order {k}");
                    selected = Some(k);
                    k
                }
                None => 1,
            };
            if args.edges && k < 2 {
                return Err(usage("--edges needs a MOGen model of order 2 or more"));
            }
            mogen = fit_mogen(&ds, k)?;
            ModelRef::MoGen(&mogen)
        }
    };
    let kind = model.kind();
    let (supported, skipped): (Vec<Measure>, Vec<Measure>) =
        args.measures.iter().partition(|m| m.supported_by(kind));
    for m in &skipped {
        warn!("{m} cannot be computed for a {kind} model; skipped");
    }
    if supported.is_empty() {
        return Err(usage(format!("none of the requested measures can be computed for a {kind} model")));
    }

    let analysis = Analysis::new(model, &options)?;
    let mut report = CentralityReport::new(ds.vocabulary().clone());
    for &m in &supported {
        report.push(&analysis.first_order(m, &options)?);
        if let Analysis::MoGen(a) = &analysis {
            let values = a.state_values(m, &options);
            report.push_states(&CentralityVector {
                measure: m,
                model: ModelKind::MoGen,
                scores: a.model().states().iter().map(|s| s.nodes().to_vec()).zip(values).collect(),
            });
        }
    }

    let meta = RunMeta::new("centrality", args, vec![digest]);
    let out = OutDir::new(&args.out)?;
    out.write_csv("centrality.csv", &meta, |buf| report.write_csv(buf))?;
    out.write_json(
        "centrality.json",
        &meta,
        "result",
        json!({
            "model": kind,
            "selected_order": selected,
            "skipped_measures": skipped,
            "rows": report.to_json(),
        }),
    )?;
    if args.edges {
        let ModelRef::MoGen(m) = model else { unreachable!("checked above") };
        let edges = edge_centralities(m, &supported, args.min_visitation, &options)?;
        out.write_csv("edges.csv", &meta, |buf| edges_csv(&edges, &supported, buf))?;
        out.write_json("edges.json", &meta, "edges", edges.to_json())?;
    }
    Ok(())
}

pub fn experiment(args: &ExperimentArgs) -> CliResult {
    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        seed: args.seed,
        replicates: args.replicates,
    };
    spec.validate()?;
    if args.models.is_empty() || args.measures.is_empty() {
        return Err(usage("at least one model and one measure are required"));
    }
    if args.k_truth == 0 {
        return Err(usage("--k-truth must be at least 1"));
    }
    let names: Vec<String> = args
        .input
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect();
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(usage("input files must have distinct names"));
    }
    let options = ExperimentOptions {
        k_truth: args.k_truth,
        pooling: args.pooling.into(),
        fallback: args.fallback.into(),
        centrality: CentralityOptions {
            closeness: args.closeness.into(),
            ..Default::default()
        },
    };

    let mut digests = Vec::new();
    let mut results = Vec::new();
    for (path, name) in args.input.iter().zip(&names) {
        let (ds, digest) = load_paths(path, &args.paths)?;
        digests.push(digest);
        info!("{name}: {} paths", ds.total());
        let r = evaluate(&ds, &spec, &args.models, &args.measures, &options).map_err(|e| match e {
            e @ mogen_core::Error::TargetSetTooSmall(_) => CliError::Data(format!("{name}: {e}")),
            e => e.into(),
        })?;
        results.push(r);
    }

    let meta = RunMeta::new("experiment", args, digests);
    let out = OutDir::new(&args.out)?;
    let rows: Vec<(&str, &[_])> = names.iter().map(String::as_str).zip(results.iter().map(Vec::as_slice)).collect();
    out.write_csv("auc.csv", &meta, |buf| write_table(buf, &rows))?;
    let detail: Vec<_> = names
        .iter()
        .zip(&results)
        .map(|(n, r)| json!({ "dataset": n, "results": r }))
        .collect();
    out.write_json("auc.json", &meta, "datasets", json!(detail))?;
    Ok(())
}

const REVIEW_NOTE: &str = "flags are candidates for human review; \
validating them with the team (interviews) is outside this tool";

pub fn smells(args: &SmellsArgs) -> CliResult {
    if args.window <= 0 || args.shift <= 0 {
        return Err(usage("--window and --shift must be positive"));
    }
    if args.k == Some(0) || args.k_max == 0 {
        return Err(usage("maximum order must be at least 1"));
    }
    if args.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    if args.measures.is_empty() {
        return Err(usage("no measure requested"));
    }
    for (name, x) in [
        ("end-share", args.end_share),
        ("role-share", args.role_share),
        ("min-visitation", args.min_visitation),
    ] {
        check_unit_interval(name, x)?;
    }
    if args.min_run == 0 {
        return Err(usage("--min-run must be at least 1"));
    }
    // also rejects NaN
    if args.epsilon.is_nan() || args.epsilon < 0.0 {
        return Err(usage("--epsilon must be non-negative"));
    }
    let names: BTreeSet<&str> = args.platforms.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != args.platforms.len() {
        return Err(usage("platform names must be unique"));
    }
    let config = SmellConfig {
        window: TimeWindow {
            start: args.window_start,
            length: args.window,
            shift: args.shift,
        },
        order: match args.k {
            Some(k) => OrderChoice::Fixed(k),
            None => OrderChoice::Select { k_max: args.k_max },
        },
        measures: args.measures.clone(),
        centrality: CentralityOptions {
            closeness: args.closeness.into(),
            ..Default::default()
        },
        deviation: DeviationOptions {
            epsilon: args.epsilon,
            strict_absence: args.strict_absence,
        },
        top_n: args.top,
        thresholds: EvidenceThresholds {
            end_share: args.end_share,
            min_run: args.min_run,
            role_share: args.role_share,
            max_performers: args.max_performers,
            min_visitation: args.min_visitation,
        },
    };

    let mut digests = Vec::new();
    let mut platforms = Vec::new();
    for (name, path) in &args.platforms {
        let (ds, digest) = load_paths(path, &args.paths)?;
        if let Some(p) = ds.paths().iter().find(|p| p.start_time.is_none()) {
            return Err(CliError::Data(format!(
                "{}: path without timestamp: {}",
                path.display(),
                ds.vocabulary().join(&p.nodes, ",")
            )));
        }
        digests.push(digest);
        platforms.push((name.clone(), ds));
    }
    let report = detect(&platforms, &config)?;
    for s in &report.series {
        info!(
            "{}: {} windows, orders {:?}",
            s.platform,
            s.windows.len(),
            s.orders.iter().flatten().collect::<BTreeSet<_>>()
        );
    }

    let meta = RunMeta::new("smells", args, digests);
    let out = OutDir::new(&args.out)?;
    let mut body = report.to_json();
    body["note"] = json!(REVIEW_NOTE);
    out.write_json("smells.json", &meta, "report", body)?;

    let ranked: BTreeSet<&str> = report.ranked.iter().map(|r| r.member.as_str()).collect();
    for s in &report.series {
        let mut used = BTreeSet::new();
        for member in s.members().filter(|m| args.all_series || ranked.contains(m)) {
            let mut stem = file_stem(member);
            while !used.insert(stem.clone()) {
                stem.push('_');
            }
            let name = format!("series/{}/{stem}.csv", file_stem(&s.platform));
            out.write_csv(&name, &meta, |buf| write_member_csv(s, member, buf))?;
        }
    }
    Ok(())
}
