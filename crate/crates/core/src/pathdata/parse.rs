use std::io::{Read, Write};

use log::warn;

use super::{ActionRecord, DatasetBuilder, PathDataset, TemporalEdge};
use crate::error::{Error, Result};

/// Layout of a path file.
///
/// One path per line: `v1<d>v2<d>...<d>vn[;count[;timestamp]]` where `<d>` is
/// the node delimiter. Lines starting with `#` are comments. With
/// `trailing_count` set, the last delimited field holds the count instead
/// (n-gram style files).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathFormat {
    pub delimiter: char,
    pub trailing_count: bool,
}

impl Default for PathFormat {
    fn default() -> Self {
        PathFormat {
            delimiter: ',',
            trailing_count: false,
        }
    }
}

fn parse_count(field: &str, line: usize) -> Result<u64> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(1);
    }
    // n-gram exports sometimes write counts as floats ("3.0")
    let count = field
        .parse::<u64>()
        .ok()
        .or_else(|| {
            field
                .parse::<f64>()
                .ok()
                .filter(|c| c.fract() == 0.0 && *c >= 1.0 && *c <= u64::MAX as f64)
                .map(|c| c as u64)
        })
        .ok_or_else(|| Error::parse(line, format!("malformed count {field:?}")))?;
    if count == 0 {
        return Err(Error::parse(line, "count must be positive"));
    }
    if count > super::MAX_MULTIPLICITY {
        return Err(Error::parse(line, format!("count {count} too large")));
    }
    Ok(count)
}

fn parse_time(field: &str, line: usize) -> Result<i64> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| Error::parse(line, format!("malformed timestamp {:?}", field.trim())))
}

fn lines(bytes: &[u8]) -> impl Iterator<Item = (usize, Result<&str>)> {
    bytes.split(|&b| b == b'\n').enumerate().map(|(i, raw)| {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| Error::parse(i + 1, "invalid UTF-8"));
        (i + 1, line)
    })
}

/// Reads a path file. Identical paths (same nodes and timestamp) are merged.
pub fn parse_paths(mut source: impl Read, format: &PathFormat) -> Result<PathDataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let n_lines = bytes.split(|&b| b == b'\n').count();
    let mut builder = DatasetBuilder::new();
    for (line_no, line) in lines(&bytes) {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            // the final newline produces one empty trailing segment
            if line_no < n_lines || !line.is_empty() {
                warn!("line {line_no}: empty line skipped");
            }
            continue;
        }
        let mut suffix = trimmed.split(';');
        let body = suffix.next().unwrap_or_default();
        let count_field = suffix.next();
        let time_field = suffix.next();
        if suffix.next().is_some() {
            return Err(Error::parse(line_no, "too many ';' fields"));
        }
        let mut labels: Vec<&str> = body.split(format.delimiter).map(str::trim).collect();
        let mut count = match count_field {
            Some(f) => parse_count(f, line_no)?,
            None => 1,
        };
        if format.trailing_count {
            if count_field.is_some() {
                return Err(Error::parse(line_no, "both trailing and ';' count given"));
            }
            let last = labels.pop().unwrap_or_default();
            count = parse_count(last, line_no)?;
        }
        let start_time = time_field.map(|f| parse_time(f, line_no)).transpose()?;
        builder
            .push_labels(&labels, count, start_time)
            .map_err(|m| Error::parse(line_no, m))?;
    }
    builder.finish()
}

/// Writes `ds` in the canonical path format (`;count` always, `;timestamp`
/// when present).
pub fn write_paths(ds: &PathDataset, mut out: impl Write, format: &PathFormat) -> Result<()> {
    let vocab = ds.vocabulary();
    let sep = format.delimiter.to_string();
    for p in ds.paths() {
        if let Some(bad) = vocab.labels(&p.nodes).find(|l| l.contains(format.delimiter)) {
            return Err(Error::InvalidArgument(format!(
                "node {bad:?} contains the delimiter {:?}",
                format.delimiter
            )));
        }
        write!(out, "{};{}", vocab.join(&p.nodes, &sep), p.multiplicity)?;
        if let Some(t) = p.start_time {
            write!(out, ";{t}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads three-column CSV records, skipping a header row if the first row's
/// time column is not an integer.
fn read_triples(source: impl Read, delimiter: u8) -> Result<Vec<(usize, String, String, i64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(source);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if record.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let time = match record[2].parse::<i64>() {
            Ok(t) => t,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::parse(line, format!("malformed timestamp {:?}", &record[2])))
            }
        };
        out.push((line, record[0].to_owned(), record[1].to_owned(), time));
    }
    Ok(out)
}

/// Reads a `source,target,time` edge list.
pub fn parse_temporal_edges(source: impl Read, delimiter: u8) -> Result<Vec<TemporalEdge>> {
    read_triples(source, delimiter)?
        .into_iter()
        .map(|(line, source, target, time)| {
            for label in [&source, &target] {
                super::Vocabulary::validate_label(label).map_err(|m| Error::parse(line, m))?;
            }
            Ok(TemporalEdge {
                source,
                target,
                time,
            })
        })
        .collect()
}

/// Reads a `key,actor,time` action log.
pub fn parse_actions(source: impl Read, delimiter: u8) -> Result<Vec<ActionRecord>> {
    read_triples(source, delimiter)?
        .into_iter()
        .map(|(line, key, actor, time)| {
            if key.is_empty() {
                return Err(Error::parse(line, "empty key"));
            }
            super::Vocabulary::validate_label(&actor).map_err(|m| Error::parse(line, m))?;
            Ok(ActionRecord { key, actor, time })
        })
        .collect()
}
