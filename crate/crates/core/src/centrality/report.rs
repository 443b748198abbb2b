use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::{CentralityVector, Measure};
use crate::error::Result;
use crate::models::ModelKind;
use crate::pathdata::{Node, Vocabulary};

/// Whether a row scores a node sequence or a single MOGen state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Node,
    State,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Node => "node",
            Level::State => "state",
        }
    }
}

/// One `(measure, model, level, state, score)` record.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub measure: Measure,
    pub model: ModelKind,
    pub level: Level,
    pub state: Vec<Node>,
    pub score: f64,
}

/// Rows of one or more centrality vectors, ordered by measure, level and
/// state labels.
#[derive(Clone, Debug)]
pub struct CentralityReport {
    vocab: Arc<Vocabulary>,
    rows: Vec<ReportRow>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    measure: Measure,
    model: ModelKind,
    level: Level,
    state: Vec<&'a str>,
    score: f64,
}

impl CentralityReport {
    pub fn new(vocab: Arc<Vocabulary>) -> Self {
        CentralityReport {
            vocab,
            rows: Vec::new(),
        }
    }

    /// Adds node-level rows.
    pub fn push(&mut self, vector: &CentralityVector) {
        self.push_level(vector, Level::Node);
    }

    /// Adds rows scoring individual states rather than node sequences.
    pub fn push_states(&mut self, vector: &CentralityVector) {
        self.push_level(vector, Level::State);
    }

    fn push_level(&mut self, vector: &CentralityVector, level: Level) {
        self.rows.extend(vector.scores.iter().map(|(s, x)| ReportRow {
            measure: vector.measure,
            model: vector.model,
            level,
            state: s.clone(),
            score: *x,
        }));
        let vocab = &self.vocab;
        self.rows.sort_by(|a, b| {
            a.measure
                .cmp(&b.measure)
                .then_with(|| a.level.cmp(&b.level))
                .then_with(|| vocab.cmp_sequences(&a.state, &b.state))
                .then_with(|| a.model.cmp(&b.model))
        });
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with header `measure,model,level,state,score`; states joined by `|`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["measure", "model", "level", "state", "score"])?;
        for r in &self.rows {
            w.write_record([
                r.measure.name(),
                &r.model.to_string(),
                r.level.name(),
                &self.vocab.join(&r.state, "|"),
                &format_sig(r.score),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|r| JsonRow {
                measure: r.measure,
                model: r.model,
                level: r.level,
                state: self.vocab.labels(&r.state).collect(),
                score: r.score,
            })
            .collect();
        serde_json::to_value(rows).expect("rows serialise")
    }
}

/// Formats a value with 9 significant digits, without exponent notation.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("valid float");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}
