//! JSONL corpora of annotated scripts.
//!
//! One record per line. Structurally broken records are quarantined with
//! their line number instead of aborting the load; malformed JSON and
//! schema mismatches abort it.

mod stats;
mod synthetic;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{invalid, Error, Result};
use crate::metrics::{edge_prf, Convention, EventMatching, PrfScore};
use crate::script_graph::{Edge, Element, EventNode, ScriptGraph, Violation, ViolationCode};

pub use stats::{corpus_stats, CorpusStats};
pub use synthetic::{synthetic_corpus, SyntheticConfig};

/// Agreement threshold on the 0-100 F1 scale.
pub const DEFAULT_AGREEMENT_THRESHOLD: f64 = 65.0;

/// Recommended event-count range; records outside it only warn.
pub const EVENT_COUNT_RANGE: (usize, usize) = (2, 12);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Rocstories,
    Descript,
    Virtualhome,
    Other,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Rocstories => "rocstories",
            Source::Descript => "descript",
            Source::Virtualhome => "virtualhome",
            Source::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    pub scenario: String,
    pub source: Source,
    pub split: Split,
    pub events: Vec<EventNode>,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_edges: Option<Vec<Edge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_edge: Option<Edge>,
}

const REQUIRED_FIELDS: [&str; 6] = ["id", "scenario", "source", "split", "events", "edges"];
const OPTIONAL_FIELDS: [&str; 3] = ["alt_edges", "parent_id", "parent_edge"];
const EVENT_FIELDS: [&str; 3] = ["id", "text", "duration"];

/// Violations that reduction or deduplication repairs.
fn is_repairable(code: ViolationCode) -> bool {
    matches!(code, ViolationCode::NotReduced | ViolationCode::DupEdge)
}

impl CorpusRecord {
    pub fn from_script(
        id: impl Into<String>,
        source: Source,
        split: Split,
        g: &ScriptGraph,
    ) -> Self {
        CorpusRecord {
            id: id.into(),
            scenario: g.scenario().to_string(),
            source,
            split,
            events: g.events().to_vec(),
            edges: g.edges().to_vec(),
            alt_edges: None,
            parent_id: None,
            parent_edge: None,
        }
    }

    /// Primary annotation as a reduced script.
    pub fn script(&self) -> Result<ScriptGraph> {
        self.script_with(&self.edges)
    }

    /// Second annotation as a reduced script, if present.
    pub fn alt_script(&self) -> Option<Result<ScriptGraph>> {
        self.alt_edges.as_ref().map(|e| self.script_with(e))
    }

    fn script_with(&self, edges: &[Edge]) -> Result<ScriptGraph> {
        let unique: BTreeSet<Edge> = edges.iter().copied().collect();
        ScriptGraph::from_parts(self.scenario.clone(), self.events.clone(), unique)
    }

    /// Structural violations of both annotations. Duplicate and implied
    /// edges are not reported since loading repairs them.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.check(&self.edges, "edges");
        if let Some(alt) = &self.alt_edges {
            out.extend(self.check(alt, "alt_edges"));
        }
        if let Some((u, v)) = self.parent_edge {
            if u == v {
                out.push(Violation {
                    code: ViolationCode::SelfLoop,
                    message: format!("parent_edge {u}->{v} is a self-loop"),
                    element: Element::Graph,
                });
            }
        }
        out
    }

    fn check(&self, edges: &[Edge], field: &str) -> Vec<Violation> {
        let g = ScriptGraph::from_parts_unchecked(
            self.scenario.clone(),
            self.events.clone(),
            edges.to_vec(),
        );
        let mut report = g.validate().violations;
        report.retain(|v| !is_repairable(v.code));
        if field != "edges" {
            // Event-level findings were already reported for the primary set.
            report.retain(|v| matches!(v.element, Element::Edge(..)));
            for v in &mut report {
                v.message = format!("{field}: {}", v.message);
            }
        }
        report
    }

    /// Single-line canonical JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quarantined {
    pub line: usize,
    pub id: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadWarning {
    pub line: usize,
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<CorpusRecord>,
    /// Line number of each kept record.
    pub lines: Vec<usize>,
    pub quarantined: Vec<Quarantined>,
    pub warnings: Vec<LoadWarning>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn from_records(records: Vec<CorpusRecord>) -> Self {
        let lines = (1..=records.len()).collect();
        Corpus {
            records,
            lines,
            ..Default::default()
        }
    }
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    let file = File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_jsonl(BufReader::new(file))
}

pub fn parse_jsonl(reader: impl BufRead) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line, line_no)?;
        let violations = record.violations();
        if !violations.is_empty() {
            corpus.quarantined.push(Quarantined {
                line: line_no,
                id: record.id,
                violations,
            });
            continue;
        }
        let (lo, hi) = EVENT_COUNT_RANGE;
        let n = record.events.len();
        if n < lo || n > hi {
            corpus.warnings.push(LoadWarning {
                line: line_no,
                id: record.id.clone(),
                message: format!("{n} events is outside the expected range {lo}..={hi}"),
            });
        }
        corpus.records.push(record);
        corpus.lines.push(line_no);
    }
    Ok(corpus)
}

/// Parse one JSONL line, checking field names before types.
pub fn parse_record(line: &str, line_no: usize) -> Result<CorpusRecord> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::Json {
        line: line_no,
        message: e.to_string(),
    })?;
    let schema = |missing: Vec<String>, extra: Vec<String>, detail: Option<String>| Error::Schema {
        line: line_no,
        missing,
        extra,
        detail,
    };
    let Value::Object(obj) = &value else {
        return Err(schema(
            vec![],
            vec![],
            Some("expected a JSON object".into()),
        ));
    };
    let (missing, mut extra) = field_diff(obj, &REQUIRED_FIELDS, &OPTIONAL_FIELDS, "");
    if let Some(Value::Array(events)) = obj.get("events") {
        for (i, ev) in events.iter().enumerate() {
            if let Value::Object(ev) = ev {
                let (_, x) = field_diff(ev, &[], &EVENT_FIELDS, &format!("events[{i}]."));
                extra.extend(x);
            }
        }
    }
    if !missing.is_empty() || !extra.is_empty() {
        return Err(schema(missing, extra, None));
    }
    serde_json::from_value(value).map_err(|e| schema(vec![], vec![], Some(e.to_string())))
}

fn field_diff(
    obj: &Map<String, Value>,
    required: &[&str],
    optional: &[&str],
    prefix: &str,
) -> (Vec<String>, Vec<String>) {
    let missing = required
        .iter()
        .filter(|f| !obj.contains_key(**f))
        .map(|f| format!("{prefix}{f}"))
        .collect();
    let extra = obj
        .keys()
        .filter(|k| !required.contains(&k.as_str()) && !optional.contains(&k.as_str()))
        .map(|k| format!("{prefix}{k}"))
        .collect();
    (missing, extra)
}

pub fn write_jsonl(records: &[CorpusRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Edge F1 between the two annotations (primary as prediction).
pub fn agreement_f1(record: &CorpusRecord, convention: Convention) -> Result<PrfScore> {
    let alt = record
        .alt_script()
        .ok_or_else(|| invalid(format!("record `{}` has no alt_edges", record.id)))??;
    edge_prf(&record.script()?, &alt, convention, EventMatching::ById)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AgreementSplit {
    pub kept: Vec<CorpusRecord>,
    /// Rejected records with their agreement score.
    pub rejected: Vec<(CorpusRecord, PrfScore)>,
    pub warnings: Vec<String>,
}

/// Keep records whose annotators reach at least `threshold` F1 (0-100).
pub fn agreement_filter(
    records: &[CorpusRecord],
    threshold: f64,
    convention: Convention,
) -> AgreementSplit {
    let mut out = AgreementSplit::default();
    for r in records {
        if r.alt_edges.is_none() {
            out.warnings.push(format!(
                "record `{}` has no alt_edges; kept unfiltered",
                r.id
            ));
            out.kept.push(r.clone());
            continue;
        }
        match agreement_f1(r, convention) {
            Ok(s) if s.f1_percent() >= threshold => out.kept.push(r.clone()),
            Ok(s) => out.rejected.push((r.clone(), s)),
            Err(e) => {
                out.warnings
                    .push(format!("record `{}` could not be scored: {e}", r.id));
                out.rejected
                    .push((r.clone(), PrfScore::from_counts(0, 0, 1, convention)));
            }
        }
    }
    out
}
