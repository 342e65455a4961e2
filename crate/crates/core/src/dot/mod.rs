//! DOT-subset wire format for scripts.
//!
//! Canonical form, byte for byte:
//!
//! ```text
//! digraph {
//! step0 [label="gather the ingredients"];
//! step1 [label="mix"];
//! step0 -> step1;
//! }
//! ```
//!
//! Node lines come in id order, edge lines in `(src, dst)` order, and only
//! `"` and `\` are escaped inside labels. Event durations ride along as
//! reserved comment lines (`// duration step<i> <bucket> [seconds]`) right
//! after their node line, so labels stay clean for model consumption.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::script_graph::{
    normalize_label, reach, DurationBucket, Edge, EventNode, NodeId, ScriptGraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Node {
        ident: String,
        label: String,
        span: Span,
    },
    Edge {
        src: String,
        dst: String,
        span: Span,
    },
}

/// Syntax tree of one DOT text, before any graph semantics are applied.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DotDocument {
    pub statements: Vec<Statement>,
    /// Reserved `// duration` comments, in textual order.
    pub durations: Vec<(String, DurationBucket, Span)>,
    /// Reserved `// scenario "<json string>"` comment, if present.
    pub scenario: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WarningCode {
    LeadingInput,
    TrailingInput,
    MissingBrace,
    MissingSemicolon,
    UnexpectedToken,
    Unsupported,
    UnquotedLabel,
    MissingLabel,
    BareNode,
    EmptyLabel,
    EdgeChain,
    BadEscape,
    UnterminatedString,
    UnterminatedComment,
    BadDuration,
    BadScenario,
    NoncanonicalId,
    DupNode,
    DupEdge,
    SelfLoop,
    UndeclaredId,
    CycleDropped,
    ShortcutReduced,
}

impl WarningCode {
    pub fn as_str(self) -> &'static str {
        match self {
            WarningCode::LeadingInput => "LEADING_INPUT",
            WarningCode::TrailingInput => "TRAILING_INPUT",
            WarningCode::MissingBrace => "MISSING_BRACE",
            WarningCode::MissingSemicolon => "MISSING_SEMICOLON",
            WarningCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            WarningCode::Unsupported => "UNSUPPORTED",
            WarningCode::UnquotedLabel => "UNQUOTED_LABEL",
            WarningCode::MissingLabel => "MISSING_LABEL",
            WarningCode::BareNode => "BARE_NODE",
            WarningCode::EmptyLabel => "EMPTY_LABEL",
            WarningCode::EdgeChain => "EDGE_CHAIN",
            WarningCode::BadEscape => "BAD_ESCAPE",
            WarningCode::UnterminatedString => "UNTERMINATED_STRING",
            WarningCode::UnterminatedComment => "UNTERMINATED_COMMENT",
            WarningCode::BadDuration => "BAD_DURATION",
            WarningCode::BadScenario => "BAD_SCENARIO",
            WarningCode::NoncanonicalId => "NONCANONICAL_ID",
            WarningCode::DupNode => "DUP_NODE",
            WarningCode::DupEdge => "DUP_EDGE",
            WarningCode::SelfLoop => "SELF_LOOP",
            WarningCode::UndeclaredId => "UNDECLARED_ID",
            WarningCode::CycleDropped => "CYCLE_DROPPED",
            WarningCode::ShortcutReduced => "SHORTCUT_REDUCED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub line: usize,
    pub column: usize,
    pub code: WarningCode,
    pub message: String,
}

impl Warning {
    pub(crate) fn new(
        line: usize,
        column: usize,
        code: WarningCode,
        message: impl Into<String>,
    ) -> Self {
        Warning {
            line,
            column,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line,
            self.column,
            self.code.as_str(),
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub warnings: Vec<Warning>,
    pub recovered: bool,
}

impl ParseDiagnostics {
    pub fn count(&self, code: WarningCode) -> usize {
        self.warnings.iter().filter(|w| w.code == code).count()
    }
}

fn escape_label(text: &str, out: &mut String) {
    for c in text.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
}

/// Canonical DOT text for a valid graph.
pub fn emit_dot(g: &ScriptGraph) -> Result<String> {
    emit(g, false)
}

/// [`emit_dot`] plus a reserved `// scenario` comment after the header.
pub fn emit_dot_with_scenario(g: &ScriptGraph) -> Result<String> {
    emit(g, true)
}

fn emit(g: &ScriptGraph, with_scenario: bool) -> Result<String> {
    let report = g.validate();
    if let Some(v) = report.violations.first() {
        return Err(invalid(format!("cannot emit invalid graph: {}", v.message)));
    }
    let mut out = String::from("digraph {\n");
    if with_scenario {
        let quoted = serde_json::to_string(g.scenario()).expect("strings always serialize");
        let _ = writeln!(out, "// scenario {quoted}");
    }
    for ev in g.events() {
        let _ = write!(out, "step{} [label=\"", ev.id);
        escape_label(&ev.text, &mut out);
        out.push_str("\"];\n");
        if let Some(d) = &ev.duration {
            let _ = write!(out, "// duration step{} {}", ev.id, d.bucket);
            if let Some(s) = d.seconds_estimate {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
        }
    }
    let mut edges = g.edges().to_vec();
    edges.sort_unstable();
    for (u, v) in edges {
        let _ = writeln!(out, "step{u} -> step{v};");
    }
    out.push('}');
    Ok(out)
}

/// Syntax-only strict parse.
pub fn parse_document(text: &str) -> Result<DotDocument> {
    parser::parse(text, false, &mut Vec::new())
}

/// Scenario stored in a reserved comment, if the text carries one.
pub fn scenario_hint(text: &str) -> Option<String> {
    parser::parse(text, true, &mut Vec::new()).ok()?.scenario
}

/// Strict parse of the canonical grammar.
///
/// Node statements must declare `step0, step1, ...` in order; every edge
/// endpoint must be declared. Shortcut edges are reduced away.
pub fn parse_dot(text: &str, scenario: &str) -> Result<ScriptGraph> {
    let doc = parse_document(text)?;
    let mut declared: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut events = Vec::new();
    for st in &doc.statements {
        if let Statement::Node { ident, label, span } = st {
            let id = events.len();
            if declared.contains_key(ident.as_str()) {
                return Err(lexer::syntax(
                    span.line,
                    span.column,
                    format!("`{ident}` declared twice"),
                ));
            }
            if parser::step_index(ident) != Some(id) {
                return Err(lexer::syntax(
                    span.line,
                    span.column,
                    format!("expected declaration of step{id}, found `{ident}`"),
                ));
            }
            if normalize_label(label).is_empty() {
                return Err(lexer::syntax(
                    span.line,
                    span.column,
                    format!("`{ident}` has an empty label"),
                ));
            }
            declared.insert(ident, id);
            events.push(EventNode::new(id, label.clone()));
        }
    }
    let resolve = |ident: &str, span: &Span| {
        declared
            .get(ident)
            .copied()
            .ok_or_else(|| Error::Undeclared {
                ident: ident.to_string(),
                line: span.line,
                column: span.column,
            })
    };
    for (ident, d, span) in &doc.durations {
        events[resolve(ident, span)?].duration = Some(*d);
    }
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for st in &doc.statements {
        if let Statement::Edge { src, dst, span } = st {
            let e = (resolve(src, span)?, resolve(dst, span)?);
            if e.0 == e.1 {
                return Err(Error::Cycle { edge: e });
            }
            if !seen.insert(e) {
                return Err(lexer::syntax(
                    span.line,
                    span.column,
                    format!("duplicate edge {src} -> {dst}"),
                ));
            }
            edges.push(e);
        }
    }
    ScriptGraph::from_parts(scenario, events, edges)
}

/// Best-effort parse of model output. Always yields a valid graph unless
/// the text has no `digraph` header at all.
pub fn parse_lenient(text: &str, scenario: &str) -> Result<(ScriptGraph, ParseDiagnostics)> {
    let mut warnings = Vec::new();
    let doc = parser::parse(text, true, &mut warnings)?;

    // Declaration order fixes ids; a repeated declaration keeps its first
    // position but takes the last label.
    let mut order: Vec<&str> = Vec::new();
    let mut labels: BTreeMap<&str, (&str, Span)> = BTreeMap::new();
    for st in &doc.statements {
        if let Statement::Node { ident, label, span } = st {
            if labels.insert(ident, (label, *span)).is_some() {
                warnings.push(Warning::new(
                    span.line,
                    span.column,
                    WarningCode::DupNode,
                    format!("`{ident}` redeclared; last label wins"),
                ));
            } else {
                order.push(ident);
            }
        }
    }
    let mut ids: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut events: Vec<EventNode> = Vec::new();
    for ident in order {
        let (label, span) = labels[ident];
        if normalize_label(label).is_empty() {
            warnings.push(Warning::new(
                span.line,
                span.column,
                WarningCode::EmptyLabel,
                format!("`{ident}` has an empty label; node dropped"),
            ));
            continue;
        }
        ids.insert(ident, events.len());
        events.push(EventNode::new(events.len(), label));
    }
    if let Some((ident, _)) = ids
        .iter()
        .find(|(ident, &id)| parser::step_index(ident) != Some(id))
    {
        warnings.push(Warning::new(
            1,
            1,
            WarningCode::NoncanonicalId,
            format!("`{ident}` is not in step<k> declaration order; ids follow declaration order"),
        ));
    }
    for (ident, d, span) in &doc.durations {
        match ids.get(ident.as_str()) {
            Some(&id) => events[id].duration = Some(*d),
            None => warnings.push(Warning::new(
                span.line,
                span.column,
                WarningCode::UndeclaredId,
                format!("duration for undeclared `{ident}` ignored"),
            )),
        }
    }

    let n = events.len();
    let mut kept: Vec<Edge> = Vec::new();
    let mut seen = BTreeSet::new();
    for st in &doc.statements {
        let Statement::Edge { src, dst, span } = st else {
            continue;
        };
        let warn = |warnings: &mut Vec<Warning>, code, msg: String| {
            warnings.push(Warning::new(span.line, span.column, code, msg))
        };
        let (Some(&u), Some(&v)) = (ids.get(src.as_str()), ids.get(dst.as_str())) else {
            let missing = if ids.contains_key(src.as_str()) {
                dst
            } else {
                src
            };
            warn(
                &mut warnings,
                WarningCode::UndeclaredId,
                format!("edge {src} -> {dst}: `{missing}` undeclared; edge dropped"),
            );
            continue;
        };
        if u == v {
            warn(
                &mut warnings,
                WarningCode::SelfLoop,
                format!("self-loop on {src} dropped"),
            );
            continue;
        }
        if !seen.insert((u, v)) {
            warn(
                &mut warnings,
                WarningCode::DupEdge,
                format!("duplicate edge {src} -> {dst} dropped"),
            );
            continue;
        }
        let reach = reach::reachability(n, &kept);
        if reach.get(v, u) {
            warn(
                &mut warnings,
                WarningCode::CycleDropped,
                format!("edge {src} -> {dst} closes a cycle; dropped"),
            );
            continue;
        }
        kept.push((u, v));
    }
    let reduced = reach::transitive_reduction(n, &kept).expect("kept edges are acyclic");
    for &(u, v) in &kept {
        if !reduced.contains(&(u, v)) {
            warnings.push(Warning::new(
                1,
                1,
                WarningCode::ShortcutReduced,
                format!("edge {u}->{v} is implied by a longer path; removed"),
            ));
        }
    }
    let graph = ScriptGraph::from_parts(scenario, events, reduced)?;
    let recovered = !warnings.is_empty();
    Ok((
        graph,
        ParseDiagnostics {
            warnings,
            recovered,
        },
    ))
}
