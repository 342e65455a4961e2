//! Partially ordered script DAGs.
//!
//! A [`ScriptGraph`] holds a scenario, a list of events and a precedence
//! relation over them. The stored relation is always its own transitive
//! reduction. The virtual root and scenario leaf are not stored; they are
//! exposed through [`ScriptGraph::augmented_edges`].

mod duration;
mod order;
pub(crate) mod reach;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use duration::{DurationBucket, TimeUnit};
pub use reach::{is_acyclic, topological_order, transitive_closure, transitive_reduction};

pub type NodeId = usize;
/// `(src, dst)`: `src` must happen before `dst`.
pub type Edge = (NodeId, NodeId);

/// Lowercase, trim, and collapse internal whitespace.
pub fn normalize_label(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventNode {
    pub id: NodeId,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<DurationBucket>,
}

impl EventNode {
    pub fn new(id: NodeId, text: impl Into<String>) -> Self {
        EventNode {
            id,
            text: text.into(),
            duration: None,
        }
    }

    pub fn with_duration(mut self, duration: DurationBucket) -> Self {
        self.duration = Some(duration);
        self
    }

    pub fn normalized(&self) -> String {
        normalize_label(&self.text)
    }
}

/// Outcome of [`ScriptGraph::add_edge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeInsert {
    /// The edge was stored; `removed` lists edges it made redundant.
    Inserted { removed: Vec<Edge> },
    /// The pair was already implied by an existing path.
    Redundant,
}

/// A node in the augmented view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Root,
    Event(NodeId),
    Leaf,
}

/// Which degree [`ScriptGraph::max_degree_with`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeMode {
    /// `max(in, out)` per event.
    #[default]
    MaxInOut,
    In,
    Out,
    /// `in + out` per event.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyScenario,
    EmptyLabel,
    BadId,
    DupId,
    UnknownNode,
    SelfLoop,
    DupEdge,
    Cycle,
    NotReduced,
    DurationRange,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyScenario => "EMPTY_SCENARIO",
            ViolationCode::EmptyLabel => "EMPTY_LABEL",
            ViolationCode::BadId => "BAD_ID",
            ViolationCode::DupId => "DUP_ID",
            ViolationCode::UnknownNode => "UNKNOWN_NODE",
            ViolationCode::SelfLoop => "SELF_LOOP",
            ViolationCode::DupEdge => "DUP_EDGE",
            ViolationCode::Cycle => "CYCLE",
            ViolationCode::NotReduced => "NOT_REDUCED",
            ViolationCode::DurationRange => "DURATION_RANGE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Graph,
    Event(NodeId),
    Edge(NodeId, NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptGraph {
    scenario: String,
    events: Vec<EventNode>,
    edges: Vec<Edge>,
}

impl ScriptGraph {
    pub fn new(scenario: impl Into<String>) -> Result<Self> {
        let scenario = scenario.into();
        if normalize_label(&scenario).is_empty() {
            return Err(invalid("scenario must be non-empty"));
        }
        Ok(ScriptGraph {
            scenario,
            events: Vec::new(),
            edges: Vec::new(),
        })
    }

    /// Build a graph from raw parts, reducing the edge relation.
    ///
    /// Event ids must equal their position. Unknown ids and self-loops are
    /// invalid arguments; cycles are cycle violations.
    pub fn from_parts(
        scenario: impl Into<String>,
        events: Vec<EventNode>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut g = ScriptGraph::new(scenario)?;
        for (pos, ev) in events.iter().enumerate() {
            if ev.id != pos {
                return Err(invalid(format!(
                    "event at position {pos} carries id {}",
                    ev.id
                )));
            }
            check_event(ev)?;
        }
        g.events = events;
        let edges: Vec<Edge> = edges.into_iter().collect();
        reach::check_range(g.events.len(), &edges)?;
        if let Some(&(u, v)) = edges.iter().find(|(u, v)| u == v) {
            return Err(invalid(format!("self-loop on event {u}->{v}")));
        }
        g.edges = transitive_reduction(g.events.len(), &edges)?
            .into_iter()
            .collect();
        Ok(g)
    }

    /// Store parts verbatim. Use [`ScriptGraph::validate`] to inspect them.
    pub fn from_parts_unchecked(
        scenario: impl Into<String>,
        events: Vec<EventNode>,
        edges: Vec<Edge>,
    ) -> Self {
        ScriptGraph {
            scenario: scenario.into(),
            events,
            edges,
        }
    }

    pub fn scenario(&self) -> &str {
        &self.scenario
    }

    pub fn events(&self) -> &[EventNode] {
        &self.events
    }

    pub fn event(&self, id: NodeId) -> Option<&EventNode> {
        self.events.get(id)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Sorted `(src, dst)` pairs for graphs built through checked paths.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.edges.binary_search(&(src, dst)).is_ok()
    }

    pub fn set_scenario(&mut self, scenario: impl Into<String>) -> Result<()> {
        let scenario = scenario.into();
        if normalize_label(&scenario).is_empty() {
            return Err(invalid("scenario must be non-empty"));
        }
        self.scenario = scenario;
        Ok(())
    }

    pub fn add_event(
        &mut self,
        text: impl Into<String>,
        duration: Option<DurationBucket>,
    ) -> Result<NodeId> {
        let ev = EventNode {
            id: self.events.len(),
            text: text.into(),
            duration,
        };
        check_event(&ev)?;
        let id = ev.id;
        self.events.push(ev);
        Ok(id)
    }

    /// Insert `src -> dst`, keeping the relation acyclic and reduced.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId) -> Result<EdgeInsert> {
        let n = self.events.len();
        if src >= n || dst >= n {
            return Err(invalid(format!("edge {src}->{dst}: unknown event id")));
        }
        if src == dst {
            return Err(invalid(format!("edge {src}->{dst}: self-loop")));
        }
        let reach = reach::reachability(n, &self.edges);
        if reach.get(dst, src) {
            return Err(Error::Cycle { edge: (src, dst) });
        }
        if reach.get(src, dst) {
            return Ok(EdgeInsert::Redundant);
        }
        // Any edge a->b with a reaching src and dst reaching b now has a
        // longer alternative through the new edge.
        let above = |a: NodeId| a == src || reach.get(a, src);
        let below = |b: NodeId| b == dst || reach.get(dst, b);
        let (removed, kept): (Vec<Edge>, Vec<Edge>) = self
            .edges
            .iter()
            .copied()
            .partition(|&(a, b)| above(a) && below(b));
        self.edges = kept;
        let pos = self.edges.binary_search(&(src, dst)).unwrap_err();
        self.edges.insert(pos, (src, dst));
        Ok(EdgeInsert::Inserted { removed })
    }

    /// Report every violated invariant without mutating the graph.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let n = self.events.len();
        if normalize_label(&self.scenario).is_empty() {
            out.push(Violation {
                code: ViolationCode::EmptyScenario,
                message: "scenario is empty".into(),
                element: Element::Graph,
            });
        }
        let mut seen_ids = BTreeMap::new();
        for (pos, ev) in self.events.iter().enumerate() {
            if normalize_label(&ev.text).is_empty() {
                out.push(Violation {
                    code: ViolationCode::EmptyLabel,
                    message: format!("event {pos} has an empty label"),
                    element: Element::Event(pos),
                });
            }
            if let Some(prev) = seen_ids.insert(ev.id, pos) {
                out.push(Violation {
                    code: ViolationCode::DupId,
                    message: format!("id {} used at positions {prev} and {pos}", ev.id),
                    element: Element::Event(pos),
                });
            } else if ev.id != pos {
                out.push(Violation {
                    code: ViolationCode::BadId,
                    message: format!("event at position {pos} carries id {}", ev.id),
                    element: Element::Event(pos),
                });
            }
            if let Some(d) = &ev.duration {
                if !d.is_consistent() {
                    out.push(Violation {
                        code: ViolationCode::DurationRange,
                        message: format!(
                            "event {pos}: estimate {:?}s outside the {} bucket",
                            d.seconds_estimate,
                            d.bucket.as_str()
                        ),
                        element: Element::Event(pos),
                    });
                }
            }
        }

        let mut in_range = BTreeSet::new();
        let mut seen_edges = BTreeSet::new();
        for &(u, v) in &self.edges {
            let el = Element::Edge(u, v);
            if u >= n || v >= n {
                out.push(Violation {
                    code: ViolationCode::UnknownNode,
                    message: format!("edge {u}->{v} references an unknown event"),
                    element: el,
                });
                continue;
            }
            if u == v {
                out.push(Violation {
                    code: ViolationCode::SelfLoop,
                    message: format!("self-loop on event {u}"),
                    element: el,
                });
                continue;
            }
            if !seen_edges.insert((u, v)) {
                out.push(Violation {
                    code: ViolationCode::DupEdge,
                    message: format!("edge {u}->{v} appears more than once"),
                    element: el,
                });
            }
            in_range.insert((u, v));
        }

        let edges: Vec<Edge> = in_range.into_iter().collect();
        match topological_order(n, &edges) {
            Err(Error::Cycle { edge: (u, v) }) => out.push(Violation {
                code: ViolationCode::Cycle,
                message: format!("edge {u}->{v} lies on a directed cycle"),
                element: Element::Edge(u, v),
            }),
            Err(_) => unreachable!("topological_order only fails with a cycle"),
            Ok(_) => {
                let reduced = transitive_reduction(n, &edges).expect("acyclic");
                for &(u, v) in &edges {
                    if !reduced.contains(&(u, v)) {
                        out.push(Violation {
                            code: ViolationCode::NotReduced,
                            message: format!("edge {u}->{v} is implied by a longer path"),
                            element: Element::Edge(u, v),
                        });
                    }
                }
            }
        }
        ValidationReport::from_violations(out)
    }

    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        topological_order(self.events.len(), &self.edges)
    }

    pub fn transitive_closure(&self) -> BTreeSet<Edge> {
        let n = self.events.len();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| u < n && v < n)
            .collect();
        transitive_closure(n, &edges)
    }

    pub fn in_degree(&self, id: NodeId) -> usize {
        self.edges.iter().filter(|e| e.1 == id).count()
    }

    pub fn out_degree(&self, id: NodeId) -> usize {
        self.edges.iter().filter(|e| e.0 == id).count()
    }

    /// Largest `max(in, out)` over event nodes; virtual nodes excluded.
    pub fn max_degree(&self) -> usize {
        self.max_degree_with(DegreeMode::default())
    }

    pub fn max_degree_with(&self, mode: DegreeMode) -> usize {
        let n = self.events.len();
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        for &(u, v) in &self.edges {
            if u < n && v < n {
                outdeg[u] += 1;
                indeg[v] += 1;
            }
        }
        (0..n)
            .map(|i| match mode {
                DegreeMode::MaxInOut => indeg[i].max(outdeg[i]),
                DegreeMode::In => indeg[i],
                DegreeMode::Out => outdeg[i],
                DegreeMode::Total => indeg[i] + outdeg[i],
            })
            .max()
            .unwrap_or(0)
    }

    /// Event edges plus root fan-out to sources and sink fan-in to the leaf.
    pub fn augmented_edges(&self) -> Vec<(Vertex, Vertex)> {
        let n = self.events.len();
        if n == 0 {
            return vec![(Vertex::Root, Vertex::Leaf)];
        }
        let mut has_in = vec![false; n];
        let mut has_out = vec![false; n];
        for &(u, v) in &self.edges {
            has_out[u] = true;
            has_in[v] = true;
        }
        let mut out: Vec<(Vertex, Vertex)> = (0..n)
            .filter(|&i| !has_in[i])
            .map(|i| (Vertex::Root, Vertex::Event(i)))
            .collect();
        out.extend(
            self.edges
                .iter()
                .map(|&(u, v)| (Vertex::Event(u), Vertex::Event(v))),
        );
        out.extend(
            (0..n)
                .filter(|&i| !has_out[i])
                .map(|i| (Vertex::Event(i), Vertex::Leaf)),
        );
        out
    }

    /// Up to `limit` topological orders, in lexicographic order of ids.
    pub fn linear_extensions(&self, limit: usize) -> Vec<Vec<NodeId>> {
        order::linear_extensions(self.events.len(), &self.edges, limit)
    }
}

fn check_event(ev: &EventNode) -> Result<()> {
    if normalize_label(&ev.text).is_empty() {
        return Err(invalid(format!("event {} has empty text", ev.id)));
    }
    if let Some(d) = &ev.duration {
        if !d.is_consistent() {
            return Err(invalid(format!(
                "event {}: duration estimate outside the {} bucket",
                ev.id,
                d.bucket.as_str()
            )));
        }
    }
    Ok(())
}
