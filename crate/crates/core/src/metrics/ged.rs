//! Graph edit distance between scripts.
//!
//! Edit paths are induced by node assignments: every node of the first
//! graph is either substituted by a distinct node of the second graph or
//! deleted, and leftover nodes of the second graph are inserted. Edge
//! operations follow from the assignment. The exact solver is a
//! depth-first branch and bound whose lower bound solves a linear sum
//! assignment over the unassigned nodes (label cost, exact cost of edges to
//! already assigned nodes, and half the local degree mismatch). All costs
//! are doubled internally so the half terms stay integral.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::script_graph::{normalize_label, Edge, NodeId, ScriptGraph, Vertex};

/// Label given to the virtual root when virtual nodes are included.
pub const ROOT_LABEL: &str = "<root>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    #[serde(rename = "V-Del")]
    VDel,
    #[serde(rename = "V-Ins")]
    VIns,
    #[serde(rename = "V-Rep")]
    VRep,
    #[serde(rename = "E-Del")]
    EDel,
    #[serde(rename = "E-Ins")]
    EIns,
    #[serde(rename = "E-Rep")]
    ERep,
}

impl OpKind {
    pub const ALL: [OpKind; 6] = [
        OpKind::VDel,
        OpKind::VIns,
        OpKind::VRep,
        OpKind::EDel,
        OpKind::EIns,
        OpKind::ERep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::VDel => "V-Del",
            OpKind::VIns => "V-Ins",
            OpKind::VRep => "V-Rep",
            OpKind::EDel => "E-Del",
            OpKind::EIns => "E-Ins",
            OpKind::ERep => "E-Rep",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Node ids refer to the first graph for deletions and replacements and to
/// the second graph for insertions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpPayload {
    Vertex {
        node: NodeId,
        label: String,
    },
    Relabel {
        from: NodeId,
        to: NodeId,
        old: String,
        new: String,
    },
    Edge {
        src: NodeId,
        dst: NodeId,
    },
    EdgeRep {
        from: Edge,
        to: Edge,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: OpKind,
    pub payload: OpPayload,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub total_cost: u32,
    /// Image of each first-graph node in the second graph (`None`: deleted).
    pub mapping: Vec<Option<NodeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    #[serde(rename = "V-Del")]
    pub v_del: usize,
    #[serde(rename = "V-Ins")]
    pub v_ins: usize,
    #[serde(rename = "V-Rep")]
    pub v_rep: usize,
    #[serde(rename = "E-Del")]
    pub e_del: usize,
    #[serde(rename = "E-Ins")]
    pub e_ins: usize,
    #[serde(rename = "E-Rep")]
    pub e_rep: usize,
}

impl OpCounts {
    pub fn get(&self, kind: OpKind) -> usize {
        match kind {
            OpKind::VDel => self.v_del,
            OpKind::VIns => self.v_ins,
            OpKind::VRep => self.v_rep,
            OpKind::EDel => self.e_del,
            OpKind::EIns => self.e_ins,
            OpKind::ERep => self.e_rep,
        }
    }

    fn bump(&mut self, kind: OpKind) {
        match kind {
            OpKind::VDel => self.v_del += 1,
            OpKind::VIns => self.v_ins += 1,
            OpKind::VRep => self.v_rep += 1,
            OpKind::EDel => self.e_del += 1,
            OpKind::EIns => self.e_ins += 1,
            OpKind::ERep => self.e_rep += 1,
        }
    }

    pub fn total(&self) -> usize {
        OpKind::ALL.iter().map(|&k| self.get(k)).sum()
    }
}

/// Number of operations of each kind in `es`.
pub fn ged_breakdown(es: &EditScript) -> OpCounts {
    let mut c = OpCounts::default();
    es.ops.iter().for_each(|op| c.bump(op.kind));
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub v_del: u32,
    pub v_ins: u32,
    pub v_rep: u32,
    pub e_del: u32,
    pub e_ins: u32,
    pub e_rep: u32,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            v_del: 1,
            v_ins: 1,
            v_rep: 1,
            e_del: 1,
            e_ins: 1,
            e_rep: 1,
        }
    }
}

impl CostTable {
    pub fn get(&self, kind: OpKind) -> u32 {
        match kind {
            OpKind::VDel => self.v_del,
            OpKind::VIns => self.v_ins,
            OpKind::VRep => self.v_rep,
            OpKind::EDel => self.e_del,
            OpKind::EIns => self.e_ins,
            OpKind::ERep => self.e_rep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMatch {
    Exact,
    #[default]
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRepMode {
    #[default]
    Off,
    /// A kept edge with a relabelled endpoint counts as E-Rep.
    EndpointRep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GedConfig {
    pub node_match: NodeMatch,
    /// Limit on the combined node count for exact search.
    pub max_exact_nodes: usize,
    pub edge_rep_mode: EdgeRepMode,
    pub costs: CostTable,
    /// Add the virtual root and scenario leaf before comparing.
    pub include_virtual: bool,
    /// Fall back to beam search with this width above `max_exact_nodes`.
    pub approx_beam: Option<usize>,
}

impl Default for GedConfig {
    fn default() -> Self {
        GedConfig {
            node_match: NodeMatch::Normalized,
            max_exact_nodes: 12,
            edge_rep_mode: EdgeRepMode::Off,
            costs: CostTable::default(),
            include_virtual: false,
            approx_beam: None,
        }
    }
}

/// Node-labelled directed graph the edit distance operates on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub labels: Vec<String>,
    pub edges: BTreeSet<Edge>,
}

impl LabeledGraph {
    pub fn new(labels: Vec<String>, edges: impl IntoIterator<Item = Edge>) -> Self {
        LabeledGraph {
            labels,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn from_script(g: &ScriptGraph, node_match: NodeMatch, include_virtual: bool) -> Self {
        let label = |s: &str| match node_match {
            NodeMatch::Exact => s.to_string(),
            NodeMatch::Normalized => normalize_label(s),
        };
        let mut labels: Vec<String> = g.events().iter().map(|e| label(&e.text)).collect();
        let n = labels.len();
        if !include_virtual {
            return LabeledGraph::new(labels, g.edges().iter().copied());
        }
        labels.push(ROOT_LABEL.to_string());
        labels.push(label(g.scenario()));
        let idx = |v: Vertex| match v {
            Vertex::Event(i) => i,
            Vertex::Root => n,
            Vertex::Leaf => n + 1,
        };
        let edges = g
            .augmented_edges()
            .into_iter()
            .map(|(a, b)| (idx(a), idx(b)));
        LabeledGraph::new(labels, edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Equal up to a relabelling of node ids.
    pub fn is_isomorphic(&self, other: &LabeledGraph) -> bool {
        if self.len() != other.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let mut a = self.labels.clone();
        let mut b = other.labels.clone();
        a.sort();
        b.sort();
        if a != b {
            return false;
        }
        let mut used = vec![false; other.len()];
        let mut map = vec![usize::MAX; self.len()];
        iso_extend(self, other, 0, &mut map, &mut used)
    }
}

fn iso_extend(
    a: &LabeledGraph,
    b: &LabeledGraph,
    k: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if k == a.len() {
        return a
            .edges
            .iter()
            .all(|&(u, v)| b.edges.contains(&(map[u], map[v])));
    }
    for t in 0..b.len() {
        if used[t] || a.labels[k] != b.labels[t] {
            continue;
        }
        let consistent = (0..k).all(|w| {
            a.edges.contains(&(k, w)) == b.edges.contains(&(t, map[w]))
                && a.edges.contains(&(w, k)) == b.edges.contains(&(map[w], t))
        });
        if !consistent {
            continue;
        }
        used[t] = true;
        map[k] = t;
        if iso_extend(a, b, k + 1, map, used) {
            return true;
        }
        used[t] = false;
    }
    map[k] = usize::MAX;
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GedResult {
    pub cost: u32,
    pub script: EditScript,
    /// False when the cost came from beam search (an upper bound).
    pub exact: bool,
}

/// Exact edit distance between two scripts.
pub fn ged(g1: &ScriptGraph, g2: &ScriptGraph, cfg: &GedConfig) -> Result<GedResult> {
    let a = LabeledGraph::from_script(g1, cfg.node_match, cfg.include_virtual);
    let b = LabeledGraph::from_script(g2, cfg.node_match, cfg.include_virtual);
    ged_labeled(&a, &b, cfg)
}

/// Beam-limited edit distance; never below the exact value.
pub fn ged_approx(
    g1: &ScriptGraph,
    g2: &ScriptGraph,
    cfg: &GedConfig,
    beam: usize,
) -> Result<GedResult> {
    let a = LabeledGraph::from_script(g1, cfg.node_match, cfg.include_virtual);
    let b = LabeledGraph::from_script(g2, cfg.node_match, cfg.include_virtual);
    ged_labeled_approx(&a, &b, cfg, beam)
}

pub fn ged_labeled(a: &LabeledGraph, b: &LabeledGraph, cfg: &GedConfig) -> Result<GedResult> {
    let nodes = a.len() + b.len();
    if nodes > cfg.max_exact_nodes {
        return match cfg.approx_beam {
            Some(beam) => ged_labeled_approx(a, b, cfg, beam),
            None => Err(Error::SizeLimit {
                nodes,
                limit: cfg.max_exact_nodes,
            }),
        };
    }
    let mut search = Search::new(a, b, cfg);
    search.exact();
    finish(a, b, cfg, &search, true)
}

pub fn ged_labeled_approx(
    a: &LabeledGraph,
    b: &LabeledGraph,
    cfg: &GedConfig,
    beam: usize,
) -> Result<GedResult> {
    let mut search = Search::new(a, b, cfg);
    search.beam(beam.max(1));
    finish(a, b, cfg, &search, false)
}

fn finish(
    a: &LabeledGraph,
    b: &LabeledGraph,
    cfg: &GedConfig,
    search: &Search,
    exact: bool,
) -> Result<GedResult> {
    let mapping: Vec<Option<NodeId>> = search
        .best_map
        .iter()
        .map(|&t| (t != DELETED).then_some(t))
        .collect();
    let script = edit_script(a, b, &mapping, cfg);
    if script.total_cost * 2 != search.best {
        return Err(Error::PostCheck(format!(
            "script cost {} disagrees with search cost {}",
            script.total_cost,
            search.best / 2
        )));
    }
    let applied = apply(a, &script)?;
    if applied.labels != b.labels || applied.edges != b.edges {
        return Err(Error::PostCheck(
            "applying the script does not reproduce the target".into(),
        ));
    }
    Ok(GedResult {
        cost: script.total_cost,
        script,
        exact,
    })
}

/// The edit path induced by `mapping` (first-graph node to second-graph
/// node, `None` for deletion).
pub fn edit_script(
    a: &LabeledGraph,
    b: &LabeledGraph,
    mapping: &[Option<NodeId>],
    cfg: &GedConfig,
) -> EditScript {
    let costs = cfg.costs;
    let mut ops = Vec::new();
    let mut push = |kind, payload| {
        ops.push(EditOp {
            kind,
            payload,
            cost: costs.get(kind),
        })
    };
    let mut hit = vec![false; b.len()];
    for (u, t) in mapping.iter().enumerate() {
        match *t {
            None => push(
                OpKind::VDel,
                OpPayload::Vertex {
                    node: u,
                    label: a.labels[u].clone(),
                },
            ),
            Some(v) => {
                hit[v] = true;
                if a.labels[u] != b.labels[v] {
                    push(
                        OpKind::VRep,
                        OpPayload::Relabel {
                            from: u,
                            to: v,
                            old: a.labels[u].clone(),
                            new: b.labels[v].clone(),
                        },
                    );
                }
            }
        }
    }
    for v in (0..b.len()).filter(|&v| !hit[v]) {
        push(
            OpKind::VIns,
            OpPayload::Vertex {
                node: v,
                label: b.labels[v].clone(),
            },
        );
    }
    let relabelled = |u: NodeId| mapping[u].is_some_and(|v| a.labels[u] != b.labels[v]);
    let mut covered = BTreeSet::new();
    for &(x, y) in &a.edges {
        match (mapping[x], mapping[y]) {
            (Some(p), Some(q)) if b.edges.contains(&(p, q)) => {
                covered.insert((p, q));
                if cfg.edge_rep_mode == EdgeRepMode::EndpointRep && (relabelled(x) || relabelled(y))
                {
                    push(
                        OpKind::ERep,
                        OpPayload::EdgeRep {
                            from: (x, y),
                            to: (p, q),
                        },
                    );
                }
            }
            _ => push(OpKind::EDel, OpPayload::Edge { src: x, dst: y }),
        }
    }
    for &(p, q) in b.edges.difference(&covered) {
        push(OpKind::EIns, OpPayload::Edge { src: p, dst: q });
    }
    let total_cost = ops.iter().map(|o| o.cost).sum();
    EditScript {
        ops,
        total_cost,
        mapping: mapping.to_vec(),
    }
}

/// Execute `script` on `a`. The result is expressed in the second graph's
/// node ids.
pub fn apply(a: &LabeledGraph, script: &EditScript) -> Result<LabeledGraph> {
    let fail = |m: String| Err(Error::PostCheck(m));
    if script.mapping.len() != a.len() {
        return fail(format!(
            "mapping covers {} of {} nodes",
            script.mapping.len(),
            a.len()
        ));
    }
    let mut deleted = vec![false; a.len()];
    let mut relabel: HashMap<NodeId, &str> = HashMap::new();
    let mut inserted: BTreeMap<NodeId, &str> = BTreeMap::new();
    let mut dropped_edges = BTreeSet::new();
    let mut new_edges = Vec::new();
    for op in &script.ops {
        match (&op.kind, &op.payload) {
            (OpKind::VDel, OpPayload::Vertex { node, .. }) if *node < a.len() => {
                deleted[*node] = true
            }
            (OpKind::VIns, OpPayload::Vertex { node, label }) => {
                inserted.insert(*node, label);
            }
            (OpKind::VRep, OpPayload::Relabel { from, new, .. }) => {
                relabel.insert(*from, new);
            }
            (OpKind::EDel, OpPayload::Edge { src, dst }) => {
                dropped_edges.insert((*src, *dst));
            }
            (OpKind::EIns, OpPayload::Edge { src, dst }) => new_edges.push((*src, *dst)),
            (OpKind::ERep, OpPayload::EdgeRep { .. }) => {}
            (kind, payload) => return fail(format!("malformed {kind} op: {payload:?}")),
        }
    }
    let mut labels: BTreeMap<NodeId, String> = BTreeMap::new();
    for (u, &gone) in deleted.iter().enumerate() {
        match (gone, script.mapping[u]) {
            (true, None) => {}
            (false, Some(v)) => {
                let label = relabel.get(&u).copied().unwrap_or(&a.labels[u]);
                if labels.insert(v, label.to_string()).is_some() {
                    return fail(format!("node {v} produced twice"));
                }
            }
            _ => return fail(format!("node {u}: deletion and mapping disagree")),
        }
    }
    for (&v, &label) in &inserted {
        if labels.insert(v, label.to_string()).is_some() {
            return fail(format!("node {v} produced twice"));
        }
    }
    if labels.keys().copied().ne(0..labels.len()) {
        return fail("resulting node ids are not contiguous".into());
    }
    let mut edges = BTreeSet::new();
    for &(x, y) in &a.edges {
        if dropped_edges.contains(&(x, y)) {
            continue;
        }
        match (script.mapping[x], script.mapping[y]) {
            (Some(p), Some(q)) => {
                edges.insert((p, q));
            }
            _ => return fail(format!("edge {x}->{y} left dangling")),
        }
    }
    for e in new_edges {
        if e.0 >= labels.len() || e.1 >= labels.len() || !edges.insert(e) {
            return fail(format!("cannot insert edge {}->{}", e.0, e.1));
        }
    }
    Ok(LabeledGraph {
        labels: labels.into_values().collect(),
        edges,
    })
}

const UNASSIGNED: usize = usize::MAX;
const DELETED: usize = usize::MAX - 1;
const INF: i64 = 1 << 40;

struct Search {
    n1: usize,
    n2: usize,
    adj1: Vec<bool>,
    adj2: Vec<bool>,
    /// `label_eq[u * n2 + v]`
    label_eq: Vec<bool>,
    /// Costs doubled.
    c: CostTable,
    erep: bool,
    order: Vec<NodeId>,
    map: Vec<usize>,
    used: Vec<bool>,
    best: u32,
    best_map: Vec<usize>,
}

impl Search {
    fn new(a: &LabeledGraph, b: &LabeledGraph, cfg: &GedConfig) -> Self {
        let (n1, n2) = (a.len(), b.len());
        let mut adj1 = vec![false; n1 * n1];
        a.edges.iter().for_each(|&(u, v)| adj1[u * n1 + v] = true);
        let mut adj2 = vec![false; n2 * n2];
        b.edges.iter().for_each(|&(u, v)| adj2[u * n2 + v] = true);
        let mut label_eq = vec![false; n1 * n2];
        for u in 0..n1 {
            for v in 0..n2 {
                label_eq[u * n2 + v] = a.labels[u] == b.labels[v];
            }
        }
        let k = cfg.costs;
        let c = CostTable {
            v_del: 2 * k.v_del,
            v_ins: 2 * k.v_ins,
            v_rep: 2 * k.v_rep,
            e_del: 2 * k.e_del,
            e_ins: 2 * k.e_ins,
            e_rep: 2 * k.e_rep,
        };
        let degree = |u: NodeId| a.edges.iter().filter(|e| e.0 == u || e.1 == u).count();
        let mut order: Vec<NodeId> = (0..n1).collect();
        order.sort_by_key(|&u| (std::cmp::Reverse(degree(u)), u));
        Search {
            n1,
            n2,
            adj1,
            adj2,
            label_eq,
            c,
            erep: cfg.edge_rep_mode == EdgeRepMode::EndpointRep,
            order,
            map: vec![UNASSIGNED; n1],
            used: vec![false; n2],
            best: u32::MAX,
            best_map: vec![DELETED; n1],
        }
    }

    #[inline]
    fn e1(&self, u: NodeId, v: NodeId) -> bool {
        self.adj1[u * self.n1 + v]
    }

    #[inline]
    fn e2(&self, u: NodeId, v: NodeId) -> bool {
        self.adj2[u * self.n2 + v]
    }

    #[inline]
    fn same(&self, u: NodeId, v: NodeId) -> bool {
        self.label_eq[u * self.n2 + v]
    }

    /// Cost of one first-graph edge against one second-graph edge slot.
    #[inline]
    fn edge_pair(&self, in1: bool, in2: bool, relabelled: bool) -> u32 {
        match (in1, in2) {
            (true, true) if self.erep && relabelled => self.c.e_rep,
            (true, true) | (false, false) => 0,
            (true, false) => self.c.e_del,
            (false, true) => self.c.e_ins,
        }
    }

    /// Added cost of sending `u` to `t` given the current partial map.
    fn increment(&self, u: NodeId, t: usize) -> u32 {
        let mut cost = 0;
        if t == DELETED {
            cost += self.c.v_del;
            for w in 0..self.n1 {
                if self.map[w] != UNASSIGNED {
                    cost += self.c.e_del * (self.e1(u, w) as u32 + self.e1(w, u) as u32);
                }
            }
            return cost;
        }
        let rel_u = !self.same(u, t);
        if rel_u {
            cost += self.c.v_rep;
        }
        for w in 0..self.n1 {
            let img = self.map[w];
            if img == UNASSIGNED {
                continue;
            }
            if img == DELETED {
                cost += self.c.e_del * (self.e1(u, w) as u32 + self.e1(w, u) as u32);
                continue;
            }
            let rel = rel_u || !self.same(w, img);
            cost += self.edge_pair(self.e1(u, w), self.e2(t, img), rel);
            cost += self.edge_pair(self.e1(w, u), self.e2(img, t), rel);
        }
        cost
    }

    /// Cost of inserting every unused second-graph node, once all
    /// first-graph nodes are placed.
    fn completion(&self) -> u32 {
        let mut cost = 0;
        for v in 0..self.n2 {
            if self.used[v] {
                continue;
            }
            cost += self.c.v_ins;
            for x in 0..self.n2 {
                // Edges between two unused nodes are counted once.
                if self.used[x] || x > v {
                    cost += self.c.e_ins * (self.e2(v, x) as u32 + self.e2(x, v) as u32);
                }
            }
        }
        cost
    }

    fn lower_bound(&self) -> u32 {
        self.assignment_bound().0
    }

    /// LSAP relaxation over unassigned nodes. Returns the bound and, for
    /// each unassigned first-graph node, its relaxed target.
    fn assignment_bound(&self) -> (u32, Vec<(NodeId, usize)>) {
        let rows: Vec<NodeId> = (0..self.n1)
            .filter(|&u| self.map[u] == UNASSIGNED)
            .collect();
        let cols: Vec<NodeId> = (0..self.n2).filter(|&v| !self.used[v]).collect();
        let (r1, r2) = (rows.len(), cols.len());
        if r1 + r2 == 0 {
            return (0, Vec::new());
        }
        let out1 = |u: NodeId| rows.iter().filter(|&&w| self.e1(u, w)).count() as i64;
        let in1 = |u: NodeId| rows.iter().filter(|&&w| self.e1(w, u)).count() as i64;
        let out2 = |v: NodeId| cols.iter().filter(|&&x| self.e2(v, x)).count() as i64;
        let in2 = |v: NodeId| cols.iter().filter(|&&x| self.e2(x, v)).count() as i64;
        let (ed, ei) = (self.c.e_del as i64, self.c.e_ins as i64);
        let half_mismatch = |a: i64, b: i64| {
            if a > b {
                (a - b) * ed / 2
            } else {
                (b - a) * ei / 2
            }
        };

        let deg1: Vec<(i64, i64)> = rows.iter().map(|&u| (out1(u), in1(u))).collect();
        let deg2: Vec<(i64, i64)> = cols.iter().map(|&v| (out2(v), in2(v))).collect();
        let size = r1 + r2;
        let mut m = Matrix::new(size, size, INF);
        for (i, &u) in rows.iter().enumerate() {
            for (j, &v) in cols.iter().enumerate() {
                let cost = self.increment(u, v) as i64
                    + half_mismatch(deg1[i].0, deg2[j].0)
                    + half_mismatch(deg1[i].1, deg2[j].1);
                m[(i, j)] = cost;
            }
            m[(i, r2 + i)] = self.increment(u, DELETED) as i64 + (deg1[i].0 + deg1[i].1) * ed / 2;
        }
        for (j, &v) in cols.iter().enumerate() {
            let mut attached = 0i64;
            for x in 0..self.n2 {
                if self.used[x] {
                    attached += self.e2(v, x) as i64 + self.e2(x, v) as i64;
                }
            }
            m[(r1 + j, j)] = self.c.v_ins as i64 + attached * ei + (deg2[j].0 + deg2[j].1) * ei / 2;
            for i in 0..r1 {
                m[(r1 + j, r2 + i)] = 0;
            }
        }
        let (total, assign) = kuhn_munkres_min(&m);
        let targets = rows
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                (
                    u,
                    if assign[i] < r2 {
                        cols[assign[i]]
                    } else {
                        DELETED
                    },
                )
            })
            .collect();
        (total.max(0) as u32, targets)
    }

    fn place(&mut self, u: NodeId, t: usize) {
        self.map[u] = t;
        if t != DELETED {
            self.used[t] = true;
        }
    }

    fn unplace(&mut self, u: NodeId) {
        let t = self.map[u];
        if t != DELETED {
            self.used[t] = false;
        }
        self.map[u] = UNASSIGNED;
    }

    /// Full cost of a complete map built in search order.
    fn evaluate(&mut self, targets: &[usize]) -> u32 {
        let mut cost = 0;
        let order = self.order.clone();
        for &u in &order {
            cost += self.increment(u, targets[u]);
            self.place(u, targets[u]);
        }
        cost += self.completion();
        for &u in &order {
            self.unplace(u);
        }
        cost
    }

    fn seed_upper_bound(&mut self) {
        let (_, relaxed) = self.assignment_bound();
        let mut targets = vec![DELETED; self.n1];
        relaxed.into_iter().for_each(|(u, t)| targets[u] = t);
        let cost = self.evaluate(&targets);
        self.best = cost;
        self.best_map = targets;
    }

    fn children(&mut self, u: NodeId, g: u32) -> Vec<(u32, u32, usize)> {
        let mut out = Vec::new();
        let candidates: Vec<usize> = (0..self.n2)
            .filter(|&v| !self.used[v])
            .chain(std::iter::once(DELETED))
            .collect();
        for t in candidates {
            let gc = g + self.increment(u, t);
            if gc >= self.best {
                continue;
            }
            self.place(u, t);
            let h = if self.map.iter().all(|&m| m != UNASSIGNED) {
                self.completion()
            } else {
                self.lower_bound()
            };
            self.unplace(u);
            // Real costs are even in doubled units.
            let f = (gc + h + 1) & !1;
            if f < self.best {
                out.push((f, gc, t));
            }
        }
        out.sort_unstable();
        out
    }

    fn exact(&mut self) {
        self.seed_upper_bound();
        self.dfs(0, 0);
    }

    fn dfs(&mut self, depth: usize, g: u32) {
        if depth == self.n1 {
            let total = g + self.completion();
            if total < self.best {
                self.best = total;
                self.best_map = self.map.clone();
            }
            return;
        }
        let u = self.order[depth];
        for (f, gc, t) in self.children(u, g) {
            if f >= self.best {
                break;
            }
            self.place(u, t);
            self.dfs(depth + 1, gc);
            self.unplace(u);
        }
    }

    fn beam(&mut self, width: usize) {
        self.seed_upper_bound();
        // (f, g, partial targets in search order)
        let mut frontier: Vec<(u32, u32, Vec<usize>)> = vec![(0, 0, Vec::new())];
        for depth in 0..self.n1 {
            let u = self.order[depth];
            let mut next = Vec::new();
            for (_, g, prefix) in &frontier {
                for (k, &t) in prefix.iter().enumerate() {
                    self.place(self.order[k], t);
                }
                for (f, gc, t) in self.children(u, *g) {
                    let mut p = prefix.clone();
                    p.push(t);
                    next.push((f, gc, p));
                }
                for k in 0..prefix.len() {
                    self.unplace(self.order[k]);
                }
            }
            next.sort();
            next.truncate(width);
            frontier = next;
        }
        for (_, g, prefix) in frontier {
            for (k, &t) in prefix.iter().enumerate() {
                self.place(self.order[k], t);
            }
            let total = g + self.completion();
            if total < self.best {
                self.best = total;
                self.best_map = self.map.clone();
            }
            for k in 0..prefix.len() {
                self.unplace(self.order[k]);
            }
        }
    }
}
