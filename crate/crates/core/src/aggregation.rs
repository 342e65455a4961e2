//! Pairwise precedence scores to a valid script.
//!
//! The pipeline is `build_adjacency` then `break_cycles` (greedy removal of
//! the lightest edge on a cycle, repeated until acyclic) then `to_script`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::script_graph::{reach, Edge, EventNode, NodeId, ScriptGraph};

/// `p[i][j]` is the probability that event `i` precedes event `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseScores {
    p: Vec<Vec<f64>>,
}

impl PairwiseScores {
    /// Square matrix with off-diagonal entries in `[0, 1]`; the diagonal is
    /// ignored.
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let n = p.len();
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if i != j && !(0.0..=1.0).contains(&x) {
                    return Err(invalid(format!("p[{i}][{j}] = {x} is not a probability")));
                }
            }
        }
        Ok(PairwiseScores { p })
    }

    /// Like [`PairwiseScores::new`], additionally requiring
    /// `|p[i][j] + p[j][i] - 1| <= eps` for every pair.
    pub fn new_complementary(p: Vec<Vec<f64>>, eps: f64) -> Result<Self> {
        let s = Self::new(p)?;
        for i in 0..s.n() {
            for j in i + 1..s.n() {
                let sum = s.p[i][j] + s.p[j][i];
                if (sum - 1.0).abs() > eps {
                    return Err(invalid(format!("p[{i}][{j}] + p[{j}][{i}] = {sum}, not 1")));
                }
            }
        }
        Ok(s)
    }

    /// Scores that put probability 1 on every pair of the script's closure.
    pub fn from_closure(g: &ScriptGraph) -> Self {
        let n = g.len();
        let mut p = vec![vec![0.0; n]; n];
        for (i, j) in g.transitive_closure() {
            p[i][j] = 1.0;
        }
        PairwiseScores { p }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.p[i][j]
    }
}

/// On-disk scores: `{"events": [...], "p": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub events: Vec<String>,
    pub p: Vec<Vec<f64>>,
}

impl ScoresFile {
    pub fn into_parts(self) -> Result<(Option<String>, Vec<EventNode>, PairwiseScores)> {
        if self.events.len() != self.p.len() {
            return Err(invalid(format!(
                "{} events but a {}-row score matrix",
                self.events.len(),
                self.p.len()
            )));
        }
        let scores = PairwiseScores::new(self.p)?;
        let events = self
            .events
            .into_iter()
            .enumerate()
            .map(|(i, t)| EventNode::new(i, t))
            .collect();
        Ok((self.scenario, events, scores))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: f64,
}

/// Directed graph with at most one weighted edge per ordered pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedDigraph {
    n: usize,
    edges: BTreeMap<Edge, f64>,
}

impl WeightedDigraph {
    pub fn new(n: usize) -> Self {
        WeightedDigraph {
            n,
            edges: BTreeMap::new(),
        }
    }

    /// Insert or overwrite `src -> dst`.
    pub fn insert(&mut self, src: NodeId, dst: NodeId, weight: f64) -> Result<()> {
        if src >= self.n || dst >= self.n {
            return Err(invalid(format!("edge {src}->{dst} outside 0..{}", self.n)));
        }
        if src == dst {
            return Err(invalid(format!("self-loop on {src}")));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(invalid(format!("weight {weight} outside [0, 1]")));
        }
        self.edges.insert((src, dst), weight);
        Ok(())
    }

    pub fn remove(&mut self, src: NodeId, dst: NodeId) -> Option<f64> {
        self.edges.remove(&(src, dst))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        self.edges.get(&(src, dst)).copied()
    }

    /// Edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = WeightedEdge> + '_ {
        self.edges
            .iter()
            .map(|(&(src, dst), &weight)| WeightedEdge { src, dst, weight })
    }

    pub fn edge_pairs(&self) -> Vec<Edge> {
        self.edges.keys().copied().collect()
    }

    pub fn is_acyclic(&self) -> bool {
        reach::is_acyclic(self.n, &self.edge_pairs())
    }

    /// First cycle met by a DFS that starts from the lowest node id and
    /// visits successors in ascending order; returned as its edge list.
    pub fn find_cycle(&self) -> Option<Vec<Edge>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let adj = reach::adjacency(self.n, &self.edge_pairs());
        let mut mark = vec![Mark::New; self.n];
        for root in 0..self.n {
            if mark[root] != Mark::New {
                continue;
            }
            // (node, next successor index)
            let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
            mark[root] = Mark::Open;
            while let Some(top) = stack.last_mut() {
                let u = top.0;
                if let Some(&v) = adj[u].get(top.1) {
                    top.1 += 1;
                    match mark[v] {
                        Mark::New => {
                            mark[v] = Mark::Open;
                            stack.push((v, 0));
                        }
                        Mark::Open => {
                            let start = stack
                                .iter()
                                .position(|&(w, _)| w == v)
                                .expect("open node is on the stack");
                            let mut cycle: Vec<Edge> = stack[start..]
                                .windows(2)
                                .map(|w| (w[0].0, w[1].0))
                                .collect();
                            cycle.push((u, v));
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[u] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// One direction per pair: the likelier one, kept when it reaches `tau`.
    ArgmaxPair,
    /// Every ordered pair with `p >= tau`.
    Threshold,
}

/// Tie rule when `p[i][j] == p[j][i]` under [`EdgePolicy::ArgmaxPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Orient the edge from the smaller id to the larger.
    #[default]
    LowToHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationConfig {
    pub edge_policy: EdgePolicy,
    pub tau: f64,
    pub tie_break: TieBreak,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig {
            edge_policy: EdgePolicy::ArgmaxPair,
            tau: 0.5,
            tie_break: TieBreak::LowToHigh,
        }
    }
}

impl AggregationConfig {
    pub fn threshold(tau: f64) -> Self {
        AggregationConfig {
            edge_policy: EdgePolicy::Threshold,
            tau,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid(format!("tau = {} must lie in (0, 1)", self.tau)));
        }
        Ok(())
    }
}

pub fn build_adjacency(
    scores: &PairwiseScores,
    cfg: &AggregationConfig,
) -> Result<WeightedDigraph> {
    cfg.validate()?;
    let n = scores.n();
    let mut wd = WeightedDigraph::new(n);
    match cfg.edge_policy {
        EdgePolicy::ArgmaxPair => {
            for i in 0..n {
                for j in i + 1..n {
                    let (fwd, back) = (scores.get(i, j), scores.get(j, i));
                    let (src, dst, w) = match cfg.tie_break {
                        TieBreak::LowToHigh if fwd >= back => (i, j, fwd),
                        TieBreak::LowToHigh => (j, i, back),
                    };
                    if w >= cfg.tau {
                        wd.insert(src, dst, w)?;
                    }
                }
            }
        }
        EdgePolicy::Threshold => {
            for i in 0..n {
                for j in 0..n {
                    if i != j && scores.get(i, j) >= cfg.tau {
                        wd.insert(i, j, scores.get(i, j))?;
                    }
                }
            }
        }
    }
    Ok(wd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleBreak {
    pub graph: WeightedDigraph,
    /// Removed edges in removal order.
    pub removed: Vec<WeightedEdge>,
}

/// Repeatedly find a cycle and delete its lightest edge (ties: smallest
/// `(src, dst)`) until the graph is acyclic.
pub fn break_cycles(wd: &WeightedDigraph) -> CycleBreak {
    let mut graph = wd.clone();
    let mut removed = Vec::new();
    while let Some(cycle) = graph.find_cycle() {
        let (src, dst) = cycle
            .into_iter()
            .min_by(|a, b| {
                let (wa, wb) = (graph.edges[a], graph.edges[b]);
                wa.total_cmp(&wb).then(a.cmp(b))
            })
            .expect("cycles are non-empty");
        let weight = graph.remove(src, dst).expect("cycle edge exists");
        removed.push(WeightedEdge { src, dst, weight });
    }
    CycleBreak { graph, removed }
}

/// Reduce an acyclic weighted graph into a script over `events`.
pub fn to_script(
    wd: &WeightedDigraph,
    events: &[EventNode],
    scenario: &str,
) -> Result<ScriptGraph> {
    if events.len() != wd.n() {
        return Err(invalid(format!(
            "{} events for a {}-node graph",
            events.len(),
            wd.n()
        )));
    }
    let pairs = wd.edge_pairs();
    if let Err(e @ Error::Cycle { .. }) = reach::topological_order(wd.n(), &pairs) {
        return Err(e);
    }
    ScriptGraph::from_parts(scenario, events.to_vec(), pairs)
}

/// The full pairwise pipeline.
pub fn predict_edges(
    events: &[EventNode],
    scores: &PairwiseScores,
    cfg: &AggregationConfig,
    scenario: &str,
) -> Result<ScriptGraph> {
    if events.len() != scores.n() {
        return Err(invalid(format!(
            "{} events but scores for {}",
            events.len(),
            scores.n()
        )));
    }
    let wd = build_adjacency(scores, cfg)?;
    to_script(&break_cycles(&wd).graph, events, scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events(n: usize) -> Vec<EventNode> {
        (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect()
    }

    fn wd(n: usize, edges: &[(NodeId, NodeId, f64)]) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(n);
        for &(u, v, w) in edges {
            g.insert(u, v, w).unwrap();
        }
        g
    }

    fn triples(g: &WeightedDigraph) -> Vec<(NodeId, NodeId, f64)> {
        g.edges().map(|e| (e.src, e.dst, e.weight)).collect()
    }

    #[test]
    fn argmax_prefers_larger_direction() {
        let s = PairwiseScores::new(vec![vec![0.0, 0.9], vec![0.2, 0.0]]).unwrap();
        let g = build_adjacency(&s, &AggregationConfig::default()).unwrap();
        assert_eq!(triples(&g), vec![(0, 1, 0.9)]);
        let s = PairwiseScores::new(vec![vec![0.0, 0.1], vec![0.7, 0.0]]).unwrap();
        let g = build_adjacency(&s, &AggregationConfig::default()).unwrap();
        assert_eq!(triples(&g), vec![(1, 0, 0.7)]);
    }

    #[test]
    fn argmax_tie_goes_low_to_high() {
        let s = PairwiseScores::new(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let g = build_adjacency(&s, &AggregationConfig::default()).unwrap();
        assert_eq!(triples(&g), vec![(0, 1, 0.5)]);
    }

    #[test]
    fn argmax_drops_pairs_below_tau() {
        let s = PairwiseScores::new(vec![vec![0.0, 0.3], vec![0.1, 0.0]]).unwrap();
        assert!(build_adjacency(&s, &AggregationConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn threshold_keeps_both_directions() {
        let s = PairwiseScores::new(vec![vec![0.6; 3]; 3]).unwrap();
        let g = build_adjacency(&s, &AggregationConfig::threshold(0.5)).unwrap();
        assert_eq!(g.len(), 6);
        assert!(!g.is_acyclic());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(PairwiseScores::new(vec![vec![0.0, 1.2], vec![0.0, 0.0]]).is_err());
        assert!(PairwiseScores::new(vec![vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert!(PairwiseScores::new(vec![vec![0.0], vec![0.0, 0.0]]).is_err());
        // Diagonal is ignored.
        assert!(PairwiseScores::new(vec![vec![7.0]]).is_ok());
        assert!(
            PairwiseScores::new_complementary(vec![vec![0.0, 0.9], vec![0.2, 0.0]], 0.05).is_err()
        );
        assert!(
            PairwiseScores::new_complementary(vec![vec![0.0, 0.8], vec![0.2, 0.0]], 1e-9).is_ok()
        );
        let s = PairwiseScores::new(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        for tau in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(build_adjacency(&s, &AggregationConfig::threshold(tau)).is_err());
        }
    }

    #[test]
    fn break_cycles_identity_on_dag() {
        let g = wd(3, &[(0, 1, 0.2), (1, 2, 0.3), (0, 2, 0.1)]);
        let out = break_cycles(&g);
        assert_eq!(out.graph, g);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn break_cycles_two_cycle() {
        let out = break_cycles(&wd(2, &[(0, 1, 0.9), (1, 0, 0.2)]));
        assert_eq!(triples(&out.graph), vec![(0, 1, 0.9)]);
        assert_eq!(
            out.removed,
            vec![WeightedEdge {
                src: 1,
                dst: 0,
                weight: 0.2
            }]
        );
    }

    #[test]
    fn break_cycles_three_cycle_with_chord() {
        // 0->1 (0.9), 1->2 (0.8), 2->0 (0.1), chord 0->2 (0.5).
        // DFS from 0 meets 0->1->2->0 first; its lightest edge is 2->0.
        let out = break_cycles(&wd(
            3,
            &[(0, 1, 0.9), (1, 2, 0.8), (2, 0, 0.1), (0, 2, 0.5)],
        ));
        assert_eq!(
            out.removed[0],
            WeightedEdge {
                src: 2,
                dst: 0,
                weight: 0.1
            }
        );
        assert_eq!(out.removed.len(), 1);
        assert!(out.graph.is_acyclic());
    }

    #[test]
    fn equal_weights_remove_smallest_pair() {
        let out = break_cycles(&wd(3, &[(0, 1, 0.5), (1, 2, 0.5), (2, 0, 0.5)]));
        assert_eq!(out.removed.len(), 1);
        assert_eq!((out.removed[0].src, out.removed[0].dst), (0, 1));
    }

    #[test]
    fn find_cycle_reports_closed_walk() {
        let g = wd(4, &[(0, 1, 0.1), (1, 2, 0.1), (2, 3, 0.1), (3, 1, 0.1)]);
        assert_eq!(g.find_cycle().unwrap(), vec![(1, 2), (2, 3), (3, 1)]);
    }

    #[test]
    fn to_script_examples() {
        let g = to_script(
            &wd(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]),
            &events(3),
            "s",
        )
        .unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        let g = to_script(&WeightedDigraph::new(3), &events(3), "s").unwrap();
        assert!(g.edges().is_empty() && g.validate().ok);
        let d = [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
        let g = to_script(&wd(4, &d), &events(4), "s").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let cyclic = wd(2, &[(0, 1, 0.5), (1, 0, 0.5)]);
        assert!(matches!(
            to_script(&cyclic, &events(2), "s"),
            Err(Error::Cycle { .. })
        ));
    }

    #[test]
    fn predict_uniform_scores_gives_id_chain() {
        let s = PairwiseScores::new(vec![vec![0.5; 4]; 4]).unwrap();
        let g = predict_edges(&events(4), &s, &AggregationConfig::default(), "s").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(
            g,
            predict_edges(&events(4), &s, &AggregationConfig::default(), "s").unwrap()
        );
    }

    #[test]
    fn predict_single_event() {
        let s = PairwiseScores::new(vec![vec![0.0]]).unwrap();
        let g = predict_edges(&events(1), &s, &AggregationConfig::default(), "s").unwrap();
        assert_eq!((g.len(), g.edges().len()), (1, 0));
        assert!(predict_edges(&events(2), &s, &AggregationConfig::default(), "s").is_err());
    }

    #[test]
    fn closure_scores_reconstruct_diamond() {
        let gold =
            ScriptGraph::from_parts("s", events(4), [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let s = PairwiseScores::from_closure(&gold);
        let g = predict_edges(gold.events(), &s, &AggregationConfig::default(), "s").unwrap();
        assert_eq!(g, gold);
    }

    #[test]
    fn scores_file_parses() {
        let f: ScoresFile =
            serde_json::from_str(r#"{"events":["a","b"],"p":[[0,0.9],[0.1,0]]}"#).unwrap();
        let (scenario, ev, s) = f.into_parts().unwrap();
        assert_eq!((scenario, ev.len(), s.get(0, 1)), (None, 2, 0.9));
        let bad: ScoresFile =
            serde_json::from_str(r#"{"events":["a"],"p":[[0,0.9],[0.1,0]]}"#).unwrap();
        assert!(bad.into_parts().is_err());
    }
}
