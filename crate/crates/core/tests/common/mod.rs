//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proscript::metrics::{CostTable, EdgeRepMode, LabeledGraph};
use proscript::script_graph::{Edge, EventNode, ScriptGraph};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 4] = ["a", "b", "c", "d"];

/// A random reduced DAG: random order, each forward pair kept with
/// probability `density`.
pub fn random_script(rng: &mut ChaCha8Rng, n: usize, density: f64, labels: &[&str]) -> ScriptGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if rng.random_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    let events = (0..n)
        .map(|i| EventNode::new(i, labels[rng.random_range(0..labels.len())]))
        .collect();
    ScriptGraph::from_parts("scenario", events, edges).unwrap()
}

pub fn labeled(g: &ScriptGraph) -> LabeledGraph {
    LabeledGraph::new(
        g.events().iter().map(|e| e.text.clone()).collect(),
        g.edges().iter().copied(),
    )
}

/// Cost of the edit path induced by `map`, computed from first principles.
pub fn induced_cost(
    a: &LabeledGraph,
    b: &LabeledGraph,
    map: &[Option<usize>],
    c: &CostTable,
    mode: EdgeRepMode,
) -> u32 {
    let mut cost = 0;
    let mut hit = vec![false; b.len()];
    for (u, t) in map.iter().enumerate() {
        match t {
            None => cost += c.v_del,
            Some(v) => {
                hit[*v] = true;
                if a.labels[u] != b.labels[*v] {
                    cost += c.v_rep;
                }
            }
        }
    }
    cost += hit.iter().filter(|h| !**h).count() as u32 * c.v_ins;
    let image: BTreeSet<Edge> = a
        .edges
        .iter()
        .filter_map(|&(x, y)| Some((map[x]?, map[y]?)))
        .collect();
    for &(x, y) in &a.edges {
        match (map[x], map[y]) {
            (Some(p), Some(q)) if b.edges.contains(&(p, q)) => {
                let relabelled = a.labels[x] != b.labels[p] || a.labels[y] != b.labels[q];
                if mode == EdgeRepMode::EndpointRep && relabelled {
                    cost += c.e_rep;
                }
            }
            _ => cost += c.e_del,
        }
    }
    cost += b.edges.iter().filter(|e| !image.contains(e)).count() as u32 * c.e_ins;
    cost
}

/// Minimum over every injective partial mapping from `a` into `b`.
pub fn brute_force_ged(
    a: &LabeledGraph,
    b: &LabeledGraph,
    c: &CostTable,
    mode: EdgeRepMode,
) -> u32 {
    fn rec(
        a: &LabeledGraph,
        b: &LabeledGraph,
        c: &CostTable,
        mode: EdgeRepMode,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut u32,
    ) {
        if map.len() == a.len() {
            *best = (*best).min(induced_cost(a, b, map, c, mode));
            return;
        }
        map.push(None);
        rec(a, b, c, mode, map, used, best);
        map.pop();
        for v in 0..b.len() {
            if !used[v] {
                used[v] = true;
                map.push(Some(v));
                rec(a, b, c, mode, map, used, best);
                map.pop();
                used[v] = false;
            }
        }
    }
    let mut best = u32::MAX;
    rec(
        a,
        b,
        c,
        mode,
        &mut Vec::new(),
        &mut vec![false; b.len()],
        &mut best,
    );
    best
}

/// Reachability by repeated DFS, independent of the library.
pub fn reach_pairs(n: usize, edges: &[Edge]) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for s in 0..n {
        let mut stack = vec![s];
        let mut seen = vec![false; n];
        while let Some(u) = stack.pop() {
            for &(x, y) in edges {
                if x == u && !seen[y] {
                    seen[y] = true;
                    out.insert((s, y));
                    stack.push(y);
                }
            }
        }
    }
    out
}
