//! Reachability primitives over dense node ranges `0..n`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{Edge, NodeId};
use crate::error::{Error, Result};

/// Fixed-width bit rows, one per node.
#[derive(Debug, Clone)]
pub(crate) struct BitMatrix {
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub(crate) fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix {
            words,
            bits: vec![0; words * n],
        }
    }

    #[inline]
    pub(crate) fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words + col / 64] & (1 << (col % 64)) != 0
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    /// `row |= other_row`
    fn union_row(&mut self, row: usize, other: usize) {
        if row == other {
            return;
        }
        let (w, start_r, start_o) = (self.words, row * self.words, other * self.words);
        for k in 0..w {
            let v = self.bits[start_o + k];
            self.bits[start_r + k] |= v;
        }
    }
}

pub(crate) fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Kahn's algorithm, always releasing the smallest available id first.
///
/// On a cyclic relation the error names an edge whose endpoints both lie on
/// the unreleased remainder.
pub fn topological_order(n: usize, edges: &[Edge]) -> Result<Vec<NodeId>> {
    let adj = adjacency(n, edges);
    let mut indeg = vec![0usize; n];
    for list in &adj {
        for &v in list {
            indeg[v] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    let done: Vec<bool> = {
        let mut d = vec![false; n];
        order.iter().for_each(|&u| d[u] = true);
        d
    };
    let edge = edges
        .iter()
        .copied()
        .filter(|&(u, v)| !done[u] && !done[v])
        .min()
        .expect("unreleased nodes imply a remaining edge");
    Err(Error::Cycle { edge })
}

pub fn is_acyclic(n: usize, edges: &[Edge]) -> bool {
    topological_order(n, edges).is_ok()
}

/// Strict reachability (paths of length >= 1). Works on cyclic input too.
pub(crate) fn reachability(n: usize, edges: &[Edge]) -> BitMatrix {
    let adj = adjacency(n, edges);
    let mut reach = BitMatrix::new(n);
    match topological_order(n, edges) {
        Ok(order) => {
            for &u in order.iter().rev() {
                for &w in &adj[u] {
                    reach.set(u, w);
                    reach.union_row(u, w);
                }
            }
        }
        Err(_) => {
            let mut stack = Vec::new();
            for s in 0..n {
                stack.extend(adj[s].iter().copied());
                while let Some(v) = stack.pop() {
                    if !reach.get(s, v) {
                        reach.set(s, v);
                        stack.extend(adj[v].iter().copied());
                    }
                }
            }
        }
    }
    reach
}

/// All pairs `(i, j)` joined by a directed path.
pub fn transitive_closure(n: usize, edges: &[Edge]) -> BTreeSet<Edge> {
    let reach = reachability(n, edges);
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach.get(i, j) {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Unique minimal edge set with the same reachability as `edges`.
///
/// Duplicates are collapsed. Self-loops and cycles are rejected.
pub fn transitive_reduction(n: usize, edges: &[Edge]) -> Result<BTreeSet<Edge>> {
    check_range(n, edges)?;
    if let Some(&e) = edges.iter().find(|(u, v)| u == v) {
        return Err(Error::Cycle { edge: e });
    }
    topological_order(n, edges)?;
    let reach = reachability(n, edges);
    let adj = adjacency(n, edges);
    let mut out = BTreeSet::new();
    for (u, succ) in adj.iter().enumerate() {
        for &v in succ {
            let shortcut = succ.iter().any(|&w| w != v && reach.get(w, v));
            if !shortcut {
                out.insert((u, v));
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_range(n: usize, edges: &[Edge]) -> Result<()> {
    match edges.iter().find(|&&(u, v)| u >= n || v >= n) {
        Some(&(u, v)) => Err(Error::InvalidArgument(format!(
            "edge {u}->{v} references a node outside 0..{n}"
        ))),
        None => Ok(()),
    }
}
