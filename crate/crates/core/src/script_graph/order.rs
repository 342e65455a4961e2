use super::{reach::adjacency, Edge, NodeId};

/// Enumerate topological orders depth-first, smallest available id first.
pub(crate) fn linear_extensions(n: usize, edges: &[Edge], limit: usize) -> Vec<Vec<NodeId>> {
    let adj = adjacency(n, edges);
    let mut indeg = vec![0usize; n];
    for list in &adj {
        for &v in list {
            indeg[v] += 1;
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    extend(&adj, &mut indeg, &mut placed, &mut prefix, limit, &mut out);
    out
}

fn extend(
    adj: &[Vec<NodeId>],
    indeg: &mut [usize],
    placed: &mut [bool],
    prefix: &mut Vec<NodeId>,
    limit: usize,
    out: &mut Vec<Vec<NodeId>>,
) {
    if out.len() >= limit {
        return;
    }
    if prefix.len() == adj.len() {
        out.push(prefix.clone());
        return;
    }
    for u in 0..adj.len() {
        if placed[u] || indeg[u] != 0 {
            continue;
        }
        placed[u] = true;
        prefix.push(u);
        adj[u].iter().for_each(|&v| indeg[v] -= 1);
        extend(adj, indeg, placed, prefix, limit, out);
        adj[u].iter().for_each(|&v| indeg[v] += 1);
        prefix.pop();
        placed[u] = false;
        if out.len() >= limit {
            return;
        }
    }
}
