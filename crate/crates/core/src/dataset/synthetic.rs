use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusRecord, Source, Split};
use crate::script_graph::{DurationBucket, Edge, EventNode, ScriptGraph, TimeUnit};

/// Generator for corpora with controlled size and degree statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_scripts: usize,
    pub seed: u64,
    /// `(event count, weight)`.
    pub event_counts: Vec<(usize, f64)>,
    /// `(maximum degree, weight)`.
    pub degrees: Vec<(usize, f64)>,
    /// Chance that an event carries a duration bucket.
    pub duration_rate: f64,
}

impl Default for SyntheticConfig {
    /// Mean 5.45 events; degree shares 67.6/28.1/3.3/0.9%.
    fn default() -> Self {
        SyntheticConfig {
            n_scripts: 1000,
            seed: 0,
            event_counts: vec![(4, 0.15), (5, 0.35), (6, 0.40), (7, 0.10)],
            degrees: vec![(1, 0.676), (2, 0.281), (3, 0.033), (4, 0.009)],
            duration_rate: 0.5,
        }
    }
}

fn weighted<T: Copy>(rng: &mut ChaCha8Rng, items: &[(T, f64)]) -> T {
    let total: f64 = items.iter().map(|x| x.1).sum();
    let mut x = rng.random_range(0.0..total);
    for &(item, w) in items {
        if x < w {
            return item;
        }
        x -= w;
    }
    items.last().expect("non-empty weights").0
}

/// Reduced edges over topological positions with maximum degree `d`.
fn structure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Edge> {
    if d <= 1 {
        return (1..n).map(|i| (i - 1, i)).collect();
    }
    for _ in 0..10_000 {
        let q = rng.random_range(0.2..0.8);
        let mut edges = Vec::new();
        for j in 1..n {
            for i in 0..j {
                if rng.random_bool(q) {
                    edges.push((i, j));
                }
            }
        }
        let events = (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect();
        let g = ScriptGraph::from_parts("s", events, edges).expect("forward edges are acyclic");
        if g.max_degree() == d {
            return g.edges().to_vec();
        }
    }
    // Fan out from the first event, then continue as a chain.
    let mut edges: Vec<Edge> = (1..=d).map(|j| (0, j)).collect();
    edges.extend((d + 1..n).map(|j| (j - 1, j)));
    edges
}

pub fn synthetic_corpus(cfg: &SyntheticConfig) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_scripts)
        .map(|k| {
            let n = weighted(&mut rng, &cfg.event_counts);
            let allowed: Vec<(usize, f64)> = cfg
                .degrees
                .iter()
                .copied()
                .filter(|&(d, _)| d < n.max(2))
                .collect();
            let d = weighted(&mut rng, &allowed);
            let shape = structure(&mut rng, n, d);
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            let mut edges: Vec<Edge> = shape.iter().map(|&(a, b)| (ids[a], ids[b])).collect();
            edges.sort_unstable();
            let events = (0..n)
                .map(|i| {
                    let ev = EventNode::new(i, format!("event {i} of script {k}"));
                    if rng.random_bool(cfg.duration_rate) {
                        let unit = TimeUnit::ALL[rng.random_range(0..TimeUnit::ALL.len())];
                        ev.with_duration(DurationBucket::new(unit))
                    } else {
                        ev
                    }
                })
                .collect();
            let split = match rng.random_range(0..10) {
                0 => Split::Dev,
                1 => Split::Test,
                _ => Split::Train,
            };
            CorpusRecord {
                id: format!("synthetic-{k:05}"),
                scenario: format!("synthetic scenario {k}"),
                source: Source::Other,
                split,
                events,
                edges,
                alt_edges: None,
                parent_id: None,
                parent_edge: None,
            }
        })
        .collect()
}
