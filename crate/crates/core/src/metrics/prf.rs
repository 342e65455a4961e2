use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::script_graph::{normalize_label, transitive_reduction, Edge, NodeId, ScriptGraph};

/// Which denominator precision and recall use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Precision over predicted edges, recall over gold edges.
    #[default]
    Standard,
    /// Precision over gold edges, recall over predicted edges.
    PaperLiteral,
}

/// How predicted events are paired with gold events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventMatching {
    ById,
    /// Normalized-label bijection; repeated labels pair up in id order.
    #[default]
    ByLabel,
    /// Normalized-label bijection that rejects repeated labels.
    ByLabelStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl PrfScore {
    /// Two empty edge sets agree perfectly.
    pub fn from_counts(
        matched: usize,
        predicted: usize,
        gold: usize,
        convention: Convention,
    ) -> Self {
        if predicted + gold == 0 {
            return PrfScore {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                matched,
                predicted,
                gold,
            };
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let (p_den, r_den) = match convention {
            Convention::Standard => (predicted, gold),
            Convention::PaperLiteral => (gold, predicted),
        };
        PrfScore {
            precision: ratio(matched, p_den),
            recall: ratio(matched, r_den),
            // Equal to 2PR/(P+R) whenever P+R > 0, and 0 otherwise.
            f1: ratio(2 * matched, predicted + gold),
            matched,
            predicted,
            gold,
        }
    }

    /// F1 on the 0-100 scale, computed from counts so thresholds compare
    /// exactly.
    pub fn f1_percent(&self) -> f64 {
        if self.predicted + self.gold == 0 {
            100.0
        } else {
            (200 * self.matched) as f64 / (self.predicted + self.gold) as f64
        }
    }
}

pub fn prf_from_edge_sets(
    pred: &BTreeSet<Edge>,
    gold: &BTreeSet<Edge>,
    convention: Convention,
) -> PrfScore {
    let matched = pred.intersection(gold).count();
    PrfScore::from_counts(matched, pred.len(), gold.len(), convention)
}

/// Map each predicted event id to a gold event id.
pub fn match_events(
    pred: &ScriptGraph,
    gold: &ScriptGraph,
    matching: EventMatching,
) -> Result<Vec<NodeId>> {
    if pred.len() != gold.len() {
        return Err(invalid(format!(
            "event sets differ: {} predicted vs {} gold events",
            pred.len(),
            gold.len()
        )));
    }
    if matching == EventMatching::ById {
        return Ok((0..pred.len()).collect());
    }
    let mut pool: BTreeMap<String, Vec<NodeId>> = BTreeMap::new();
    for ev in gold.events() {
        pool.entry(normalize_label(&ev.text))
            .or_default()
            .push(ev.id);
    }
    if matching == EventMatching::ByLabelStrict {
        if let Some((label, _)) = pool.iter().find(|(_, ids)| ids.len() > 1) {
            return Err(invalid(format!(
                "label `{label}` is ambiguous in the gold script"
            )));
        }
    }
    for ids in pool.values_mut() {
        ids.reverse();
    }
    pred.events()
        .iter()
        .map(|ev| {
            let label = normalize_label(&ev.text);
            pool.get_mut(&label).and_then(Vec::pop).ok_or_else(|| {
                invalid(format!("predicted event `{label}` has no gold counterpart"))
            })
        })
        .collect()
}

fn reduced(g: &ScriptGraph) -> Result<BTreeSet<Edge>> {
    transitive_reduction(g.len(), g.edges())
}

/// Edge precision/recall/F1 on reduced edge sets over event nodes.
pub fn edge_prf(
    pred: &ScriptGraph,
    gold: &ScriptGraph,
    convention: Convention,
    matching: EventMatching,
) -> Result<PrfScore> {
    let map = match_events(pred, gold, matching)?;
    let pred_edges: BTreeSet<Edge> = reduced(pred)?
        .into_iter()
        .map(|(u, v)| (map[u], map[v]))
        .collect();
    Ok(prf_from_edge_sets(&pred_edges, &reduced(gold)?, convention))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script_graph::EventNode;

    fn graph(labels: &[&str], edges: &[Edge]) -> ScriptGraph {
        let events = labels
            .iter()
            .enumerate()
            .map(|(i, l)| EventNode::new(i, *l))
            .collect();
        ScriptGraph::from_parts("s", events, edges.iter().copied()).unwrap()
    }

    #[test]
    fn identical_graphs_score_one() {
        let g = graph(&["a", "b", "c"], &[(0, 1), (0, 2)]);
        let s = edge_prf(&g, &g, Convention::Standard, EventMatching::ById).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn disjoint_edges_score_zero() {
        let pred = graph(&["a", "b", "c"], &[(0, 1), (1, 2)]);
        let gold = graph(&["a", "b", "c"], &[(0, 2), (2, 1)]);
        let s = edge_prf(&pred, &gold, Convention::Standard, EventMatching::ByLabel).unwrap();
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn two_of_three_shared() {
        let pred = graph(&["a", "b", "c", "d"], &[(0, 1), (0, 2), (1, 3)]);
        let gold = graph(&["a", "b", "c", "d"], &[(0, 1), (1, 2), (1, 3)]);
        for conv in [Convention::Standard, Convention::PaperLiteral] {
            let s = edge_prf(&pred, &gold, conv, EventMatching::ByLabel).unwrap();
            assert_eq!((s.precision, s.recall), (2.0 / 3.0, 2.0 / 3.0));
            assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conventions_swap_denominators() {
        let std = PrfScore::from_counts(1, 2, 4, Convention::Standard);
        let lit = PrfScore::from_counts(1, 2, 4, Convention::PaperLiteral);
        assert_eq!((std.precision, std.recall), (0.5, 0.25));
        assert_eq!((lit.precision, lit.recall), (0.25, 0.5));
        assert_eq!(std.f1, lit.f1);
        let p = std.precision;
        let r = std.recall;
        assert!((std.f1 - 2.0 * p * r / (p + r)).abs() < 1e-15);
    }

    #[test]
    fn empty_edge_sets() {
        let both = PrfScore::from_counts(0, 0, 0, Convention::Standard);
        assert_eq!((both.f1, both.f1_percent()), (1.0, 100.0));
        let no_pred = PrfScore::from_counts(0, 0, 3, Convention::Standard);
        assert_eq!(
            (no_pred.precision, no_pred.recall, no_pred.f1),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn label_matching_handles_permuted_ids() {
        let pred = graph(&["B", "a "], &[(1, 0)]);
        let gold = graph(&["a", "b"], &[(0, 1)]);
        let s = edge_prf(&pred, &gold, Convention::Standard, EventMatching::ByLabel).unwrap();
        assert_eq!(s.f1, 1.0);
        let s = edge_prf(&pred, &gold, Convention::Standard, EventMatching::ById).unwrap();
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn mismatched_event_sets_rejected() {
        let a = graph(&["a", "b"], &[]);
        let b = graph(&["a", "c"], &[]);
        let c = graph(&["a"], &[]);
        assert!(edge_prf(&a, &b, Convention::Standard, EventMatching::ByLabel).is_err());
        assert!(edge_prf(&a, &c, Convention::Standard, EventMatching::ById).is_err());
    }

    #[test]
    fn duplicate_labels_greedy_or_strict() {
        let pred = graph(&["x", "x", "y"], &[(0, 2)]);
        let gold = graph(&["x", "y", "x"], &[(0, 1)]);
        assert_eq!(
            match_events(&pred, &gold, EventMatching::ByLabel).unwrap(),
            vec![0, 2, 1]
        );
        assert!(match_events(&pred, &gold, EventMatching::ByLabelStrict).is_err());
    }
}
