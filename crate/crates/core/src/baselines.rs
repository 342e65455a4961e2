//! Seeded random scripts used as a reference point for model scores.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::CorpusRecord;
use crate::error::{invalid, Result};
use crate::metrics::{corpus_report, EvalItem, EvalReport, ReportConfig};
use crate::script_graph::{Edge, EventNode, ScriptGraph};

/// Default chance of a second parent in `random-dag`.
pub const DEFAULT_P_BRANCH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PolicyKind {
    /// A uniformly random permutation linked as a chain.
    RandomChain,
    /// Random order; each later event takes one uniform earlier parent,
    /// plus a second one with probability `p_branch`.
    RandomDag { p_branch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomPolicy {
    pub kind: PolicyKind,
    pub seed: u64,
}

impl RandomPolicy {
    pub fn chain(seed: u64) -> Self {
        RandomPolicy {
            kind: PolicyKind::RandomChain,
            seed,
        }
    }

    pub fn dag(p_branch: f64, seed: u64) -> Self {
        RandomPolicy {
            kind: PolicyKind::RandomDag { p_branch },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::RandomDag { p_branch } if !(0.0..=1.0).contains(&p_branch) => Err(invalid(
                format!("p_branch must lie in [0, 1], got {p_branch}"),
            )),
            _ => Ok(()),
        }
    }

    /// Same kind, seed for the `index`-th record.
    pub fn for_record(&self, index: usize) -> Self {
        RandomPolicy {
            kind: self.kind,
            seed: self.seed ^ index as u64,
        }
    }
}

fn random_edges(n: usize, kind: PolicyKind, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    match kind {
        PolicyKind::RandomChain => order.windows(2).map(|w| (w[0], w[1])).collect(),
        PolicyKind::RandomDag { p_branch } => {
            let mut edges = Vec::new();
            for k in 1..n {
                let first = rng.random_range(0..k);
                edges.push((order[first], order[k]));
                if k >= 2 && rng.random_bool(p_branch) {
                    let mut second = rng.random_range(0..k - 1);
                    if second >= first {
                        second += 1;
                    }
                    edges.push((order[second], order[k]));
                }
            }
            edges
        }
    }
}

/// A random valid script over `events` (ids are positions).
pub fn random_script(
    events: &[EventNode],
    scenario: &str,
    policy: &RandomPolicy,
) -> Result<ScriptGraph> {
    policy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let edges = random_edges(events.len(), policy.kind, &mut rng);
    ScriptGraph::from_parts(scenario, events.to_vec(), edges)
}

/// Score one random script per record against that record's primary
/// annotation. Record `i` uses seed `policy.seed ^ i`.
pub fn random_baseline_eval(
    records: &[CorpusRecord],
    policy: &RandomPolicy,
    cfg: &ReportConfig,
) -> Result<EvalReport> {
    policy.validate()?;
    let items = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let gold = r.script()?;
            let pred = random_script(gold.events(), gold.scenario(), &policy.for_record(i))?;
            Ok(EvalItem {
                id: r.id.clone(),
                pred,
                golds: vec![gold],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    corpus_report(&items, cfg)
}
