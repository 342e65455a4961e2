mod common;

use std::collections::BTreeSet;

use common::{random_script, reach_pairs, LABELS};
use proptest::prelude::*;
use proscript::aggregation::{
    break_cycles, predict_edges, AggregationConfig, PairwiseScores, WeightedDigraph,
};
use proscript::baselines::{random_script as baseline_script, RandomPolicy};
use proscript::dataset::{
    agreement_f1, agreement_filter, parse_record, CorpusRecord, Source, Split,
};
use proscript::dot::{emit_dot, parse_dot, parse_lenient};
use proscript::metrics::{edge_prf, Convention, EventMatching};
use proscript::script_graph::{
    transitive_reduction, DurationBucket, EdgeInsert, EventNode, ScriptGraph, TimeUnit,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seeded(seed: u64, max_n: usize, density: f64) -> ScriptGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=max_n);
    random_script(&mut rng, n, density, &LABELS)
}

fn forward_edges() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..9).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let k = pairs.len();
        (Just(n), proptest::sample::subsequence(pairs, 0..=k))
    })
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}( [a-z]{1,6}){0,3}",
        "[ -~]{1,12}".prop_filter("non-blank", |s| !s.trim().is_empty()),
        Just("say \"hi\" \\ then".to_string()),
        Just("préparer le café".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_is_idempotent_minimal_and_preserves_reachability((n, edges) in forward_edges()) {
        let reduced: Vec<_> = transitive_reduction(n, &edges).unwrap().into_iter().collect();
        let again: Vec<_> = transitive_reduction(n, &reduced).unwrap().into_iter().collect();
        prop_assert_eq!(&again, &reduced);
        prop_assert_eq!(reach_pairs(n, &reduced), reach_pairs(n, &edges));
        for skip in 0..reduced.len() {
            let fewer: Vec<_> = reduced.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, e)| *e).collect();
            prop_assert_ne!(reach_pairs(n, &fewer), reach_pairs(n, &edges));
        }
    }

    #[test]
    fn closure_matches_oracle((n, edges) in forward_edges()) {
        let events = (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect();
        let g = ScriptGraph::from_parts("s", events, edges.clone()).unwrap();
        prop_assert_eq!(g.transitive_closure(), reach_pairs(n, &edges));
        prop_assert!(g.validate().ok);
    }

    #[test]
    fn incremental_insertion_matches_batch((n, edges) in forward_edges(), seed in any::<u64>()) {
        let mut order = edges.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut g = ScriptGraph::new("s").unwrap();
        for i in 0..n {
            g.add_event(format!("e{i}"), None).unwrap();
        }
        for (u, v) in order {
            let before = g.transitive_closure();
            match g.add_edge(u, v).unwrap() {
                EdgeInsert::Redundant => prop_assert!(before.contains(&(u, v))),
                EdgeInsert::Inserted { .. } => prop_assert!(!before.contains(&(u, v))),
            }
        }
        let expected: Vec<_> = transitive_reduction(n, &edges).unwrap().into_iter().collect();
        prop_assert_eq!(g.edges(), expected.as_slice());
    }

    #[test]
    fn cyclic_insertion_rejected_without_change(seed in any::<u64>()) {
        let mut g = seeded(seed, 7, 0.5);
        let closure: Vec<_> = g.transitive_closure().into_iter().collect();
        if let Some(&(u, v)) = closure.first() {
            let before = g.clone();
            prop_assert!(g.add_edge(v, u).is_err());
            prop_assert_eq!(g, before);
        }
    }

    #[test]
    fn dot_round_trip(seed in any::<u64>(), labels in proptest::collection::vec(label(), 10)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(0..=10);
        let shape = random_script(&mut rng, n, 0.4, &LABELS);
        let events = (0..n)
            .map(|i| {
                let ev = EventNode::new(i, labels[i].clone());
                if rng.random_bool(0.3) {
                    ev.with_duration(DurationBucket::new(TimeUnit::ALL[rng.random_range(0..7)]))
                } else {
                    ev
                }
            })
            .collect();
        let g = ScriptGraph::from_parts("s", events, shape.edges().iter().copied()).unwrap();
        let text = emit_dot(&g).unwrap();
        prop_assert_eq!(&emit_dot(&g).unwrap(), &text);
        prop_assert_eq!(&parse_dot(&text, "s").unwrap(), &g);
        let (lenient, diag) = parse_lenient(&text, "s").unwrap();
        prop_assert_eq!(lenient, g);
        prop_assert!(diag.warnings.is_empty());
    }

    #[test]
    fn lenient_parse_survives_mangled_input(text in "[a-z0-9 \\[\\]{};=\"\\->/\n]{0,80}") {
        if let Ok((g, _)) = parse_lenient(&format!("digraph {{ {text}"), "s") {
            prop_assert!(g.validate().ok);
        }
    }

    #[test]
    fn break_cycles_outputs_subgraph_dag(n in 2usize..9, dense in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wd = WeightedDigraph::new(n);
        for i in 0..n {
            for j in 0..n {
                if dense && i < j {
                    // Tournament: exactly one direction per pair.
                    let (s, d) = if rng.random_bool(0.5) { (i, j) } else { (j, i) };
                    wd.insert(s, d, rng.random_range(0.0..=1.0)).unwrap();
                } else if !dense && i != j && rng.random_bool(0.3) {
                    wd.insert(i, j, rng.random_range(0.0..=1.0)).unwrap();
                }
            }
        }
        let out = break_cycles(&wd);
        prop_assert!(out.graph.is_acyclic());
        prop_assert_eq!(out.graph.len() + out.removed.len(), wd.len());
        for e in out.graph.edges() {
            prop_assert_eq!(wd.weight(e.src, e.dst), Some(e.weight));
        }
        if wd.is_acyclic() {
            prop_assert_eq!(&out.graph, &wd);
        }
        let again = break_cycles(&out.graph);
        prop_assert!(again.removed.is_empty());
    }

    #[test]
    fn oracle_scores_reconstruct_gold(seed in any::<u64>()) {
        let gold = seeded(seed, 9, 0.4);
        let scores = PairwiseScores::from_closure(&gold);
        let pred = predict_edges(gold.events(), &scores, &AggregationConfig::default(), gold.scenario()).unwrap();
        prop_assert_eq!(pred, gold);
    }

    #[test]
    fn random_baselines_are_valid(n in 0usize..12, seed in any::<u64>(), p in 0.0f64..=1.0) {
        let events: Vec<_> = (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect();
        let chain = baseline_script(&events, "s", &RandomPolicy::chain(seed)).unwrap();
        prop_assert!(chain.validate().ok);
        prop_assert_eq!(chain.edges().len(), n.saturating_sub(1));
        let dag = baseline_script(&events, "s", &RandomPolicy::dag(p, seed)).unwrap();
        prop_assert!(dag.validate().ok);
        prop_assert_eq!(&dag, &baseline_script(&events, "s", &RandomPolicy::dag(p, seed)).unwrap());
    }

    #[test]
    fn prf_convention_swap(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..8);
        let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let names: Vec<&str> = labels.iter().map(String::as_str).collect();
        let reshape = |g: ScriptGraph| {
            let events = (0..n).map(|i| EventNode::new(i, names[i])).collect();
            ScriptGraph::from_parts("s", events, g.edges().iter().copied()).unwrap()
        };
        let a = reshape(random_script(&mut rng, n, 0.4, &LABELS));
        let b = reshape(random_script(&mut rng, n, 0.4, &LABELS));
        let ab = edge_prf(&a, &b, Convention::Standard, EventMatching::ByLabel).unwrap();
        let ba = edge_prf(&b, &a, Convention::PaperLiteral, EventMatching::ByLabel).unwrap();
        prop_assert_eq!(ab.precision, ba.precision);
        prop_assert_eq!(ab.recall, ba.recall);
        prop_assert_eq!(ab.f1, edge_prf(&b, &a, Convention::Standard, EventMatching::ByLabel).unwrap().f1);
        prop_assert_eq!(edge_prf(&a, &a, Convention::Standard, EventMatching::ByLabel).unwrap().f1, 1.0);
        let empty = ScriptGraph::from_parts("s", a.events().to_vec(), []).unwrap();
        if !a.edges().is_empty() {
            prop_assert_eq!(edge_prf(&empty, &a, Convention::Standard, EventMatching::ByLabel).unwrap().f1, 0.0);
        }
    }

    #[test]
    fn agreement_symmetric_and_filter_partitions(seeds in proptest::collection::vec(any::<u64>(), 1..12), threshold in 0.0f64..=100.0) {
        let records: Vec<CorpusRecord> = seeds
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let n = rng.random_range(1..7);
                let a = random_script(&mut rng, n, 0.4, &LABELS);
                let b = random_script(&mut rng, n, 0.4, &LABELS);
                let mut r = CorpusRecord::from_script(format!("r{k}"), Source::Other, Split::Dev, &a);
                r.alt_edges = (k % 4 != 0).then(|| b.edges().to_vec());
                r
            })
            .collect();
        for r in records.iter().filter(|r| r.alt_edges.is_some()) {
            let mut swapped = r.clone();
            swapped.edges = r.alt_edges.clone().unwrap();
            swapped.alt_edges = Some(r.edges.clone());
            prop_assert_eq!(
                agreement_f1(r, Convention::Standard).unwrap().f1,
                agreement_f1(&swapped, Convention::Standard).unwrap().f1
            );
        }
        let split = agreement_filter(&records, threshold, Convention::Standard);
        prop_assert_eq!(split.kept.len() + split.rejected.len(), records.len());
        let kept: BTreeSet<_> = split.kept.iter().map(|r| r.id.clone()).collect();
        for (r, _) in &split.rejected {
            prop_assert!(!kept.contains(&r.id));
        }
        for r in &split.kept {
            prop_assert!(r.script().unwrap().validate().ok);
        }
    }

    #[test]
    fn jsonl_round_trip(seed in any::<u64>(), text in label()) {
        let g = seeded(seed, 8, 0.4);
        let mut r = CorpusRecord::from_script(format!("id {text}"), Source::Virtualhome, Split::Train, &g);
        r.scenario = text.clone();
        r.parent_id = Some(text);
        let line = r.to_json_line();
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(parse_record(&line, 1).unwrap(), r);
    }

    #[test]
    fn linear_extensions_are_exactly_consistent_orders(seed in any::<u64>()) {
        let g = seeded(seed, 6, 0.3);
        let n = g.len();
        let ext = g.linear_extensions(usize::MAX);
        let closure = g.transitive_closure();
        let mut expected = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let pos: Vec<usize> = {
                let mut pos = vec![0; n];
                p.iter().enumerate().for_each(|(i, &v)| pos[v] = i);
                pos
            };
            if closure.iter().all(|&(u, v)| pos[u] < pos[v]) {
                expected.push(p.to_vec());
            }
        });
        expected.sort();
        prop_assert_eq!(ext, expected);
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

#[test]
fn random_chain_f1_matches_closed_form() {
    // Two independent random chains over n events share each edge with
    // probability 1/n, so the expected F1 is 1/n.
    let n = 5;
    let events: Vec<_> = (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect();
    let trials = 20_000;
    let samples: Vec<f64> = (0..trials)
        .map(|t| {
            let a = baseline_script(&events, "s", &RandomPolicy::chain(2 * t)).unwrap();
            let b = baseline_script(&events, "s", &RandomPolicy::chain(2 * t + 1)).unwrap();
            edge_prf(&a, &b, Convention::Standard, EventMatching::ById)
                .unwrap()
                .f1
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let se = (var / trials as f64).sqrt();
    assert!(
        (mean - 1.0 / n as f64).abs() < 3.0 * se,
        "mean {mean}, se {se}"
    );
}
