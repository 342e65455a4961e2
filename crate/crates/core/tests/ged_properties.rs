mod common;

use common::{brute_force_ged, labeled, random_script, LABELS};
use proptest::prelude::*;
use proscript::metrics::{
    apply, ged, ged_approx, ged_breakdown, ged_labeled, CostTable, EdgeRepMode, GedConfig, OpKind,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64, max_nodes: usize) -> (proscript::ScriptGraph, proscript::ScriptGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.random_range(0..=max_nodes);
    let n2 = rng.random_range(0..=max_nodes);
    let d = rng.random_range(0.2..0.7);
    (
        random_script(&mut rng, n1, d, &LABELS),
        random_script(&mut rng, n2, d, &LABELS),
    )
}

fn big_limit() -> GedConfig {
    GedConfig {
        max_exact_nodes: 64,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_matches_brute_force(seed in any::<u64>()) {
        let (a, b) = pair(seed, 4);
        let cfg = big_limit();
        let r = ged(&a, &b, &cfg).unwrap();
        prop_assert_eq!(r.cost, brute_force_ged(&labeled(&a), &labeled(&b), &cfg.costs, cfg.edge_rep_mode));
    }

    #[test]
    fn endpoint_rep_matches_brute_force(seed in any::<u64>()) {
        let (a, b) = pair(seed, 4);
        let cfg = GedConfig { edge_rep_mode: EdgeRepMode::EndpointRep, ..big_limit() };
        let r = ged(&a, &b, &cfg).unwrap();
        prop_assert_eq!(r.cost, brute_force_ged(&labeled(&a), &labeled(&b), &cfg.costs, cfg.edge_rep_mode));
    }

    #[test]
    fn weighted_costs_match_brute_force(seed in any::<u64>(), w in proptest::array::uniform6(1u32..4)) {
        let (a, b) = pair(seed, 4);
        let costs = CostTable { v_del: w[0], v_ins: w[1], v_rep: w[2], e_del: w[3], e_ins: w[4], e_rep: w[5] };
        let cfg = GedConfig { costs, edge_rep_mode: EdgeRepMode::EndpointRep, ..big_limit() };
        let r = ged(&a, &b, &cfg).unwrap();
        prop_assert_eq!(r.cost, brute_force_ged(&labeled(&a), &labeled(&b), &costs, cfg.edge_rep_mode));
    }

    #[test]
    fn script_reproduces_target_and_cost(seed in any::<u64>()) {
        let (a, b) = pair(seed, 6);
        let (la, lb) = (labeled(&a), labeled(&b));
        let r = ged_labeled(&la, &lb, &big_limit()).unwrap();
        prop_assert_eq!(apply(&la, &r.script).unwrap(), lb);
        let counts = ged_breakdown(&r.script);
        prop_assert_eq!(counts.total() as u32, r.cost);
        prop_assert_eq!(counts.get(OpKind::ERep), 0);
    }

    #[test]
    fn symmetric(seed in any::<u64>()) {
        let (a, b) = pair(seed, 6);
        let cfg = big_limit();
        prop_assert_eq!(ged(&a, &b, &cfg).unwrap().cost, ged(&b, &a, &cfg).unwrap().cost);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let (a, b) = pair(seed, 5);
        let (c, _) = pair(seed.wrapping_add(1), 5);
        let cfg = big_limit();
        let d = |x, y| ged(x, y, &cfg).unwrap().cost;
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn zero_iff_isomorphic(seed in any::<u64>()) {
        let (a, b) = pair(seed, 5);
        let cost = ged(&a, &b, &big_limit()).unwrap().cost;
        prop_assert_eq!(cost == 0, labeled(&a).is_isomorphic(&labeled(&b)));
        prop_assert_eq!(ged(&a, &a, &big_limit()).unwrap().cost, 0);
    }

    #[test]
    fn beam_is_an_upper_bound(seed in any::<u64>(), beam in 1usize..4) {
        let (a, b) = pair(seed, 6);
        let cfg = big_limit();
        let exact = ged(&a, &b, &cfg).unwrap().cost;
        let approx = ged_approx(&a, &b, &cfg, beam).unwrap();
        prop_assert!(approx.cost >= exact);
        prop_assert!(!approx.exact);
    }

    #[test]
    fn wide_beam_is_exact(seed in any::<u64>()) {
        let (a, b) = pair(seed, 6);
        let cfg = big_limit();
        prop_assert_eq!(ged_approx(&a, &b, &cfg, 100_000).unwrap().cost, ged(&a, &b, &cfg).unwrap().cost);
    }
}

#[test]
fn virtual_nodes_match_brute_force() {
    let cfg = GedConfig {
        include_virtual: true,
        ..big_limit()
    };
    for seed in 0..60 {
        let (a, b) = pair(seed, 3);
        let la = proscript::metrics::LabeledGraph::from_script(&a, cfg.node_match, true);
        let lb = proscript::metrics::LabeledGraph::from_script(&b, cfg.node_match, true);
        assert_eq!(
            ged(&a, &b, &cfg).unwrap().cost,
            brute_force_ged(&la, &lb, &cfg.costs, cfg.edge_rep_mode)
        );
    }
}
