use proptest::prelude::*;
use tecoord_core::corpus::{generate_corpus, CorpusParams};
use tecoord_core::games::{clear_supply_function, SupplyBidProfile};
use tecoord_core::model::{
    build_decision_graph, demand_for, supply, CoordinatorSpec, Interval, QuadraticCost, Scenario, Theta,
};

fn theta() -> impl Strategy<Value = Theta> {
    (0.0..20.0f64, 0.1..5.0f64).prop_map(|(a, b)| Theta::new(a, b))
}

proptest! {
    #[test]
    fn demand_is_nonincreasing_in_price(t in theta(), p in 0.0..20.0f64, dp in 0.0..5.0f64, hi in 0.1..30.0f64) {
        let b = Interval::new(0.0, hi);
        prop_assert!(demand_for(p + dp, &t, &b) <= demand_for(p, &t, &b));
    }

    #[test]
    fn supply_is_nondecreasing_in_price(c1 in 0.0..5.0f64, c2 in 0.1..5.0f64, p in 0.0..20.0f64, dp in 0.0..5.0f64) {
        let c = CoordinatorSpec {
            cost: QuadraticCost { c1, c2 },
            supply_bounds: Interval::new(0.0, 50.0),
            capacity: None,
            deficit: None,
        };
        prop_assert!(supply(p + dp, &c).unwrap() >= supply(p, &c).unwrap());
    }

    #[test]
    fn supply_function_allocations_sum_to_deficit(
        bids in prop::collection::vec(0.0..10.0f64, 2..6),
        d in 0.1..50.0f64,
    ) {
        prop_assume!(bids.iter().sum::<f64>() > 1e-9);
        let profile = SupplyBidProfile::new(bids).unwrap();
        let out = clear_supply_function(&profile, d).unwrap();
        let total: f64 = out.allocations.iter().sum();
        prop_assert!((total - d).abs() <= 8.0 * f64::EPSILON * d);
    }

    #[test]
    fn decision_graph_is_acyclic(sizes in prop::collection::vec(1usize..4, 1..5)) {
        let mut next = 0;
        let stages: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&s| {
                let stage = (next..next + s).collect();
                next += s;
                stage
            })
            .collect();
        let g = build_decision_graph(&stages).unwrap();
        prop_assert!(g.is_acyclic());
        prop_assert!(g.is_transitively_closed());
    }

    #[test]
    fn corpus_scenarios_round_trip(seed in any::<u64>()) {
        for params in [CorpusParams::default(), CorpusParams::mechanism(), CorpusParams::supply_game()] {
            for s in generate_corpus(seed, 2, &params).unwrap() {
                prop_assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
            }
        }
    }
}
