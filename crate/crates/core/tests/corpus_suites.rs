use tecoord_core::corpus::{generate_corpus, CorpusParams};
use tecoord_core::games::{supply_function_nash, SupplyGameConfig};
use tecoord_core::mechanisms::{
    check_budget_balance, check_ic_bayesian, check_ic_dominant, ssvcg_solve, type_grid, vcg_outcome, BudgetBalance,
    Dagva, EfficientAllocator, PayYourBid, SsvcgFamily, Vcg, Witness,
};
use tecoord_core::welfare::{
    clear_auction, run_primal_dual, solve_social_welfare, verify_competitive_equilibrium, SolverConfig,
};

const SEED: u64 = 2024;

#[test]
fn auction_and_bisection_agree_on_random_scenarios() {
    let params = CorpusParams {
        capacity: false,
        ..CorpusParams::default()
    };
    for s in generate_corpus(SEED, 100, &params).unwrap() {
        let out = clear_auction(&s).unwrap();
        assert!(verify_competitive_equilibrium(&out, &s, 1e-6).holds());
        let opt = solve_social_welfare(&s).unwrap();
        assert!((out.prices.uniform().unwrap() - opt.multiplier).abs() < 1e-6);
        for (a, b) in out.allocations.iter().zip(&opt.allocations) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn primal_dual_converges_wherever_bisection_does() {
    let params = CorpusParams {
        capacity: false,
        ..CorpusParams::default()
    };
    for s in generate_corpus(SEED, 100, &params).unwrap() {
        let opt = solve_social_welfare(&s).unwrap();
        let trace = run_primal_dual(&s, &SolverConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.final_outcome.imbalance().abs() <= 1e-6);
        assert!((trace.final_outcome.prices.uniform().unwrap() - opt.multiplier).abs() < 1e-4);
    }
}

#[test]
fn supply_game_certificates() {
    for s in generate_corpus(SEED, 20, &CorpusParams::supply_game()).unwrap() {
        let sol = supply_function_nash(&s, &SupplyGameConfig::default()).unwrap();
        assert!(sol.solution.epsilon <= 1e-6, "ε = {}", sol.solution.epsilon);
        let d = s.coordinator.deficit.unwrap();
        assert!((sol.outcome.allocations.iter().sum::<f64>() - d).abs() <= 8.0 * f64::EPSILON * d);
        assert!(sol.realized_welfare <= sol.efficient_welfare + 1e-9);
    }
}

#[test]
fn vcg_truthful_and_weakly_balanced() {
    for s in generate_corpus(SEED, 20, &CorpusParams::default()).unwrap() {
        let m = Vcg::with_type_grid(&s);
        let truths: Vec<_> = s.agents.iter().map(|a| type_grid(&a.theta)).collect();
        let report = check_ic_dominant(&m, &truths).unwrap();
        assert!(report.holds, "{:?}", report.witness);

        let out = vcg_outcome(&s.thetas(), &s).unwrap();
        assert!(out.payment_sum() <= 1e-12);
        let (_, mu) = EfficientAllocator::from_scenario(&s).allocate(&s.thetas()).unwrap();
        if mu > 0.0 {
            assert!(out.payment_sum() < 0.0);
        }
    }
}

#[test]
fn dagva_balanced_and_bayesian_truthful() {
    for s in generate_corpus(SEED, 20, &CorpusParams::mechanism()).unwrap() {
        let m = Dagva::new(&s).unwrap();
        let grid = m.prior.support.clone();
        let bb = check_budget_balance(&m, &grid, 1e-12).unwrap();
        assert_eq!(bb.balance, Some(BudgetBalance::Exact));
        let prior = m.prior.clone();
        assert!(check_ic_bayesian(&m, &prior).unwrap().holds);
    }
}

#[test]
fn ssvcg_reaches_efficient_allocation() {
    for s in generate_corpus(SEED, 20, &CorpusParams::default()).unwrap() {
        let sol = ssvcg_solve(&s, &SsvcgFamily::default(), &SolverConfig::default()).unwrap();
        for (a, e) in sol.outcome.allocations.iter().zip(&sol.efficient_allocation) {
            assert!((a - e).abs() <= 1e-5, "{a} vs {e}");
        }
        assert!(sol.solution.epsilon <= 1e-5, "ε = {}", sol.solution.epsilon);
    }
}

#[test]
fn pay_your_bid_is_caught() {
    for s in generate_corpus(SEED, 20, &CorpusParams::default()).unwrap() {
        let m = PayYourBid::with_type_grid(&s);
        let truths = m.messages.clone();
        let report = check_ic_dominant(&m, &truths).unwrap();
        assert!(!report.holds);
        match report.witness {
            Some(Witness::Misreport { gain, .. }) => assert!(gain > 1e-9),
            other => panic!("expected a misreport witness, got {other:?}"),
        }
    }
}
