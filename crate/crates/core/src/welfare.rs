//! Social-welfare maximization and competitive-equilibrium computation.
//!
//! Three routes reach the same equilibrium on the quadratic family:
//! bisection on the balance multiplier ([`solve_social_welfare`]), an exact
//! breakpoint scan of the aggregate demand and supply curves
//! ([`clear_auction`]), and a price iteration driven by the excess demand
//! ([`run_primal_dual`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{demand, supply, utility_value, MarketOutcome, Prices, Scenario};
use crate::roots::nonincreasing_root;

/// Step size rule for the price iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "gamma0", rename_all = "snake_case")]
pub enum StepRule {
    /// `γ(k) = γ0 / √k`.
    Diminishing(f64),
    /// `γ(k) = γ0 / k`.
    Harmonic(f64),
    /// `γ(k) = γ0`.
    Constant(f64),
}

impl StepRule {
    pub fn step(&self, k: usize) -> f64 {
        let k = k.max(1) as f64;
        match *self {
            StepRule::Diminishing(g) => g / k.sqrt(),
            StepRule::Harmonic(g) => g / k,
            StepRule::Constant(g) => g,
        }
    }

    fn gamma0(&self) -> f64 {
        match *self {
            StepRule::Diminishing(g) | StepRule::Harmonic(g) | StepRule::Constant(g) => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub price_tolerance: f64,
    pub balance_tolerance: f64,
    pub max_iterations: usize,
    pub step_rule: StepRule,
    pub initial_price: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            price_tolerance: 1e-8,
            balance_tolerance: 1e-6,
            max_iterations: 100_000,
            step_rule: StepRule::Diminishing(0.5),
            initial_price: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.price_tolerance > 0.0 && self.balance_tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        let g = self.step_rule.gamma0();
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidInput(format!("step size must be positive, found {g}")));
        }
        if !self.initial_price.is_finite() {
            return Err(Error::InvalidInput("initial price must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub k: usize,
    pub lambda: f64,
    pub total_demand: f64,
    pub supply: f64,
    pub imbalance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub iterations: Vec<TraceEntry>,
    pub converged: bool,
    pub final_outcome: MarketOutcome,
}

impl ConvergenceTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda,total_demand,supply,imbalance\n");
        for e in &self.iterations {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                e.k, e.lambda, e.total_demand, e.supply, e.imbalance
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareOptimum {
    pub allocations: Vec<f64>,
    pub supply: f64,
    pub multiplier: f64,
    pub welfare: f64,
}

/// `Σ V_i(a_i) − C(y)`.
pub fn social_welfare(scenario: &Scenario, allocations: &[f64], supply: f64) -> f64 {
    let utility: f64 = scenario
        .agents
        .iter()
        .zip(allocations)
        .map(|(agent, &a)| utility_value(a, &agent.theta))
        .sum();
    utility - scenario.coordinator.cost.value(supply)
}

/// Aggregate demand minus supply at a price.
pub fn excess_demand(scenario: &Scenario, price: f64) -> Result<f64> {
    Ok(scenario.total_demand(price) - supply(price, &scenario.coordinator)?)
}

fn check_clearing_preconditions(scenario: &Scenario) -> Result<()> {
    let coord = &scenario.coordinator;
    let min_demand: f64 = scenario.agents.iter().map(|a| a.bounds.lo).sum();
    let max_demand: f64 = scenario.agents.iter().map(|a| a.bounds.hi).sum();
    if min_demand > coord.supply_bounds.hi {
        return Err(Error::Infeasible(format!(
            "minimum total demand {min_demand} exceeds maximum supply {}",
            coord.supply_bounds.hi
        )));
    }
    if max_demand < coord.supply_bounds.lo {
        return Err(Error::Infeasible(format!(
            "maximum total demand {max_demand} is below minimum supply {}",
            coord.supply_bounds.lo
        )));
    }
    if coord.cost.c2 == 0.0 && !coord.supply_bounds.is_bounded() {
        return Err(Error::InvalidInput(
            "a linear supply cost needs a bounded supply interval".into(),
        ));
    }
    Ok(())
}

/// Price bracket inside which the excess demand changes sign.
fn clearing_bracket(scenario: &Scenario) -> (f64, f64) {
    let cost = scenario.coordinator.cost;
    let lowest_kink = scenario
        .agents
        .iter()
        .map(|a| a.theta.alpha - a.theta.beta * a.bounds.hi)
        .fold(f64::INFINITY, f64::min);
    let max_alpha = scenario.max_alpha();
    let max_demand: f64 = scenario.agents.iter().map(|a| a.bounds.hi).sum();
    let lo = cost.c1.min(lowest_kink) - 1.0;
    let hi = cost.c1.max(max_alpha) + cost.c2 * max_demand + 1.0;
    (lo, hi)
}

/// Supply that balances the given demand at a clearing price. A linear cost
/// makes the supplier indifferent at `price == c1`, where any quantity in the
/// supply interval is optimal.
fn balancing_supply(scenario: &Scenario, price: f64, total_demand: f64) -> Result<f64> {
    let coord = &scenario.coordinator;
    if coord.cost.c2 == 0.0 && price == coord.cost.c1 {
        Ok(coord.supply_bounds.clamp(total_demand))
    } else {
        supply(price, coord)
    }
}

/// Maximizes social welfare subject to `Σ a_i = y` and the box constraints
/// by bisecting on the balance multiplier.
pub fn solve_social_welfare(scenario: &Scenario) -> Result<WelfareOptimum> {
    solve_social_welfare_with(scenario, 1e-12)
}

pub fn solve_social_welfare_with(scenario: &Scenario, price_tolerance: f64) -> Result<WelfareOptimum> {
    check_clearing_preconditions(scenario)?;
    let (lo, hi) = clearing_bracket(scenario);
    let f = |p: f64| excess_demand(scenario, p).unwrap_or(f64::NAN);
    let mut price = nonincreasing_root(f, lo, hi, price_tolerance);
    let c1 = scenario.coordinator.cost.c1;
    if scenario.coordinator.cost.c2 == 0.0 && (price - c1).abs() <= 10.0 * price_tolerance {
        price = c1;
    }
    let allocations: Vec<f64> = scenario.agents.iter().map(|a| demand(price, a)).collect();
    let total: f64 = allocations.iter().sum();
    let y = balancing_supply(scenario, price, total)?;
    Ok(WelfareOptimum {
        welfare: social_welfare(scenario, &allocations, y),
        allocations,
        supply: y,
        multiplier: price,
    })
}

/// Uniform-price auction: agents submit demand curves, the coordinator
/// submits its supply curve, and the clearing price is located by scanning
/// the breakpoints of the piecewise-linear excess demand.
pub fn clear_auction(scenario: &Scenario) -> Result<MarketOutcome> {
    check_clearing_preconditions(scenario)?;
    let price = auction_price(scenario)?;
    let allocations: Vec<f64> = scenario.agents.iter().map(|a| demand(price, a)).collect();
    let total: f64 = allocations.iter().sum();
    let y = balancing_supply(scenario, price, total)?;
    let payments = allocations.iter().map(|a| -price * a).collect();
    Ok(MarketOutcome {
        allocations,
        supply: y,
        prices: Prices::Uniform(price),
        payments,
    })
}

fn auction_price(scenario: &Scenario) -> Result<f64> {
    let (lo, hi) = clearing_bracket(scenario);
    let coord = &scenario.coordinator;
    let cost = coord.cost;
    let mut points = vec![lo, hi];
    for a in &scenario.agents {
        points.push(a.theta.alpha - a.theta.beta * a.bounds.hi);
        points.push(a.theta.alpha - a.theta.beta * a.bounds.lo);
    }
    if cost.c2 > 0.0 {
        for y in [coord.supply_bounds.lo, coord.supply_bounds.hi] {
            if y.is_finite() {
                points.push(cost.c1 + cost.c2 * y);
            }
        }
    } else {
        points.push(cost.c1);
    }
    points.retain(|p| *p >= lo && *p <= hi);
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    points.dedup();

    let excess = |p: f64| excess_demand(scenario, p);
    // Right limit of the excess demand; differs from the value only at the
    // jump of a linear supply curve.
    let excess_right = |p: f64| -> Result<f64> {
        if cost.c2 == 0.0 && p == cost.c1 {
            Ok(scenario.total_demand(p) - coord.supply_bounds.hi)
        } else {
            excess(p)
        }
    };

    if excess(points[0])? <= 0.0 {
        return Ok(points[0]);
    }
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        let left = excess_right(p)?;
        if left <= 0.0 {
            return Ok(p);
        }
        let right = excess(q)?;
        if right <= 0.0 {
            return Ok(p + left * (q - p) / (left - right));
        }
    }
    Err(Error::Infeasible("excess demand does not change sign".into()))
}

/// Price iteration `λ(k) = λ(k−1) + γ(k)·(Σ a_i(k) − y(k))`, where demand and
/// supply respond to `λ(k−1)`.
///
/// Stops as soon as the imbalance is within `balance_tolerance`. Exhausting
/// the iteration budget (or diverging to a non-finite price) returns
/// [`Error::NotConverged`] carrying the full trace.
pub fn run_primal_dual(scenario: &Scenario, config: &SolverConfig) -> Result<ConvergenceTrace> {
    config.validate()?;
    check_clearing_preconditions(scenario)?;
    let mut price = config.initial_price;
    let mut iterations = Vec::new();
    let mut converged = false;
    for k in 1..=config.max_iterations {
        let total_demand = scenario.total_demand(price);
        let y = supply(price, &scenario.coordinator)?;
        let imbalance = total_demand - y;
        iterations.push(TraceEntry {
            k,
            lambda: price,
            total_demand,
            supply: y,
            imbalance,
        });
        if imbalance.abs() <= config.balance_tolerance {
            converged = true;
            break;
        }
        let next = price + config.step_rule.step(k) * imbalance;
        if !next.is_finite() {
            break;
        }
        price = next;
    }
    let last = *iterations.last().expect("at least one iteration runs");
    let allocations: Vec<f64> = scenario.agents.iter().map(|a| demand(last.lambda, a)).collect();
    let payments = allocations.iter().map(|a| -last.lambda * a).collect();
    let trace = ConvergenceTrace {
        converged,
        final_outcome: MarketOutcome {
            allocations,
            supply: last.supply,
            prices: Prices::Uniform(last.lambda),
            payments,
        },
        iterations,
    };
    if converged {
        Ok(trace)
    } else {
        Err(Error::NotConverged {
            what: "primal-dual price iteration",
            iterations: trace.iterations.len(),
            trace: Some(Box::new(trace)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitiveCheck {
    /// Per-agent: allocation maximizes `V_i(a) − λ·a`.
    pub agent_optimal: Vec<bool>,
    pub agents_optimal: bool,
    pub supplier_optimal: bool,
    pub balanced: bool,
}

impl CompetitiveCheck {
    pub fn holds(&self) -> bool {
        self.agents_optimal && self.supplier_optimal && self.balanced
    }
}

/// Checks the three competitive-equilibrium conditions at the outcome's
/// uniform price. Per-agent prices fail every condition.
pub fn verify_competitive_equilibrium(outcome: &MarketOutcome, scenario: &Scenario, tol: f64) -> CompetitiveCheck {
    let n = scenario.agents.len();
    let Some(price) = outcome.prices.uniform() else {
        return CompetitiveCheck {
            agent_optimal: vec![false; n],
            agents_optimal: false,
            supplier_optimal: false,
            balanced: false,
        };
    };
    let agent_optimal: Vec<bool> = if outcome.allocations.len() == n {
        scenario
            .agents
            .iter()
            .zip(&outcome.allocations)
            .map(|(agent, &a)| (a - demand(price, agent)).abs() <= tol)
            .collect()
    } else {
        vec![false; n]
    };
    let coord = &scenario.coordinator;
    let y = outcome.supply;
    let supplier_optimal = if coord.cost.c2 > 0.0 {
        supply(price, coord)
            .map(|best| (y - best).abs() <= tol)
            .unwrap_or(false)
    } else {
        let profit = |q: f64| price * q - coord.cost.value(q);
        let best = [coord.supply_bounds.lo, coord.supply_bounds.hi]
            .into_iter()
            .filter(|q| q.is_finite())
            .map(profit)
            .fold(f64::NEG_INFINITY, f64::max);
        coord.supply_bounds.contains(y) && profit(y) >= best - tol
    };
    let balanced = outcome.allocations.len() == n && outcome.imbalance().abs() <= tol;
    CompetitiveCheck {
        agents_optimal: agent_optimal.iter().all(|&b| b),
        agent_optimal,
        supplier_optimal,
        balanced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentSpec, CoordinatorSpec, Interval, QuadraticCost, Theta};

    fn scenario(thetas: &[(f64, f64)], a_max: f64, cost: (f64, f64), y_max: f64) -> Scenario {
        let agents = thetas
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| AgentSpec::new(i + 1, Theta::new(a, b), Interval::new(0.0, a_max)).unwrap())
            .collect();
        let coordinator = CoordinatorSpec {
            cost: QuadraticCost { c1: cost.0, c2: cost.1 },
            supply_bounds: Interval::new(0.0, y_max),
            capacity: None,
            deficit: None,
        };
        Scenario::new(agents, coordinator, None).unwrap()
    }

    fn two_agent() -> Scenario {
        scenario(&[(10.0, 1.0), (8.0, 1.0)], 10.0, (0.0, 1.0), 100.0)
    }

    /// Independent oracle: bisection on λ over [0, 10] with inline closed forms.
    fn bisection_oracle(thetas: &[(f64, f64)], a_max: f64) -> f64 {
        let excess = |l: f64| -> f64 {
            thetas
                .iter()
                .map(|&(a, b)| ((a - l) / b).clamp(0.0, a_max))
                .sum::<f64>()
                - l.max(0.0)
        };
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn oracle_values_for_two_agent_scenario() {
        let p = bisection_oracle(&[(10.0, 1.0), (8.0, 1.0)], 10.0);
        assert!((p - 6.0).abs() < 1e-12);
        // 2-D grid over (a1, a2) with y = a1 + a2, resolution 1e-2.
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=1000 {
            for j in 0..=1000 {
                let (a1, a2) = (i as f64 * 1e-2, j as f64 * 1e-2);
                let w = 10.0 * a1 - 0.5 * a1 * a1 + 8.0 * a2 - 0.5 * a2 * a2 - 0.5 * (a1 + a2).powi(2);
                if w > best.0 {
                    best = (w, a1, a2);
                }
            }
        }
        assert!((best.1 - 4.0).abs() < 1e-9 && (best.2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn social_welfare_two_agent() {
        let opt = solve_social_welfare(&two_agent()).unwrap();
        assert!((opt.multiplier - 6.0).abs() < 1e-10);
        assert!((opt.allocations[0] - 4.0).abs() < 1e-10);
        assert!((opt.allocations[1] - 2.0).abs() < 1e-10);
        assert!((opt.supply - 6.0).abs() < 1e-10);
        // 40 - 8 + 16 - 2 - 18
        assert!((opt.welfare - 28.0).abs() < 1e-9);
    }

    #[test]
    fn social_welfare_single_agent() {
        let opt = solve_social_welfare(&scenario(&[(10.0, 1.0)], 10.0, (0.0, 1.0), 100.0)).unwrap();
        assert!((opt.multiplier - 5.0).abs() < 1e-10);
        assert!((opt.allocations[0] - 5.0).abs() < 1e-10);
        assert!((opt.supply - 5.0).abs() < 1e-10);
    }

    #[test]
    fn social_welfare_zero_boxes() {
        let opt = solve_social_welfare(&scenario(&[(10.0, 1.0), (8.0, 1.0)], 0.0, (0.0, 1.0), 100.0)).unwrap();
        assert_eq!(opt.allocations, vec![0.0, 0.0]);
        assert_eq!(opt.supply, 0.0);
    }

    #[test]
    fn infeasible_bounds() {
        let mut s = two_agent();
        s.agents[0].bounds = Interval::new(60.0, 70.0);
        s.agents[1].bounds = Interval::new(50.0, 70.0);
        assert!(matches!(solve_social_welfare(&s), Err(Error::Infeasible(_))));
        assert!(matches!(clear_auction(&s), Err(Error::Infeasible(_))));
        let mut s = two_agent();
        s.coordinator.supply_bounds = Interval::new(30.0, 100.0);
        assert!(matches!(clear_auction(&s), Err(Error::Infeasible(_))));
    }

    #[test]
    fn auction_two_agent() {
        let out = clear_auction(&two_agent()).unwrap();
        assert_eq!(out.prices, Prices::Uniform(6.0));
        assert_eq!(out.allocations, vec![4.0, 2.0]);
        assert_eq!(out.supply, 6.0);
        assert_eq!(out.payments, vec![-24.0, -12.0]);
    }

    #[test]
    fn auction_identical_agents() {
        let out = clear_auction(&scenario(&[(10.0, 1.0); 4], 10.0, (0.0, 1.0), 100.0)).unwrap();
        assert_eq!(out.prices, Prices::Uniform(8.0));
        assert!(out.allocations.iter().all(|&a| a == 2.0));
    }

    #[test]
    fn auction_linear_cost_sets_price_at_marginal_cost() {
        // Linear supply at c1 = 3 up to 20 units; demand at 3 is 7 + 5 = 12.
        let s = scenario(&[(10.0, 1.0), (8.0, 1.0)], 10.0, (3.0, 0.0), 20.0);
        let out = clear_auction(&s).unwrap();
        assert_eq!(out.prices, Prices::Uniform(3.0));
        assert!((out.supply - 12.0).abs() < 1e-12);
        let opt = solve_social_welfare(&s).unwrap();
        assert_eq!(opt.multiplier, 3.0);
        assert!((opt.supply - 12.0).abs() < 1e-12);
        assert!(verify_competitive_equilibrium(&out, &s, 1e-9).holds());
    }

    #[test]
    fn primal_dual_converges_to_auction_price() {
        let trace = run_primal_dual(&two_agent(), &SolverConfig::default()).unwrap();
        let price = trace.final_outcome.prices.uniform().unwrap();
        assert!((price - 6.0).abs() < 1e-4);
        assert!(trace.converged);
        let last = trace.iterations.last().unwrap();
        assert!(last.imbalance.abs() <= 1e-6);
    }

    #[test]
    fn primal_dual_harmonic_reaches_loose_tolerance() {
        let config = SolverConfig {
            step_rule: StepRule::Harmonic(0.5),
            balance_tolerance: 1e-4,
            ..SolverConfig::default()
        };
        let trace = run_primal_dual(&two_agent(), &config).unwrap();
        assert!((trace.final_outcome.prices.uniform().unwrap() - 6.0).abs() < 1e-4);
    }

    #[test]
    fn primal_dual_balanced_start_takes_one_iteration() {
        let config = SolverConfig {
            initial_price: 6.0,
            ..SolverConfig::default()
        };
        let trace = run_primal_dual(&two_agent(), &config).unwrap();
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn primal_dual_large_constant_step_oscillates() {
        // Excess demand 18 − 3λ: a step of 10 multiplies the error by −29.
        let mut lambda: f64 = 0.0;
        for k in 0..5 {
            let next = lambda + 10.0 * (18.0 - 3.0 * lambda);
            assert!(
                (next - 6.0).abs() > (lambda - 6.0).abs(),
                "step {k} should not contract"
            );
            lambda = next;
        }
        let config = SolverConfig {
            step_rule: StepRule::Constant(10.0),
            max_iterations: 100,
            ..SolverConfig::default()
        };
        match run_primal_dual(&two_agent(), &config) {
            Err(Error::NotConverged { trace: Some(trace), .. }) => assert!(!trace.converged),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            step_rule: StepRule::Constant(0.0),
            ..SolverConfig::default()
        };
        assert!(run_primal_dual(&two_agent(), &bad).is_err());
        let bad = SolverConfig {
            max_iterations: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn competitive_check_examples() {
        let s = two_agent();
        let good = MarketOutcome {
            allocations: vec![4.0, 2.0],
            supply: 6.0,
            prices: Prices::Uniform(6.0),
            payments: vec![-24.0, -12.0],
        };
        assert!(verify_competitive_equilibrium(&good, &s, 1e-9).holds());

        let wrong_price = MarketOutcome {
            prices: Prices::Uniform(5.0),
            ..good.clone()
        };
        let check = verify_competitive_equilibrium(&wrong_price, &s, 1e-9);
        assert!(!check.agents_optimal);

        // Price above every marginal utility and below marginal cost at zero.
        let mut s = two_agent();
        s.coordinator.cost.c1 = 20.0;
        let no_trade = MarketOutcome {
            allocations: vec![0.0, 0.0],
            supply: 0.0,
            prices: Prices::Uniform(11.0),
            payments: vec![0.0, 0.0],
        };
        let check = verify_competitive_equilibrium(&no_trade, &s, 1e-9);
        assert!(check.agents_optimal && check.supplier_optimal && check.balanced);
    }

    #[test]
    fn per_agent_prices_fail_check() {
        let out = MarketOutcome {
            allocations: vec![4.0, 2.0],
            supply: 6.0,
            prices: Prices::PerAgent(vec![6.0, 6.0]),
            payments: vec![0.0, 0.0],
        };
        assert!(!verify_competitive_equilibrium(&out, &two_agent(), 1e-9).holds());
    }

    #[test]
    fn excess_demand_is_nonincreasing() {
        let s = scenario(&[(10.0, 1.0), (8.0, 0.5), (3.0, 2.0)], 6.0, (1.0, 0.7), 50.0);
        let mut prev = f64::INFINITY;
        for k in 0..=4000 {
            let p = -5.0 + k as f64 * 0.01;
            let e = excess_demand(&s, p).unwrap();
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn trace_csv_header() {
        let trace = run_primal_dual(&two_agent(), &SolverConfig::default()).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("k,lambda,total_demand,supply,imbalance\n1,"));
        assert_eq!(csv.lines().count(), trace.iterations.len() + 1);
    }
}
