//! Leader-follower coordination.
//!
//! In the price-setting game the coordinator commits to a uniform price and
//! the agents answer with their demand; the leader's problem is a 1-D search
//! over prices. In the reverse game the coordinator commits to a pricing
//! *function* of the agent's decision; a linear function tangent to the
//! agent's indifference curve at the team optimum makes the agent choose that
//! optimum voluntarily.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{demand, utility_value, AgentSpec, Interval, MarketOutcome, Prices, Scenario};
use crate::roots::{golden_max, grid_then_golden, linspace, nonincreasing_root};

/// Grid points of the outer price scan.
pub const PRICE_SCAN_POINTS: usize = 10_001;
/// Points per axis of the coarse team-problem grid.
pub const TEAM_GRID_POINTS: usize = 200;
/// Grid points for follower best responses under a pricing function.
pub const RESPONSE_GRID_POINTS: usize = 100_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderObjective {
    /// `λ·Σa_i(λ) − C(Σa_i(λ))`.
    Profit,
    /// `Σ V_i(a_i(λ)) − C(Σa_i(λ))`.
    Welfare,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelbergSolution {
    pub price: f64,
    pub outcome: MarketOutcome,
    pub leader_payoff: f64,
    /// Every scanned `(price, leader payoff)` pair over the feasible prices.
    pub scan: Vec<(f64, f64)>,
}

impl StackelbergSolution {
    pub fn scan_csv(&self) -> String {
        let mut out = String::from("lambda,leader_payoff\n");
        for (p, v) in &self.scan {
            out.push_str(&format!("{p:.16e},{v:.16e}\n"));
        }
        out
    }
}

/// Leader payoff when every agent answers `price` with its demand and the
/// coordinator serves the total.
pub fn leader_payoff(scenario: &Scenario, objective: LeaderObjective, price: f64) -> f64 {
    let cost = scenario.coordinator.cost;
    let mut total = 0.0;
    let mut utility = 0.0;
    for agent in &scenario.agents {
        let a = demand(price, agent);
        total += a;
        utility += utility_value(a, &agent.theta);
    }
    match objective {
        LeaderObjective::Profit => price * total - cost.value(total),
        LeaderObjective::Welfare => utility - cost.value(total),
    }
}

/// Feasible price interval inside `[0, max α]`: total demand must fit the
/// capacity and the supply interval.
fn feasible_prices(scenario: &Scenario) -> Result<(f64, f64)> {
    let coord = &scenario.coordinator;
    let lo_bracket = 0.0;
    let hi_bracket = scenario.max_alpha().max(0.0);
    let min_demand: f64 = scenario.agents.iter().map(|a| a.bounds.lo).sum();
    let cap = coord.capacity.unwrap_or(f64::INFINITY).min(coord.supply_bounds.hi);
    if scenario.total_demand(hi_bracket) > cap {
        return Err(Error::InfeasibleCapacity {
            capacity: cap,
            min_demand: min_demand.max(scenario.total_demand(hi_bracket)),
        });
    }
    let lo = if scenario.total_demand(lo_bracket) <= cap {
        lo_bracket
    } else {
        let root = nonincreasing_root(|p| scenario.total_demand(p) - cap, lo_bracket, hi_bracket, 1e-13);
        // The secant step can land a hair below the boundary.
        if scenario.total_demand(root) > cap {
            let mut p = root;
            while scenario.total_demand(p) > cap {
                p = f64::from_bits(p.to_bits() + 1);
            }
            p
        } else {
            root
        }
    };
    let floor = coord.supply_bounds.lo;
    let hi = if scenario.total_demand(hi_bracket) >= floor {
        hi_bracket
    } else if scenario.total_demand(lo) < floor {
        return Err(Error::Infeasible(format!(
            "no price keeps total demand above y_min = {floor}"
        )));
    } else {
        nonincreasing_root(|p| scenario.total_demand(p) - floor, lo, hi_bracket, 1e-13)
    };
    Ok((lo, hi))
}

/// Optimal uniform price for the leader, by a dense scan of the feasible
/// prices followed by golden-section refinement of the best cell.
pub fn solve_price_stackelberg(scenario: &Scenario, objective: LeaderObjective) -> Result<StackelbergSolution> {
    let (lo, hi) = feasible_prices(scenario)?;
    let grid: Vec<f64> = linspace(lo, hi, PRICE_SCAN_POINTS).collect();
    let scan: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&p| (p, leader_payoff(scenario, objective, p)))
        .collect();
    let (mut best_k, mut best_v) = (0, f64::NEG_INFINITY);
    for (k, &(_, v)) in scan.iter().enumerate() {
        if v > best_v {
            best_k = k;
            best_v = v;
        }
    }
    let mut price = scan[best_k].0;
    let cell_lo = scan[best_k.saturating_sub(1)].0;
    let cell_hi = scan[(best_k + 1).min(scan.len() - 1)].0;
    let (refined, value) = golden_max(|p| leader_payoff(scenario, objective, p), cell_lo, cell_hi, 1e-10);
    if value > best_v {
        price = refined;
        best_v = value;
    }
    let allocations: Vec<f64> = scenario.agents.iter().map(|a| demand(price, a)).collect();
    let total = allocations.iter().sum();
    let payments = allocations.iter().map(|a| -price * a).collect();
    Ok(StackelbergSolution {
        price,
        outcome: MarketOutcome {
            allocations,
            supply: total,
            prices: Prices::Uniform(price),
            payments,
        },
        leader_payoff: best_v,
        scan,
    })
}

// ---------------------------------------------------------------------------
// Reverse Stackelberg

/// Linear pricing function `λ(a) = λτ − Q·(a − aτ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncentivePricing {
    pub team_allocation: f64,
    pub team_price: f64,
    pub slope: f64,
}

impl IncentivePricing {
    pub fn price_at(&self, a: f64) -> f64 {
        self.team_price - self.slope * (a - self.team_allocation)
    }
}

/// Agent payoff `U_1(a, λ) = V(a; θ) − λ·a`.
pub fn agent_payoff(agent: &AgentSpec, a: f64, price: f64) -> f64 {
    utility_value(a, &agent.theta) - price * a
}

/// Joint maximizer of the leader payoff over `A × Λ`: a 200×200 grid
/// followed by shrinking local grids. Ties resolve to the smallest
/// allocation, then the smallest price.
pub fn solve_team_problem<F>(allocations: Interval, prices: Interval, leader: F) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    for (name, b) in [("allocation", allocations), ("price", prices)] {
        if !b.is_bounded() || b.lo > b.hi {
            return Err(Error::UnboundedTeam(format!(
                "{name} box [{}, {}] is not a bounded interval",
                b.lo, b.hi
            )));
        }
    }
    let a_grid: Vec<f64> = linspace(allocations.lo, allocations.hi, TEAM_GRID_POINTS).collect();
    let p_grid: Vec<f64> = linspace(prices.lo, prices.hi, TEAM_GRID_POINTS).collect();
    let rows: Vec<(f64, f64, f64)> = a_grid
        .par_iter()
        .map(|&a| {
            let mut best = (f64::NEG_INFINITY, a, p_grid[0]);
            for &p in &p_grid {
                let v = leader(a, p);
                if v > best.0 {
                    best = (v, a, p);
                }
            }
            best
        })
        .collect();
    let mut best = rows[0];
    for &row in &rows[1..] {
        if row.0 > best.0 {
            best = row;
        }
    }
    if !best.0.is_finite() {
        return Err(Error::UnboundedTeam(format!(
            "leader payoff is {} at the grid optimum",
            best.0
        )));
    }
    let (mut value, mut a, mut p) = best;
    let mut da = allocations.width() / (TEAM_GRID_POINTS - 1) as f64;
    let mut dp = prices.width() / (TEAM_GRID_POINTS - 1) as f64;
    const LOCAL: usize = 21;
    for _ in 0..40 {
        let (center_a, center_p) = (a, p);
        let a_local: Vec<f64> = linspace(
            (center_a - da).max(allocations.lo),
            (center_a + da).min(allocations.hi),
            LOCAL,
        )
        .collect();
        let p_local: Vec<f64> =
            linspace((center_p - dp).max(prices.lo), (center_p + dp).min(prices.hi), LOCAL).collect();
        for &x in &a_local {
            for &y in &p_local {
                let v = leader(x, y);
                if v > value + 4.0 * f64::EPSILON * value.abs() {
                    value = v;
                    a = x;
                    p = y;
                }
            }
        }
        da /= 5.0;
        dp /= 5.0;
        if da < 1e-14 && dp < 1e-14 {
            break;
        }
    }
    Ok((a, p))
}

/// Linear pricing through the team point whose slope matches the agent's
/// indifference curve there: `Q = ∂_a U_1 / ∂_λ U_1`.
///
/// The constructed pricing is always re-verified with
/// [`verify_incentive_controllable`] before it is returned.
pub fn construct_linear_incentive(agent: &AgentSpec, team: (f64, f64)) -> Result<IncentivePricing> {
    let (a_t, p_t) = team;
    let grad_a = agent.theta.alpha - agent.theta.beta * a_t - p_t;
    let grad_p = -a_t;
    if grad_a.abs() <= 1e-12 {
        return Err(Error::GradientDegenerate {
            allocation: a_t,
            price: p_t,
        });
    }
    if grad_p == 0.0 {
        return Err(Error::NotIncentiveControllable(
            "price gradient of the agent payoff vanishes at a zero team allocation".into(),
        ));
    }
    let level = agent_payoff(agent, a_t, p_t);
    if level <= 0.0 {
        return Err(Error::NotIncentiveControllable(format!(
            "agent payoff {level} at the team point is not positive, so its upper contour set is not strictly convex"
        )));
    }
    let slope = grad_a / grad_p;
    // Induced problem: V(a) − (λτ − Q(a − aτ))·a has a² coefficient Q − β/2.
    if slope - 0.5 * agent.theta.beta >= 0.0 {
        return Err(Error::NotIncentiveControllable(format!(
            "induced agent problem is not strictly concave (Q = {slope})"
        )));
    }
    let pricing = IncentivePricing {
        team_allocation: a_t,
        team_price: p_t,
        slope,
    };
    if !verify_incentive_controllable(&pricing, agent, 1e-4) {
        return Err(Error::NotIncentiveControllable(
            "agent best response under the constructed pricing leaves the team allocation".into(),
        ));
    }
    Ok(pricing)
}

/// Agent best response under a pricing function: dense grid over the
/// allocation box with golden-section refinement.
pub fn best_response(pricing: &IncentivePricing, agent: &AgentSpec) -> (f64, f64) {
    let induced = |a: f64| agent_payoff(agent, a, pricing.price_at(a));
    grid_then_golden(induced, agent.bounds.lo, agent.bounds.hi, RESPONSE_GRID_POINTS, 1e-12)
}

pub fn verify_incentive_controllable(pricing: &IncentivePricing, agent: &AgentSpec, tol: f64) -> bool {
    let (a, _) = best_response(pricing, agent);
    (a - pricing.team_allocation).abs() <= tol
        && (pricing.price_at(a) - pricing.team_price).abs() <= tol * pricing.slope.abs() + tol
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseStackelbergSolution {
    pub agent: usize,
    pub team_allocation: f64,
    pub team_price: f64,
    pub team_value: f64,
    pub pricing: IncentivePricing,
    pub best_response: f64,
    pub realized_price: f64,
    pub leader_value: f64,
}

/// Solves the single-follower reverse game: team problem, tangent pricing,
/// then the follower's actual response and the leader value it yields.
pub fn solve_reverse_stackelberg<F>(
    agent: &AgentSpec,
    prices: Interval,
    leader: F,
) -> Result<ReverseStackelbergSolution>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (a_t, p_t) = solve_team_problem(agent.bounds, prices, &leader)?;
    let pricing = construct_linear_incentive(agent, (a_t, p_t))?;
    let (a, _) = best_response(&pricing, agent);
    let realized_price = pricing.price_at(a);
    Ok(ReverseStackelbergSolution {
        agent: agent.id,
        team_allocation: a_t,
        team_price: p_t,
        team_value: leader(a_t, p_t),
        pricing,
        best_response: a,
        realized_price,
        leader_value: leader(a, realized_price),
    })
}

/// Independent per-agent pricing functions for `N > 1`; the leader payoff
/// for agent `i` is `leader(i, a_i, λ_i)`.
pub fn solve_reverse_stackelberg_per_agent<F>(
    scenario: &Scenario,
    prices: Interval,
    leader: F,
) -> Result<Vec<ReverseStackelbergSolution>>
where
    F: Fn(usize, f64, f64) -> f64 + Sync,
{
    scenario
        .agents
        .iter()
        .enumerate()
        .map(|(i, agent)| solve_reverse_stackelberg(agent, prices, |a, p| leader(i, a, p)))
        .collect()
}
