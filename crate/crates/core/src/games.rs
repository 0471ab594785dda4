//! Solution concepts over finite games, Bayesian interim payoffs, and the
//! supply-function bidding game.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MarketOutcome, Prices, Scenario, TypePrior};
use crate::roots::grid_then_golden;

/// Pure-strategy payoff tolerance for "no profitable deviation".
pub const NASH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "epsilon", rename_all = "snake_case")]
pub enum SolutionConcept {
    Nash,
    EpsilonNash(f64),
    Dominant,
    BayesianNash,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Profile {
    Discrete(Vec<usize>),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution {
    pub profile: Profile,
    pub concept: SolutionConcept,
    /// Largest unilateral improvement available at the profile.
    pub epsilon: f64,
}

/// Finite normal-form game with a dense payoff table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    strategy_labels: Vec<Vec<String>>,
    // payoffs[flat profile index][player]
    payoffs: Vec<Vec<f64>>,
}

impl FiniteGame {
    pub fn from_fn<F>(strategy_labels: Vec<Vec<String>>, payoff: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<f64>,
    {
        if strategy_labels.is_empty() || strategy_labels.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("every player needs a nonempty strategy set".into()));
        }
        let players = strategy_labels.len();
        let total: usize = strategy_labels.iter().map(Vec::len).product();
        let mut game = Self {
            strategy_labels,
            payoffs: Vec::with_capacity(total),
        };
        for flat in 0..total {
            let profile = game.unflatten(flat);
            let u = payoff(&profile);
            if u.len() != players {
                return Err(Error::InvalidInput(format!(
                    "payoff at {profile:?} has {} entries for {players} players",
                    u.len()
                )));
            }
            game.payoffs.push(u);
        }
        Ok(game)
    }

    /// Two-player game from a row-major table of `(u_row, u_col)` pairs.
    pub fn bimatrix(rows: &[&str], cols: &[&str], table: &[Vec<(f64, f64)>]) -> Result<Self> {
        if table.len() != rows.len() || table.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::InvalidInput("bimatrix shape does not match labels".into()));
        }
        let labels = vec![
            rows.iter().map(|s| s.to_string()).collect(),
            cols.iter().map(|s| s.to_string()).collect(),
        ];
        Self::from_fn(labels, |p| {
            let (a, b) = table[p[0]][p[1]];
            vec![a, b]
        })
    }

    pub fn players(&self) -> usize {
        self.strategy_labels.len()
    }

    pub fn strategy_count(&self, player: usize) -> usize {
        self.strategy_labels[player].len()
    }

    pub fn label(&self, player: usize, strategy: usize) -> &str {
        &self.strategy_labels[player][strategy]
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.payoffs.len()).map(|f| self.unflatten(f))
    }

    pub fn payoff(&self, profile: &[usize]) -> &[f64] {
        &self.payoffs[self.flatten(profile)]
    }

    fn flatten(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strategy_labels)
            .fold(0, |acc, (&s, labels)| acc * labels.len() + s)
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut profile = vec![0; self.players()];
        for (slot, labels) in profile.iter_mut().zip(&self.strategy_labels).rev() {
            *slot = flat % labels.len();
            flat /= labels.len();
        }
        profile
    }

    fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.players() || profile.iter().enumerate().any(|(i, &s)| s >= self.strategy_count(i)) {
            return Err(Error::InvalidInput(format!("invalid strategy profile {profile:?}")));
        }
        Ok(())
    }
}

/// Largest gain any single player obtains by deviating from `profile`.
pub fn epsilon_of_profile(game: &FiniteGame, profile: &[usize]) -> Result<f64> {
    game.check_profile(profile)?;
    let base = game.payoff(profile);
    let mut eps: f64 = 0.0;
    let mut deviated = profile.to_vec();
    for i in 0..game.players() {
        for s in 0..game.strategy_count(i) {
            deviated[i] = s;
            eps = eps.max(game.payoff(&deviated)[i] - base[i]);
        }
        deviated[i] = profile[i];
    }
    Ok(eps)
}

/// All pure-strategy Nash equilibria by exhaustive enumeration.
pub fn solve_nash_finite(game: &FiniteGame) -> Result<Vec<GameSolution>> {
    let mut out = Vec::new();
    for profile in game.profiles() {
        let eps = epsilon_of_profile(game, &profile)?;
        if eps <= NASH_TOLERANCE {
            out.push(GameSolution {
                profile: Profile::Discrete(profile),
                concept: SolutionConcept::Nash,
                epsilon: eps,
            });
        }
    }
    if out.is_empty() {
        Err(Error::NoPureNash)
    } else {
        Ok(out)
    }
}

/// True when every player's strategy is a best response to every opponent
/// profile, not just to the one in `profile`.
pub fn is_dominant_profile(game: &FiniteGame, profile: &[usize]) -> Result<bool> {
    game.check_profile(profile)?;
    for opponents in game.profiles() {
        for i in 0..game.players() {
            let mut with_own = opponents.clone();
            with_own[i] = profile[i];
            let own = game.payoff(&with_own)[i];
            for s in 0..game.strategy_count(i) {
                with_own[i] = s;
                if game.payoff(&with_own)[i] > own + NASH_TOLERANCE {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Family of games indexed by a type profile. `payoff(types, actions)` gives
/// every player's payoff when the realized types are `types`.
pub struct BayesianGame<F> {
    pub type_counts: Vec<usize>,
    pub action_counts: Vec<usize>,
    pub payoff: F,
}

impl<F> BayesianGame<F>
where
    F: Fn(&[usize], &[usize]) -> Vec<f64>,
{
    pub fn players(&self) -> usize {
        self.type_counts.len()
    }
}

/// Interim expected payoff of `player` holding type index `own_type`, when
/// every player follows `strategies[j][type] -> action` and opponents' types
/// are drawn independently from `marginals`.
pub fn bayesian_expected_payoff<F>(
    game: &BayesianGame<F>,
    marginals: &[Vec<f64>],
    strategies: &[Vec<usize>],
    player: usize,
    own_type: usize,
) -> Result<f64>
where
    F: Fn(&[usize], &[usize]) -> Vec<f64>,
{
    let n = game.players();
    if marginals.len() != n || strategies.len() != n || player >= n {
        return Err(Error::InvalidInput(
            "prior and strategies must cover every player".into(),
        ));
    }
    for j in 0..n {
        if marginals[j].len() != game.type_counts[j] || strategies[j].len() != game.type_counts[j] {
            return Err(Error::InvalidInput(format!(
                "player {j}: strategy or prior not total on support"
            )));
        }
        if strategies[j].iter().any(|&s| s >= game.action_counts[j]) {
            return Err(Error::InvalidInput(format!("player {j}: action index out of range")));
        }
    }
    if own_type >= game.type_counts[player] {
        return Err(Error::TypeOffSupport {
            player,
            index: own_type,
            size: game.type_counts[player],
        });
    }
    let mut types = vec![0usize; n];
    types[player] = own_type;
    let mut total = 0.0;
    loop {
        let weight: f64 = (0..n)
            .filter(|&j| j != player)
            .map(|j| marginals[j][types[j]])
            .product();
        if weight > 0.0 {
            let actions: Vec<usize> = (0..n).map(|j| strategies[j][types[j]]).collect();
            total += weight * (game.payoff)(&types, &actions)[player];
        }
        // Odometer over opponents' types.
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(total);
            }
            j -= 1;
            if j == player {
                continue;
            }
            types[j] += 1;
            if types[j] < game.type_counts[j] {
                break;
            }
            types[j] = 0;
        }
    }
}

/// Same as [`bayesian_expected_payoff`] with the marginals of a [`TypePrior`].
pub fn bayesian_expected_payoff_with_prior<F>(
    game: &BayesianGame<F>,
    prior: &TypePrior,
    strategies: &[Vec<usize>],
    player: usize,
    own_type: usize,
) -> Result<f64>
where
    F: Fn(&[usize], &[usize]) -> Vec<f64>,
{
    if !prior.independent {
        return Err(Error::InvalidInput(
            "interim expectations need an independent prior".into(),
        ));
    }
    bayesian_expected_payoff(game, &prior.weights, strategies, player, own_type)
}

// ---------------------------------------------------------------------------
// Supply-function bidding

/// Linear supply-function parameters `a_i = b_i·λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyBidProfile {
    pub bids: Vec<f64>,
}

impl SupplyBidProfile {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        if bids.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidInput("bids must be finite and nonnegative".into()));
        }
        Ok(Self { bids })
    }

    pub fn total(&self) -> f64 {
        self.bids.iter().sum()
    }
}

/// Sets `λ = d / Σ b_i` so that the committed shedding `b_i·λ` sums to the
/// deficit. Agents are paid `λ·a_i` for shedding.
pub fn clear_supply_function(bids: &SupplyBidProfile, deficit: f64) -> Result<MarketOutcome> {
    if !(deficit.is_finite() && deficit > 0.0) {
        return Err(Error::InvalidInput(format!(
            "deficit must be positive, found {deficit}"
        )));
    }
    let total = bids.total();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroBidSum(total));
    }
    let price = deficit / total;
    let allocations: Vec<f64> = bids.bids.iter().map(|b| b * deficit / total).collect();
    let payments = allocations.iter().map(|a| price * a).collect();
    Ok(MarketOutcome {
        allocations,
        supply: deficit,
        prices: Prices::Uniform(price),
        payments,
    })
}

/// `λ·a_i − ½·β_i·a_i²` at the cleared outcome.
pub fn supply_bid_payoff(bids: &[f64], costs: &[f64], deficit: f64, player: usize) -> f64 {
    let total: f64 = bids.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let price = deficit / total;
    let a = bids[player] * price;
    price * a - 0.5 * costs[player] * a * a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyGameSolution {
    pub bids: SupplyBidProfile,
    pub outcome: MarketOutcome,
    pub solution: GameSolution,
    /// `−min Σ ½β_i a_i²` subject to `Σ a_i = d`.
    pub efficient_welfare: f64,
    /// `−Σ ½β_i a_i²` at the equilibrium allocation.
    pub realized_welfare: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupplyGameConfig {
    pub damping: f64,
    pub max_iterations: usize,
    pub bid_tolerance: f64,
    pub deviation_grid: usize,
    pub epsilon_tolerance: f64,
}

impl Default for SupplyGameConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 100_000,
            bid_tolerance: 1e-13,
            deviation_grid: 10_000,
            epsilon_tolerance: 1e-6,
        }
    }
}

/// Best-response bid against the others' total `rest`, maximizing
/// `(b − ½βb²)/(b + rest)²`, which is `rest / (1 + β·rest)`.
fn best_response_bid(rest: f64, beta: f64, cap: f64) -> f64 {
    (rest / (1.0 + beta * rest)).clamp(0.0, cap)
}

/// Largest unilateral gain found by a deviation grid over `[0, cap]` with
/// golden-section refinement of the best cell.
pub fn supply_bid_epsilon(bids: &[f64], costs: &[f64], deficit: f64, cap: f64, grid: usize) -> f64 {
    let mut eps: f64 = 0.0;
    let mut trial = bids.to_vec();
    for i in 0..bids.len() {
        let base = supply_bid_payoff(bids, costs, deficit, i);
        let (_, best) = grid_then_golden(
            |b| {
                trial[i] = b;
                let v = supply_bid_payoff(&trial, costs, deficit, i);
                trial[i] = bids[i];
                v
            },
            0.0,
            cap,
            grid,
            1e-12,
        );
        eps = eps.max(best - base);
    }
    eps
}

/// Nash equilibrium of the supply-function game by damped best-response
/// iteration, certified by a deviation-grid ε.
///
/// Each agent's shedding cost is `½·β_i·a²` with `β_i` taken from the
/// scenario; the deficit comes from the coordinator. With fewer than three
/// bidders no equilibrium with positive bids exists (every best response
/// undercuts the rival's bid), so such games are rejected.
pub fn supply_function_nash(scenario: &Scenario, config: &SupplyGameConfig) -> Result<SupplyGameSolution> {
    let n = scenario.agents.len();
    if n < 3 {
        return Err(Error::TooFewBidders {
            bidders: n,
            required: 3,
        });
    }
    let deficit = scenario
        .coordinator
        .deficit
        .ok_or_else(|| Error::InvalidInput("supply-function game needs a deficit".into()))?;
    let costs: Vec<f64> = scenario.agents.iter().map(|a| a.theta.beta).collect();
    let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let cap = 10.0 * deficit / min_cost;

    let mut bids: Vec<f64> = costs.iter().map(|c| (1.0 / c).min(cap)).collect();
    let mut iterations = 0;
    let mut settled = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let total: f64 = bids.iter().sum();
        let next: Vec<f64> = bids
            .iter()
            .zip(&costs)
            .map(|(&b, &c)| {
                let br = best_response_bid(total - b, c, cap);
                (1.0 - config.damping) * b + config.damping * br
            })
            .collect();
        let step = next.iter().zip(&bids).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        bids = next;
        if step <= config.bid_tolerance {
            settled = true;
            break;
        }
    }
    if !settled || bids.iter().sum::<f64>() <= 0.0 {
        return Err(Error::NotConverged {
            what: "supply-function best-response iteration",
            iterations,
            trace: None,
        });
    }
    let eps = supply_bid_epsilon(&bids, &costs, deficit, cap, config.deviation_grid).max(0.0);
    if eps > config.epsilon_tolerance {
        return Err(Error::NotConverged {
            what: "supply-function equilibrium certificate",
            iterations,
            trace: None,
        });
    }
    let profile = SupplyBidProfile::new(bids)?;
    let outcome = clear_supply_function(&profile, deficit)?;
    let realized_welfare = -outcome
        .allocations
        .iter()
        .zip(&costs)
        .map(|(a, c)| 0.5 * c * a * a)
        .sum::<f64>();
    let efficient_welfare = -0.5 * deficit * deficit / costs.iter().map(|c| 1.0 / c).sum::<f64>();
    Ok(SupplyGameSolution {
        solution: GameSolution {
            profile: Profile::Continuous(profile.bids.clone()),
            concept: SolutionConcept::EpsilonNash(eps),
            epsilon: eps,
        },
        bids: profile,
        outcome,
        efficient_welfare,
        realized_welfare,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentSpec, CoordinatorSpec, Interval, QuadraticCost, Theta};

    fn prisoners() -> FiniteGame {
        FiniteGame::bimatrix(
            &["Cooperate", "Defect"],
            &["Cooperate", "Defect"],
            &[vec![(-1.0, -1.0), (-3.0, 0.0)], vec![(0.0, -3.0), (-2.0, -2.0)]],
        )
        .unwrap()
    }

    fn coordination() -> FiniteGame {
        FiniteGame::bimatrix(
            &["A", "B"],
            &["A", "B"],
            &[vec![(2.0, 2.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 1.0)]],
        )
        .unwrap()
    }

    fn pennies() -> FiniteGame {
        FiniteGame::bimatrix(
            &["H", "T"],
            &["H", "T"],
            &[vec![(1.0, -1.0), (-1.0, 1.0)], vec![(-1.0, 1.0), (1.0, -1.0)]],
        )
        .unwrap()
    }

    fn one_player() -> FiniteGame {
        FiniteGame::from_fn(vec![vec!["x".into(), "y".into(), "z".into()]], |p| {
            vec![[1.0, 3.0, 2.0][p[0]]]
        })
        .unwrap()
    }

    #[test]
    fn epsilon_examples() {
        let g = prisoners();
        assert_eq!(epsilon_of_profile(&g, &[1, 1]).unwrap(), 0.0);
        assert_eq!(epsilon_of_profile(&g, &[0, 0]).unwrap(), 1.0);
        assert_eq!(epsilon_of_profile(&one_player(), &[1]).unwrap(), 0.0);
        assert!(epsilon_of_profile(&g, &[2, 0]).is_err());
    }

    #[test]
    fn nash_examples() {
        let sols = solve_nash_finite(&prisoners()).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].profile, Profile::Discrete(vec![1, 1]));
        assert!(matches!(solve_nash_finite(&pennies()), Err(Error::NoPureNash)));
        let sols = solve_nash_finite(&coordination()).unwrap();
        let profiles: Vec<_> = sols.into_iter().map(|s| s.profile).collect();
        assert_eq!(
            profiles,
            vec![Profile::Discrete(vec![0, 0]), Profile::Discrete(vec![1, 1])]
        );
    }

    #[test]
    fn dominance_examples() {
        assert!(is_dominant_profile(&prisoners(), &[1, 1]).unwrap());
        assert!(!is_dominant_profile(&coordination(), &[0, 0]).unwrap());
        assert!(is_dominant_profile(&one_player(), &[1]).unwrap());
    }

    #[test]
    fn three_player_flattening_round_trips() {
        let labels = vec![
            vec!["a".into(), "b".into()],
            vec!["c".into(), "d".into(), "e".into()],
            vec!["f".into(), "g".into()],
        ];
        let g = FiniteGame::from_fn(labels, |p| vec![p[0] as f64, p[1] as f64, p[2] as f64]).unwrap();
        for p in g.profiles() {
            assert_eq!(g.payoff(&p), &[p[0] as f64, p[1] as f64, p[2] as f64]);
        }
        assert_eq!(g.profiles().count(), 12);
        assert_eq!(g.label(1, 2), "e");
    }

    #[test]
    fn bayesian_point_prior_is_complete_information() {
        let game = BayesianGame {
            type_counts: vec![1, 1],
            action_counts: vec![2, 2],
            payoff: |_: &[usize], a: &[usize]| prisoners().payoff(a).to_vec(),
        };
        let v = bayesian_expected_payoff(&game, &[vec![1.0], vec![1.0]], &[vec![0], vec![1]], 0, 0).unwrap();
        assert_eq!(v, -3.0);
    }

    #[test]
    fn bayesian_constant_across_opponent_types() {
        let game = BayesianGame {
            type_counts: vec![2, 2],
            action_counts: vec![1, 1],
            payoff: |t: &[usize], _: &[usize]| vec![5.0 + t[0] as f64, 0.0],
        };
        let marg = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let v = bayesian_expected_payoff(&game, &marg, &[vec![0, 0], vec![0, 0]], 0, 1).unwrap();
        assert_eq!(v, 6.0);
        assert!(matches!(
            bayesian_expected_payoff(&game, &marg, &[vec![0, 0], vec![0, 0]], 0, 2),
            Err(Error::TypeOffSupport { .. })
        ));
    }

    #[test]
    fn bayesian_first_price_two_types() {
        // Values {0: 2, 1: 4}; bids {0: 1, 1: 2}; highest bid wins, ties split.
        let values = [2.0, 4.0];
        let bid_of = [1.0, 2.0];
        let game = BayesianGame {
            type_counts: vec![2, 2],
            action_counts: vec![2, 2],
            payoff: move |t: &[usize], a: &[usize]| {
                let (b0, b1) = (bid_of[a[0]], bid_of[a[1]]);
                let (v0, v1) = (values[t[0]], values[t[1]]);
                if b0 > b1 {
                    vec![v0 - b0, 0.0]
                } else if b1 > b0 {
                    vec![0.0, v1 - b1]
                } else {
                    vec![0.5 * (v0 - b0), 0.5 * (v1 - b1)]
                }
            },
        };
        let marg = vec![vec![0.3, 0.7], vec![0.4, 0.6]];
        let strategies = vec![vec![0, 1], vec![0, 1]];
        // Player 0 with high value bids 2. Opponent low (0.4): wins 4-2 = 2.
        // Opponent high (0.6): tie, 0.5*(4-2) = 1. Expectation 0.8 + 0.6.
        let v = bayesian_expected_payoff(&game, &marg, &strategies, 0, 1).unwrap();
        assert!((v - 1.4).abs() < 1e-15);
        // Player 1 with low value bids 1. Opponent low (0.3): tie 0.5*(2-1).
        // Opponent high (0.7): loses. Expectation 0.15.
        let v = bayesian_expected_payoff(&game, &marg, &strategies, 1, 0).unwrap();
        assert!((v - 0.15).abs() < 1e-15);
    }

    #[test]
    fn supply_function_examples() {
        let out = clear_supply_function(&SupplyBidProfile::new(vec![1.0, 1.0]).unwrap(), 6.0).unwrap();
        assert_eq!(out.prices, Prices::Uniform(3.0));
        assert_eq!(out.allocations, vec![3.0, 3.0]);
        assert_eq!(out.payments, vec![9.0, 9.0]);
        let out = clear_supply_function(&SupplyBidProfile::new(vec![3.0, 1.0]).unwrap(), 8.0).unwrap();
        assert_eq!(out.prices, Prices::Uniform(2.0));
        assert_eq!(out.allocations, vec![6.0, 2.0]);
        assert!(matches!(
            clear_supply_function(&SupplyBidProfile::new(vec![0.0, 0.0]).unwrap(), 5.0),
            Err(Error::ZeroBidSum(_))
        ));
        assert!(SupplyBidProfile::new(vec![-1.0]).is_err());
    }

    fn shedding_scenario(betas: &[f64], deficit: f64) -> Scenario {
        let agents = betas
            .iter()
            .enumerate()
            .map(|(i, &b)| AgentSpec::new(i + 1, Theta::new(1.0, b), Interval::new(0.0, 100.0)).unwrap())
            .collect();
        let coordinator = CoordinatorSpec {
            cost: QuadraticCost { c1: 0.0, c2: 1.0 },
            supply_bounds: Interval::new(0.0, 100.0),
            capacity: None,
            deficit: Some(deficit),
        };
        Scenario::new(agents, coordinator, None).unwrap()
    }

    #[test]
    fn best_response_matches_grid() {
        let (rest, beta) = (0.7, 1.3);
        let br = best_response_bid(rest, beta, 100.0);
        let f = |b: f64| (b - 0.5 * beta * b * b) / (b + rest).powi(2);
        let grid_best = (0..=200_000)
            .map(|k| k as f64 * 1e-5)
            .max_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
            .unwrap();
        assert!((br - grid_best).abs() < 2e-5);
    }

    #[test]
    fn two_bidders_have_no_positive_equilibrium() {
        // Best response rest/(1+β·rest) < rest, so bids shrink toward zero.
        let (mut b1, mut b2) = (1.0, 1.0);
        for _ in 0..1000 {
            b1 = best_response_bid(b2, 1.0, 100.0);
            b2 = best_response_bid(b1, 1.0, 100.0);
        }
        assert!(b1 < 1e-2 && b2 < 1e-2);
        for n in [1, 2] {
            let s = shedding_scenario(&vec![1.0; n], 2.0);
            assert!(matches!(
                supply_function_nash(&s, &SupplyGameConfig::default()),
                Err(Error::TooFewBidders { .. })
            ));
        }
    }

    #[test]
    fn symmetric_three_bidders_split_equally() {
        let sol =
            supply_function_nash(&shedding_scenario(&[1.0, 1.0, 1.0], 3.0), &SupplyGameConfig::default()).unwrap();
        // Symmetric equilibrium b = (N−2)/(β(N−1)) = 0.5.
        for &b in &sol.bids.bids {
            assert!((b - 0.5).abs() < 1e-9);
        }
        for &a in &sol.outcome.allocations {
            assert!((a - 1.0).abs() < 1e-9);
        }
        assert!(sol.epsilon_ok());
    }

    #[test]
    fn cheaper_bidder_sheds_more() {
        let sol =
            supply_function_nash(&shedding_scenario(&[1.0, 2.0, 2.0], 3.0), &SupplyGameConfig::default()).unwrap();
        let a = &sol.outcome.allocations;
        assert!(a[0] > a[1]);
        assert!((a[1] - a[2]).abs() < 1e-9);
        assert!(sol.solution.epsilon <= 1e-6);
        assert!(sol.realized_welfare <= sol.efficient_welfare + 1e-12);
    }

    #[test]
    fn missing_deficit_is_rejected() {
        let mut s = shedding_scenario(&[1.0, 1.0, 1.0], 1.0);
        s.coordinator.deficit = None;
        assert!(matches!(
            supply_function_nash(&s, &SupplyGameConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    impl SupplyGameSolution {
        fn epsilon_ok(&self) -> bool {
            self.solution.epsilon <= 1e-6
        }
    }
}
