//! Direct mechanisms and their property checkers.
//!
//! Allocations maximize reported welfare `Σ V_i(a_i; θ̃_i)` subject to the
//! shared capacity `Σ a_i ≤ D` and each agent's box. Payments are money TO
//! the agent. Checkers enumerate finite type grids exhaustively; when several
//! counterexamples exist the lexicographically first one is reported.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{GameSolution, Profile, SolutionConcept};
use crate::model::{marginal_utility, utility_value, Interval, MarketOutcome, Prices, Scenario, Theta, TypePrior};
use crate::roots::{grid_then_golden, nonincreasing_root};
use crate::welfare::SolverConfig;

/// Payoff gains below this are treated as ties by the checkers.
pub const CHECK_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Efficient allocation

/// Water-filling allocator for `max Σ V_i(a_i; θ_i)` s.t. `Σ a_i ≤ D`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientAllocator {
    pub bounds: Vec<Interval>,
    pub capacity: Option<f64>,
}

impl EfficientAllocator {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        Self {
            bounds: scenario.bounds(),
            capacity: scenario.coordinator.capacity,
        }
    }

    pub fn agents(&self) -> usize {
        self.bounds.len()
    }

    /// Efficient allocation and the capacity multiplier.
    pub fn allocate(&self, types: &[Theta]) -> Result<(Vec<f64>, f64)> {
        self.allocate_among(types, None)
    }

    /// Allocation with agent `excluded` removed (its entry is zero).
    pub fn allocate_among(&self, types: &[Theta], excluded: Option<usize>) -> Result<(Vec<f64>, f64)> {
        if types.len() != self.agents() {
            return Err(Error::InvalidInput(format!(
                "expected {} reports, found {}",
                self.agents(),
                types.len()
            )));
        }
        let active = |i: usize| Some(i) != excluded;
        let at = |mu: f64| -> Vec<f64> {
            types
                .iter()
                .zip(&self.bounds)
                .enumerate()
                .map(|(i, (t, b))| {
                    if active(i) {
                        b.clamp((t.alpha - mu) / t.beta)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let unconstrained = at(0.0);
        let Some(cap) = self.capacity else {
            return Ok((unconstrained, 0.0));
        };
        let floor: f64 = (0..self.agents())
            .filter(|&i| active(i))
            .map(|i| self.bounds[i].lo)
            .sum();
        if floor > cap {
            return Err(Error::Infeasible(format!(
                "minimum allocations sum to {floor}, above capacity {cap}"
            )));
        }
        if unconstrained.iter().sum::<f64>() <= cap {
            return Ok((unconstrained, 0.0));
        }
        let mu_hi = types
            .iter()
            .zip(&self.bounds)
            .map(|(t, b)| t.alpha - t.beta * b.lo)
            .fold(0.0, f64::max)
            + 1.0;
        let mu = nonincreasing_root(|m| at(m).iter().sum::<f64>() - cap, 0.0, mu_hi, 1e-13);
        Ok((at(mu), mu))
    }

    /// Reported welfare `Σ_{j ∉ skip} V_j(a_j; θ_j)`.
    pub fn welfare(types: &[Theta], allocations: &[f64], skip: Option<usize>) -> f64 {
        types
            .iter()
            .zip(allocations)
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .map(|(_, (t, &a))| utility_value(a, t))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Mechanism abstraction

/// A direct mechanism: agents report types from a finite message space and
/// the mechanism maps the report profile to allocations and payments.
pub trait DirectMechanism: Sync {
    type Type: Clone + PartialEq + fmt::Debug + Serialize + Send + Sync;

    fn agent_count(&self) -> usize;

    fn message_space(&self, agent: usize) -> &[Self::Type];

    fn outcome(&self, reports: &[Self::Type]) -> Result<MarketOutcome>;

    /// Agent utility from its own allocation under its true type.
    fn valuation(&self, agent: usize, allocation: f64, true_type: &Self::Type) -> f64;

    fn payoff(&self, agent: usize, true_type: &Self::Type, reports: &[Self::Type]) -> Result<f64> {
        let out = self.outcome(reports)?;
        Ok(self.valuation(agent, out.allocations[agent], true_type) + out.payments[agent])
    }
}

/// Three-point report grid `α·{½, 1, 3/2}` at the agent's `β`.
pub fn type_grid(theta: &Theta) -> Vec<Theta> {
    [0.5, 1.0, 1.5]
        .iter()
        .map(|s| Theta::new(theta.alpha * s, theta.beta))
        .collect()
}

/// Clarke-pivot VCG over quadratic utilities.
#[derive(Debug, Clone)]
pub struct Vcg {
    pub allocator: EfficientAllocator,
    pub messages: Vec<Vec<Theta>>,
}

impl Vcg {
    pub fn new(scenario: &Scenario, messages: Vec<Vec<Theta>>) -> Self {
        Self {
            allocator: EfficientAllocator::from_scenario(scenario),
            messages,
        }
    }

    /// Message space `type_grid(θ_i)` for every agent.
    pub fn with_type_grid(scenario: &Scenario) -> Self {
        let messages = scenario.agents.iter().map(|a| type_grid(&a.theta)).collect();
        Self::new(scenario, messages)
    }
}

fn vcg_with(allocator: &EfficientAllocator, reports: &[Theta]) -> Result<MarketOutcome> {
    let (allocations, mu) = allocator.allocate(reports)?;
    let mut payments = Vec::with_capacity(reports.len());
    for i in 0..reports.len() {
        let others_now = EfficientAllocator::welfare(reports, &allocations, Some(i));
        let (without_i, _) = allocator.allocate_among(reports, Some(i))?;
        let others_alone = EfficientAllocator::welfare(reports, &without_i, Some(i));
        payments.push(others_now - others_alone);
    }
    Ok(MarketOutcome {
        supply: allocations.iter().sum(),
        allocations,
        prices: Prices::Uniform(mu),
        payments,
    })
}

/// VCG outcome for the given reports: efficient allocation under the
/// scenario's capacity and `t_i = Σ_{j≠i} V_j(a*_j) − W_{−i}`.
pub fn vcg_outcome(reports: &[Theta], scenario: &Scenario) -> Result<MarketOutcome> {
    vcg_with(&EfficientAllocator::from_scenario(scenario), reports)
}

impl DirectMechanism for Vcg {
    type Type = Theta;

    fn agent_count(&self) -> usize {
        self.allocator.agents()
    }

    fn message_space(&self, agent: usize) -> &[Theta] {
        &self.messages[agent]
    }

    fn outcome(&self, reports: &[Theta]) -> Result<MarketOutcome> {
        vcg_with(&self.allocator, reports)
    }

    fn valuation(&self, _agent: usize, allocation: f64, true_type: &Theta) -> f64 {
        utility_value(allocation, true_type)
    }
}

/// Independent discrete prior over arbitrary type labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior<T> {
    pub support: Vec<Vec<T>>,
    pub weights: Vec<Vec<f64>>,
}

impl DiscretePrior<Theta> {
    pub fn from_type_prior(prior: &TypePrior) -> Result<Self> {
        if !prior.independent {
            return Err(Error::InvalidInput("mechanism checks need an independent prior".into()));
        }
        Ok(Self {
            support: prior.support.clone(),
            weights: prior.weights.clone(),
        })
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Self::from_type_prior(scenario.prior.as_ref().ok_or(Error::PriorRequired)?)
    }
}

impl<T: Clone> DiscretePrior<T> {
    pub fn agents(&self) -> usize {
        self.support.len()
    }

    /// Visits every opponent profile of `agent` with its probability; the
    /// slot of `agent` is set to `own`.
    fn for_each_opponents<F>(&self, agent: usize, own: &T, mut f: F) -> Result<()>
    where
        F: FnMut(&[T], f64) -> Result<()>,
    {
        let sizes: Vec<usize> = (0..self.agents())
            .map(|j| if j == agent { 1 } else { self.support[j].len() })
            .collect();
        for idx in ProfileIter::new(sizes) {
            let profile: Vec<T> = idx
                .iter()
                .enumerate()
                .map(|(j, &k)| {
                    if j == agent {
                        own.clone()
                    } else {
                        self.support[j][k].clone()
                    }
                })
                .collect();
            let weight: f64 = idx
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != agent)
                .map(|(j, &k)| self.weights[j][k])
                .product();
            f(&profile, weight)?;
        }
        Ok(())
    }
}

/// Budget-balanced expected-externality mechanism (dAGVA).
#[derive(Debug, Clone)]
pub struct Dagva {
    pub allocator: EfficientAllocator,
    pub prior: DiscretePrior<Theta>,
}

impl Dagva {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let prior = DiscretePrior::from_scenario(scenario)?;
        Self::with_prior(scenario, prior)
    }

    pub fn with_prior(scenario: &Scenario, prior: DiscretePrior<Theta>) -> Result<Self> {
        let n = scenario.agents.len();
        if n < 2 {
            return Err(Error::NeedTwoAgents(n));
        }
        if prior.agents() != n {
            return Err(Error::InvalidInput(format!(
                "prior covers {} agents, scenario has {n}",
                prior.agents()
            )));
        }
        Ok(Self {
            allocator: EfficientAllocator::from_scenario(scenario),
            prior,
        })
    }

    /// Expected externality of agent `k` reporting `report`: the others'
    /// expected welfare at the efficient allocation, with their types drawn
    /// from the prior.
    pub fn expected_externality(&self, k: usize, report: &Theta) -> Result<f64> {
        let mut total = 0.0;
        self.prior.for_each_opponents(k, report, |profile, weight| {
            if weight > 0.0 {
                let (a, _) = self.allocator.allocate(profile)?;
                total += weight * EfficientAllocator::welfare(profile, &a, Some(k));
            }
            Ok(())
        })?;
        Ok(total)
    }
}

impl DirectMechanism for Dagva {
    type Type = Theta;

    fn agent_count(&self) -> usize {
        self.allocator.agents()
    }

    fn message_space(&self, agent: usize) -> &[Theta] {
        &self.prior.support[agent]
    }

    fn outcome(&self, reports: &[Theta]) -> Result<MarketOutcome> {
        let n = reports.len();
        let (allocations, mu) = self.allocator.allocate(reports)?;
        let xi = (0..n)
            .map(|k| self.expected_externality(k, &reports[k]))
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = xi.iter().sum();
        let share = 1.0 / (n - 1) as f64;
        let payments = xi.iter().map(|&x| x - share * (total - x)).collect();
        Ok(MarketOutcome {
            supply: allocations.iter().sum(),
            allocations,
            prices: Prices::Uniform(mu),
            payments,
        })
    }

    fn valuation(&self, _agent: usize, allocation: f64, true_type: &Theta) -> f64 {
        utility_value(allocation, true_type)
    }
}

/// dAGVA outcome for the given reports.
pub fn dagva_outcome(reports: &[Theta], prior: Option<&TypePrior>, scenario: &Scenario) -> Result<MarketOutcome> {
    let prior = DiscretePrior::from_type_prior(prior.ok_or(Error::PriorRequired)?)?;
    Dagva::with_prior(scenario, prior)?.outcome(reports)
}

/// Efficient allocation where each agent pays its reported utility. Used as
/// a mutant to confirm the checkers find profitable misreports.
#[derive(Debug, Clone)]
pub struct PayYourBid {
    pub allocator: EfficientAllocator,
    pub messages: Vec<Vec<Theta>>,
}

impl PayYourBid {
    pub fn with_type_grid(scenario: &Scenario) -> Self {
        Self {
            allocator: EfficientAllocator::from_scenario(scenario),
            messages: scenario.agents.iter().map(|a| type_grid(&a.theta)).collect(),
        }
    }
}

impl DirectMechanism for PayYourBid {
    type Type = Theta;

    fn agent_count(&self) -> usize {
        self.allocator.agents()
    }

    fn message_space(&self, agent: usize) -> &[Theta] {
        &self.messages[agent]
    }

    fn outcome(&self, reports: &[Theta]) -> Result<MarketOutcome> {
        let (allocations, mu) = self.allocator.allocate(reports)?;
        let payments = allocations
            .iter()
            .zip(reports)
            .map(|(&a, t)| -utility_value(a, t))
            .collect();
        Ok(MarketOutcome {
            supply: allocations.iter().sum(),
            allocations,
            prices: Prices::Uniform(mu),
            payments,
        })
    }

    fn valuation(&self, _agent: usize, allocation: f64, true_type: &Theta) -> f64 {
        utility_value(allocation, true_type)
    }
}

/// Single indivisible unit with linear values `θ_i·a_i`, `a_i ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SingleItemPricing {
    /// Clarke pivot: the winner pays the highest competing value.
    SecondPrice,
    /// The winner pays its own report.
    FirstPrice,
}

#[derive(Debug, Clone)]
pub struct SingleItem {
    pub pricing: SingleItemPricing,
    pub values: Vec<Vec<f64>>,
}

impl SingleItem {
    /// Welfare-maximizing winner with agent `skip` left out, by brute force
    /// over the feasible allocations (nobody, or exactly one agent). Ties keep
    /// the earlier allocation in that order.
    fn winner(reports: &[f64], skip: Option<usize>) -> Option<usize> {
        let mut best = (0.0, None);
        for (i, &v) in reports.iter().enumerate() {
            if Some(i) != skip && v > best.0 {
                best = (v, Some(i));
            }
        }
        best.1
    }
}

impl DirectMechanism for SingleItem {
    type Type = f64;

    fn agent_count(&self) -> usize {
        self.values.len()
    }

    fn message_space(&self, agent: usize) -> &[f64] {
        &self.values[agent]
    }

    fn outcome(&self, reports: &[f64]) -> Result<MarketOutcome> {
        let n = reports.len();
        let winner = Self::winner(reports, None);
        let mut allocations = vec![0.0; n];
        if let Some(w) = winner {
            allocations[w] = 1.0;
        }
        let welfare_of = |who: Option<usize>| who.map_or(0.0, |w| reports[w]);
        let payments = (0..n)
            .map(|i| match self.pricing {
                SingleItemPricing::SecondPrice => {
                    let others_now = if winner == Some(i) { 0.0 } else { welfare_of(winner) };
                    others_now - welfare_of(Self::winner(reports, Some(i)))
                }
                SingleItemPricing::FirstPrice => -reports[i] * allocations[i],
            })
            .collect();
        Ok(MarketOutcome {
            supply: allocations.iter().sum(),
            allocations,
            prices: Prices::PerAgent(vec![0.0; n]),
            payments,
        })
    }

    fn valuation(&self, _agent: usize, allocation: f64, true_type: &f64) -> f64 {
        true_type * allocation
    }
}

/// Fixed allocation and payments regardless of reports.
#[derive(Debug, Clone)]
pub struct ConstantMechanism {
    pub allocations: Vec<f64>,
    pub payments: Vec<f64>,
    pub messages: Vec<Vec<Theta>>,
}

impl DirectMechanism for ConstantMechanism {
    type Type = Theta;

    fn agent_count(&self) -> usize {
        self.allocations.len()
    }

    fn message_space(&self, agent: usize) -> &[Theta] {
        &self.messages[agent]
    }

    fn outcome(&self, _reports: &[Theta]) -> Result<MarketOutcome> {
        Ok(MarketOutcome {
            allocations: self.allocations.clone(),
            supply: self.allocations.iter().sum(),
            prices: Prices::PerAgent(vec![0.0; self.allocations.len()]),
            payments: self.payments.clone(),
        })
    }

    fn valuation(&self, _agent: usize, allocation: f64, true_type: &Theta) -> f64 {
        utility_value(allocation, true_type)
    }
}

/// Wraps a mechanism and charges every agent a lump-sum fee.
#[derive(Debug, Clone)]
pub struct WithFee<M> {
    pub inner: M,
    pub fee: f64,
}

impl<M: DirectMechanism> DirectMechanism for WithFee<M> {
    type Type = M::Type;

    fn agent_count(&self) -> usize {
        self.inner.agent_count()
    }

    fn message_space(&self, agent: usize) -> &[M::Type] {
        self.inner.message_space(agent)
    }

    fn outcome(&self, reports: &[M::Type]) -> Result<MarketOutcome> {
        let mut out = self.inner.outcome(reports)?;
        for t in &mut out.payments {
            *t -= self.fee;
        }
        Ok(out)
    }

    fn valuation(&self, agent: usize, allocation: f64, true_type: &M::Type) -> f64 {
        self.inner.valuation(agent, allocation, true_type)
    }
}

// ---------------------------------------------------------------------------
// Checkers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismProperty {
    IcDominant,
    IcBayesian,
    BudgetBalance,
    InterimIr,
    Dictatorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetBalance {
    Exact,
    Weak,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness<T> {
    Misreport {
        agent: usize,
        true_type: T,
        misreport: T,
        /// Full report profile of the other agents; empty for interim checks.
        opponents: Vec<T>,
        gain: f64,
    },
    Budget {
        reports: Vec<T>,
        payment_sum: f64,
    },
    Participation {
        agent: usize,
        true_type: T,
        expected_payoff: f64,
    },
    /// For every agent, the first profile at which its top outcome is not chosen.
    NotDictatorial {
        profiles: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismReport<T> {
    pub property: MechanismProperty,
    pub holds: bool,
    pub witness: Option<Witness<T>>,
    /// Largest misreport gain, largest payment sum, or smallest interim
    /// payoff, depending on the property.
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balance: Option<BudgetBalance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictator: Option<usize>,
}

impl<T> MechanismReport<T> {
    fn new(property: MechanismProperty, witness: Option<Witness<T>>, statistic: f64) -> Self {
        Self {
            property,
            holds: witness.is_none(),
            witness,
            statistic,
            balance: None,
            dictator: None,
        }
    }
}

/// Odometer over index profiles, last coordinate fastest.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.iter().all(|&s| s > 0) {
            Some(vec![0; sizes.len()])
        } else {
            None
        };
        Self { sizes, next }
    }
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut j = succ.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            succ[j] += 1;
            if succ[j] < self.sizes[j] {
                self.next = Some(succ);
                break;
            }
            succ[j] = 0;
        }
        Some(current)
    }
}

fn message_sizes<M: DirectMechanism>(mech: &M) -> Vec<usize> {
    (0..mech.agent_count()).map(|i| mech.message_space(i).len()).collect()
}

fn profile_from<M: DirectMechanism>(mech: &M, idx: &[usize]) -> Vec<M::Type> {
    idx.iter()
        .enumerate()
        .map(|(j, &k)| mech.message_space(j)[k].clone())
        .collect()
}

/// Largest gain and first witness for one (agent, true type) pair.
type TaskResult<T> = (f64, Option<Witness<T>>);
/// (misreport index, opponent profile index).
type FirstKey = (usize, usize);

/// Dominant-strategy incentive compatibility: for every agent, true type,
/// misreport and opponent report profile, truth must be at least as good.
pub fn check_ic_dominant<M: DirectMechanism>(
    mech: &M,
    true_types: &[Vec<M::Type>],
) -> Result<MechanismReport<M::Type>> {
    let n = mech.agent_count();
    if true_types.len() != n {
        return Err(Error::InvalidInput("true-type grid must cover every agent".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..true_types[i].len()).map(move |t| (i, t)))
        .collect();
    let results: Vec<Result<TaskResult<M::Type>>> = tasks
        .par_iter()
        .map(|&(i, t)| {
            let truth = &true_types[i][t];
            let mut sizes = message_sizes(mech);
            sizes[i] = 1;
            let mut max_gain = f64::NEG_INFINITY;
            let mut first: Option<(FirstKey, Witness<M::Type>)> = None;
            for (opp_idx, idx) in ProfileIter::new(sizes).enumerate() {
                let mut reports = profile_from(mech, &idx);
                reports[i] = truth.clone();
                let honest = mech.payoff(i, truth, &reports)?;
                for (m, mis) in mech.message_space(i).iter().enumerate() {
                    reports[i] = mis.clone();
                    let gain = mech.payoff(i, truth, &reports)? - honest;
                    max_gain = max_gain.max(gain);
                    if gain > CHECK_TOLERANCE && first.as_ref().is_none_or(|(key, _)| (m, opp_idx) < *key) {
                        let mut opponents = reports.clone();
                        opponents.remove(i);
                        first = Some((
                            (m, opp_idx),
                            Witness::Misreport {
                                agent: i,
                                true_type: truth.clone(),
                                misreport: mis.clone(),
                                opponents,
                                gain,
                            },
                        ));
                    }
                }
            }
            Ok((max_gain, first.map(|(_, w)| w)))
        })
        .collect();
    let mut statistic = f64::NEG_INFINITY;
    let mut witness = None;
    for r in results {
        let (gain, w) = r?;
        statistic = statistic.max(gain);
        if witness.is_none() {
            witness = w;
        }
    }
    Ok(MechanismReport::new(MechanismProperty::IcDominant, witness, statistic))
}

fn interim_payoff<M: DirectMechanism>(
    mech: &M,
    prior: &DiscretePrior<M::Type>,
    agent: usize,
    truth: &M::Type,
    report: &M::Type,
) -> Result<f64> {
    let mut total = 0.0;
    prior.for_each_opponents(agent, report, |profile, weight| {
        if weight > 0.0 {
            total += weight * mech.payoff(agent, truth, profile)?;
        }
        Ok(())
    })?;
    Ok(total)
}

fn check_prior<M: DirectMechanism>(mech: &M, prior: &DiscretePrior<M::Type>) -> Result<()> {
    if prior.agents() != mech.agent_count() || prior.weights.len() != prior.agents() {
        return Err(Error::InvalidInput("prior must cover every agent".into()));
    }
    Ok(())
}

/// Bayesian incentive compatibility: truthful reporting maximizes each
/// type's interim expected payoff when the others report truthfully.
pub fn check_ic_bayesian<M: DirectMechanism>(
    mech: &M,
    prior: &DiscretePrior<M::Type>,
) -> Result<MechanismReport<M::Type>> {
    check_prior(mech, prior)?;
    let mut statistic = f64::NEG_INFINITY;
    let mut witness = None;
    for i in 0..mech.agent_count() {
        for truth in &prior.support[i] {
            let honest = interim_payoff(mech, prior, i, truth, truth)?;
            for mis in mech.message_space(i) {
                let gain = interim_payoff(mech, prior, i, truth, mis)? - honest;
                statistic = statistic.max(gain);
                if gain > CHECK_TOLERANCE && witness.is_none() {
                    witness = Some(Witness::Misreport {
                        agent: i,
                        true_type: truth.clone(),
                        misreport: mis.clone(),
                        opponents: Vec::new(),
                        gain,
                    });
                }
            }
        }
    }
    Ok(MechanismReport::new(MechanismProperty::IcBayesian, witness, statistic))
}

/// Sums payments over every report profile of `grid`. Holds when the budget
/// is at least weakly balanced (`Σ t_i ≤ tol` everywhere).
pub fn check_budget_balance<M: DirectMechanism>(
    mech: &M,
    grid: &[Vec<M::Type>],
    tol: f64,
) -> Result<MechanismReport<M::Type>> {
    let sizes: Vec<usize> = grid.iter().map(Vec::len).collect();
    let mut max_sum = f64::NEG_INFINITY;
    let mut exact = true;
    let mut witness = None;
    for idx in ProfileIter::new(sizes) {
        let reports: Vec<M::Type> = idx.iter().enumerate().map(|(j, &k)| grid[j][k].clone()).collect();
        let sum = mech.outcome(&reports)?.payment_sum();
        max_sum = max_sum.max(sum);
        if sum.abs() > tol {
            exact = false;
        }
        if sum > tol && witness.is_none() {
            witness = Some(Witness::Budget {
                reports,
                payment_sum: sum,
            });
        }
    }
    let balance = if witness.is_some() {
        BudgetBalance::Violated
    } else if exact {
        BudgetBalance::Exact
    } else {
        BudgetBalance::Weak
    };
    let mut report = MechanismReport::new(MechanismProperty::BudgetBalance, witness, max_sum);
    report.balance = Some(balance);
    Ok(report)
}

/// Interim individual rationality under truthful play.
pub fn check_interim_ir<M: DirectMechanism>(
    mech: &M,
    prior: &DiscretePrior<M::Type>,
) -> Result<MechanismReport<M::Type>> {
    check_prior(mech, prior)?;
    let mut statistic = f64::INFINITY;
    let mut witness = None;
    for i in 0..mech.agent_count() {
        for truth in &prior.support[i] {
            let value = interim_payoff(mech, prior, i, truth, truth)?;
            statistic = statistic.min(value);
            if value < -CHECK_TOLERANCE && witness.is_none() {
                witness = Some(Witness::Participation {
                    agent: i,
                    true_type: truth.clone(),
                    expected_payoff: value,
                });
            }
        }
    }
    Ok(MechanismReport::new(MechanismProperty::InterimIr, witness, statistic))
}

/// `choices[p]` is the outcome selected at profile `p`; `preferences[p][i]`
/// is agent `i`'s ranking at that profile, best first. Holds when some agent
/// is a dictator, whose index is reported.
pub fn check_dictatorial(choices: &[usize], preferences: &[Vec<Vec<usize>>]) -> Result<MechanismReport<usize>> {
    if choices.len() != preferences.len() || choices.is_empty() {
        return Err(Error::InvalidInput(
            "one choice and one preference profile per type profile".into(),
        ));
    }
    let n = preferences[0].len();
    if preferences.iter().any(|p| p.len() != n || p.iter().any(Vec::is_empty)) {
        return Err(Error::InvalidInput(
            "every profile needs a nonempty ranking per agent".into(),
        ));
    }
    let first_miss: Vec<Option<usize>> = (0..n)
        .map(|i| (0..choices.len()).find(|&p| preferences[p][i][0] != choices[p]))
        .collect();
    let dictator = first_miss.iter().position(Option::is_none);
    let witness = if dictator.is_some() {
        None
    } else {
        Some(Witness::NotDictatorial {
            profiles: first_miss
                .iter()
                .map(|m| m.expect("every agent misses somewhere"))
                .collect(),
        })
    };
    let mut report = MechanismReport::new(
        MechanismProperty::Dictatorial,
        witness,
        dictator.map_or(-1.0, |d| d as f64),
    );
    report.dictator = dictator;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Scalar-strategy VCG

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SsvcgShape {
    /// `V̄(a; σ) = σ·ln(a + 1)`.
    ShiftedLog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsvcgFamily {
    pub shape: SsvcgShape,
    /// Points of the σ deviation grid used for the ε certificate.
    pub deviation_points: usize,
    /// The deviation grid spans `[0, span·σ*_i]`.
    pub deviation_span: f64,
}

impl Default for SsvcgFamily {
    fn default() -> Self {
        Self {
            shape: SsvcgShape::ShiftedLog,
            deviation_points: 2_001,
            deviation_span: 4.0,
        }
    }
}

impl SsvcgFamily {
    pub fn value(&self, a: f64, sigma: f64) -> f64 {
        match self.shape {
            SsvcgShape::ShiftedLog => sigma * (a + 1.0).ln(),
        }
    }

    pub fn marginal(&self, a: f64, sigma: f64) -> f64 {
        match self.shape {
            SsvcgShape::ShiftedLog => sigma / (a + 1.0),
        }
    }

    /// The σ whose declared marginal at `a` equals `gamma`.
    pub fn sigma_matching(&self, a: f64, gamma: f64) -> f64 {
        match self.shape {
            SsvcgShape::ShiftedLog => gamma * (a + 1.0),
        }
    }

    /// Maximizes `Σ V̄(a_i; σ_i)` s.t. `Σ a_i ≤ D` and the boxes. Returns the
    /// allocation and the declared marginal at the capacity.
    pub fn allocate(
        &self,
        sigmas: &[f64],
        bounds: &[Interval],
        capacity: f64,
        excluded: Option<usize>,
    ) -> Result<(Vec<f64>, f64)> {
        let active = |i: usize| Some(i) != excluded;
        let floor: f64 = (0..bounds.len()).filter(|&i| active(i)).map(|i| bounds[i].lo).sum();
        if floor > capacity {
            return Err(Error::Infeasible(format!(
                "minimum allocations {floor} exceed capacity {capacity}"
            )));
        }
        // With ν = 1/μ the response σν − 1 is linear in ν.
        let at = |nu: f64| -> Vec<f64> {
            sigmas
                .iter()
                .zip(bounds)
                .enumerate()
                .map(|(i, (&s, b))| if active(i) { b.clamp(s * nu - 1.0) } else { 0.0 })
                .collect()
        };
        let nu_hi = sigmas
            .iter()
            .zip(bounds)
            .enumerate()
            .filter(|&(i, (&s, _))| active(i) && s > 0.0)
            .map(|(_, (&s, b))| (b.hi + 1.0) / s)
            .fold(0.0, f64::max);
        if nu_hi == 0.0 {
            return Ok((at(0.0), f64::INFINITY));
        }
        let full = at(nu_hi);
        if full.iter().sum::<f64>() <= capacity {
            return Ok((full, 0.0));
        }
        let nu = nonincreasing_root(|v| capacity - at(v).iter().sum::<f64>(), 0.0, nu_hi, 1e-14).max(0.0);
        let a = at(nu);
        Ok((a, if nu > 0.0 { 1.0 / nu } else { f64::INFINITY }))
    }

    fn declared_welfare(&self, sigmas: &[f64], allocations: &[f64], skip: Option<usize>) -> f64 {
        sigmas
            .iter()
            .zip(allocations)
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .map(|(_, (&s, &a))| self.value(a, s))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsvcgSolution {
    pub sigma: Vec<f64>,
    pub outcome: MarketOutcome,
    pub solution: GameSolution,
    /// True-welfare-efficient allocation, for comparison.
    pub efficient_allocation: Vec<f64>,
    pub iterations: usize,
}

/// VCG run on declared utilities `V̄(·; σ)`: allocation and Clarke payments.
pub fn ssvcg_outcome(
    sigmas: &[f64],
    bounds: &[Interval],
    capacity: f64,
    family: &SsvcgFamily,
) -> Result<MarketOutcome> {
    let (allocations, mu) = family.allocate(sigmas, bounds, capacity, None)?;
    let mut payments = Vec::with_capacity(sigmas.len());
    for i in 0..sigmas.len() {
        let (without_i, _) = family.allocate(sigmas, bounds, capacity, Some(i))?;
        payments.push(
            family.declared_welfare(sigmas, &allocations, Some(i))
                - family.declared_welfare(sigmas, &without_i, Some(i)),
        );
    }
    Ok(MarketOutcome {
        supply: allocations.iter().sum(),
        allocations,
        prices: Prices::Uniform(mu),
        payments,
    })
}

/// Agent `i`'s payoff in the σ game, dropping the pivot term (it does not
/// depend on `σ_i`).
fn ssvcg_payoff(
    family: &SsvcgFamily,
    sigmas: &[f64],
    bounds: &[Interval],
    capacity: f64,
    truth: &Theta,
    i: usize,
) -> Result<f64> {
    let (a, _) = family.allocate(sigmas, bounds, capacity, None)?;
    Ok(utility_value(a[i], truth) + family.declared_welfare(sigmas, &a, Some(i)))
}

/// Largest gain over a σ deviation grid (with golden-section refinement).
pub fn ssvcg_epsilon(
    family: &SsvcgFamily,
    sigmas: &[f64],
    bounds: &[Interval],
    capacity: f64,
    types: &[Theta],
) -> Result<f64> {
    let mut eps: f64 = 0.0;
    for i in 0..sigmas.len() {
        let base = ssvcg_payoff(family, sigmas, bounds, capacity, &types[i], i)?;
        let hi = family.deviation_span * sigmas[i].max(1e-6);
        let mut trial = sigmas.to_vec();
        let mut failure = None;
        let (_, best) = grid_then_golden(
            |s| {
                trial[i] = s;
                match ssvcg_payoff(family, &trial, bounds, capacity, &types[i], i) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                }
            },
            0.0,
            hi,
            family.deviation_points,
            1e-12,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        eps = eps.max(best - base);
    }
    Ok(eps)
}

/// Nash equilibrium of the scalar-strategy VCG game by damped fixed-point
/// iteration on declared parameters: each agent moves its σ so that its
/// declared marginal matches its true marginal at the current allocation.
pub fn ssvcg_solve(scenario: &Scenario, family: &SsvcgFamily, config: &SolverConfig) -> Result<SsvcgSolution> {
    config.validate()?;
    let capacity = scenario
        .coordinator
        .capacity
        .ok_or_else(|| Error::InvalidInput("the scalar-strategy mechanism needs a capacity".into()))?;
    let types = scenario.thetas();
    let bounds = scenario.bounds();
    let allocator = EfficientAllocator::from_scenario(scenario);
    let (efficient, _) = allocator.allocate(&types)?;
    for (i, (&a, t)) in efficient.iter().zip(&types).enumerate() {
        if a > bounds[i].lo && marginal_utility(a, t) <= 1e-12 {
            return Err(Error::InvalidInput(format!(
                "agent {} is satiated at its efficient allocation; an increasing declared family cannot reach it",
                i + 1
            )));
        }
    }
    let target = |a: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(&types)
            .map(|(&x, t)| family.sigma_matching(x, marginal_utility(x, t).max(0.0)))
            .collect()
    };
    let mut sigma = target(&efficient.iter().zip(&bounds).map(|(_, b)| b.lo).collect::<Vec<_>>());
    let damping = 0.5;
    let mut iterations = 0;
    let mut settled = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let (a, _) = family.allocate(&sigma, &bounds, capacity, None)?;
        let goal = target(&a);
        let next: Vec<f64> = sigma
            .iter()
            .zip(&goal)
            .map(|(s, g)| (1.0 - damping) * s + damping * g)
            .collect();
        let step = next
            .iter()
            .zip(&sigma)
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max);
        sigma = next;
        if step <= 1e-13 {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::NotConverged {
            what: "scalar-strategy VCG fixed point",
            iterations,
            trace: None,
        });
    }
    let outcome = ssvcg_outcome(&sigma, &bounds, capacity, family)?;
    let eps = ssvcg_epsilon(family, &sigma, &bounds, capacity, &types)?.max(0.0);
    Ok(SsvcgSolution {
        solution: GameSolution {
            profile: Profile::Continuous(sigma.clone()),
            concept: SolutionConcept::EpsilonNash(eps),
            epsilon: eps,
        },
        sigma,
        outcome,
        efficient_allocation: efficient,
        iterations,
    })
}
