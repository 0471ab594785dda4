//! Scenario model: agent and coordinator types, the quadratic utility and
//! cost family, demand/supply curves, the JSON scenario format and the
//! information-structure graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Private utility parameters of one resource agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theta {
    /// Marginal-utility intercept.
    pub alpha: f64,
    /// Marginal-utility slope, strictly positive.
    pub beta: f64,
}

impl Theta {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::ScenarioInvalid(format!("{what}: alpha must be finite")));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::ScenarioInvalid(format!(
                "{what}: beta must be finite and positive, found {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub id: usize,
    pub theta: Theta,
    pub bounds: Interval,
}

impl AgentSpec {
    pub fn new(id: usize, theta: Theta, bounds: Interval) -> Result<Self> {
        let agent = Self { id, theta, bounds };
        agent.validate()?;
        Ok(agent)
    }

    fn validate(&self) -> Result<()> {
        let what = format!("agent {}", self.id);
        self.theta.validate(&what)?;
        let Interval { lo, hi } = self.bounds;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::ScenarioInvalid(format!("{what}: bounds must be finite")));
        }
        if lo < 0.0 || lo > hi {
            return Err(Error::ScenarioInvalid(format!(
                "{what}: bounds must satisfy 0 <= a_min <= a_max, found [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Supply cost `C(y) = c1·y + ½·c2·y²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCost {
    pub c1: f64,
    pub c2: f64,
}

impl QuadraticCost {
    pub fn value(&self, y: f64) -> f64 {
        self.c1 * y + 0.5 * self.c2 * y * y
    }

    pub fn marginal(&self, y: f64) -> f64 {
        self.c1 + self.c2 * y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatorSpec {
    pub cost: QuadraticCost,
    pub supply_bounds: Interval,
    /// Energy limit per market period.
    pub capacity: Option<f64>,
    /// Load-shedding target for supply-function markets.
    pub deficit: Option<f64>,
}

impl CoordinatorSpec {
    fn validate(&self) -> Result<()> {
        let QuadraticCost { c1, c2 } = self.cost;
        if !(c1.is_finite() && c2.is_finite()) {
            return Err(Error::ScenarioInvalid("cost coefficients must be finite".into()));
        }
        if c2 < 0.0 {
            return Err(Error::ScenarioInvalid(format!("c2 must be >= 0, found {c2}")));
        }
        let Interval { lo, hi } = self.supply_bounds;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::ScenarioInvalid(format!(
                "supply bounds must satisfy y_min <= y_max, found [{lo}, {hi}]"
            )));
        }
        if let Some(d) = self.capacity {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::ScenarioInvalid(format!("capacity must be positive, found {d}")));
            }
        }
        if let Some(d) = self.deficit {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::ScenarioInvalid(format!("deficit must be positive, found {d}")));
            }
        }
        Ok(())
    }
}

/// Discrete, per-agent type distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePrior {
    pub support: Vec<Vec<Theta>>,
    pub weights: Vec<Vec<f64>>,
    pub independent: bool,
}

impl TypePrior {
    pub fn new(support: Vec<Vec<Theta>>, weights: Vec<Vec<f64>>, independent: bool) -> Result<Self> {
        let prior = Self {
            support,
            weights,
            independent,
        };
        prior.validate()?;
        Ok(prior)
    }

    /// Uniform weights over the given per-agent support.
    pub fn uniform(support: Vec<Vec<Theta>>) -> Result<Self> {
        let weights = support
            .iter()
            .map(|s| vec![1.0 / s.len().max(1) as f64; s.len()])
            .collect();
        Self::new(support, weights, true)
    }

    /// Single-point prior at the given types.
    pub fn point(types: &[Theta]) -> Self {
        Self {
            support: types.iter().map(|t| vec![*t]).collect(),
            weights: types.iter().map(|_| vec![1.0]).collect(),
            independent: true,
        }
    }

    pub fn agents(&self) -> usize {
        self.support.len()
    }

    fn validate(&self) -> Result<()> {
        if self.support.len() != self.weights.len() {
            return Err(Error::ScenarioInvalid(format!(
                "prior has {} support lists but {} weight lists",
                self.support.len(),
                self.weights.len()
            )));
        }
        for (i, (s, w)) in self.support.iter().zip(&self.weights).enumerate() {
            if s.is_empty() {
                return Err(Error::ScenarioInvalid(format!(
                    "prior support of agent {} is empty",
                    i + 1
                )));
            }
            if s.len() != w.len() {
                return Err(Error::ScenarioInvalid(format!(
                    "prior of agent {} has {} support points but {} weights",
                    i + 1,
                    s.len(),
                    w.len()
                )));
            }
            for t in s {
                t.validate(&format!("prior support of agent {}", i + 1))?;
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::ScenarioInvalid(format!(
                    "prior weights of agent {} must be nonnegative",
                    i + 1
                )));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::ScenarioInvalid(format!(
                    "prior weights of agent {} sum to {total}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub agents: Vec<AgentSpec>,
    pub coordinator: CoordinatorSpec,
    pub prior: Option<TypePrior>,
}

impl Scenario {
    pub fn new(agents: Vec<AgentSpec>, coordinator: CoordinatorSpec, prior: Option<TypePrior>) -> Result<Self> {
        let scenario = Self {
            agents,
            coordinator,
            prior,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::ScenarioInvalid("scenario needs at least one agent".into()));
        }
        for (k, agent) in self.agents.iter().enumerate() {
            if agent.id != k + 1 {
                return Err(Error::ScenarioInvalid(format!(
                    "agent ids must be 1..={} in order, found id {} at position {}",
                    self.agents.len(),
                    agent.id,
                    k + 1
                )));
            }
            agent.validate()?;
        }
        self.coordinator.validate()?;
        if let Some(prior) = &self.prior {
            prior.validate()?;
            if prior.agents() != self.agents.len() {
                return Err(Error::ScenarioInvalid(format!(
                    "prior covers {} agents, scenario has {}",
                    prior.agents(),
                    self.agents.len()
                )));
            }
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<Theta> {
        self.agents.iter().map(|a| a.theta).collect()
    }

    pub fn bounds(&self) -> Vec<Interval> {
        self.agents.iter().map(|a| a.bounds).collect()
    }

    pub fn total_demand(&self, price: f64) -> f64 {
        self.agents.iter().map(|a| demand(price, a)).sum()
    }

    pub fn max_alpha(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.theta.alpha)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parses and validates a scenario JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScenarioDoc =
            serde_json::from_str(text).map_err(|e| Error::ScenarioInvalid(format!("malformed scenario: {e}")))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioDoc::from(self)).expect("scenario documents always serialize")
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Prices {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl Prices {
    pub fn uniform(&self) -> Option<f64> {
        match self {
            Prices::Uniform(p) => Some(*p),
            Prices::PerAgent(_) => None,
        }
    }
}

/// Allocations, supply, prices and payments. `payments[i]` is money paid TO
/// agent `i`; consumers therefore receive negative payments.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MarketOutcome {
    pub allocations: Vec<f64>,
    pub supply: f64,
    pub prices: Prices,
    pub payments: Vec<f64>,
}

impl MarketOutcome {
    pub fn imbalance(&self) -> f64 {
        self.allocations.iter().sum::<f64>() - self.supply
    }

    pub fn payment_sum(&self) -> f64 {
        self.payments.iter().sum()
    }
}

/// `V(a; θ) = α·a − ½·β·a²`.
pub fn utility_value(a: f64, theta: &Theta) -> f64 {
    theta.alpha * a - 0.5 * theta.beta * a * a
}

pub fn marginal_utility(a: f64, theta: &Theta) -> f64 {
    theta.alpha - theta.beta * a
}

/// Price-taking demand: the maximizer of `V(a) − price·a` over the agent's box.
pub fn demand(price: f64, agent: &AgentSpec) -> f64 {
    demand_for(price, &agent.theta, &agent.bounds)
}

pub fn demand_for(price: f64, theta: &Theta, bounds: &Interval) -> f64 {
    bounds.clamp((theta.alpha - price) / theta.beta)
}

/// Price-taking supply: the maximizer of `price·y − C(y)` over the supply
/// interval. With a linear cost the supplier is indifferent at `price == c1`
/// and picks `y_min`.
pub fn supply(price: f64, coordinator: &CoordinatorSpec) -> Result<f64> {
    let QuadraticCost { c1, c2 } = coordinator.cost;
    let bounds = coordinator.supply_bounds;
    if c2 > 0.0 {
        return Ok(bounds.clamp((price - c1) / c2));
    }
    let y = if price > c1 {
        bounds.hi
    } else if price < c1 || bounds.lo.is_finite() {
        bounds.lo
    } else {
        bounds.hi
    };
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::DegenerateSupply { price, c1 })
    }
}

// ---------------------------------------------------------------------------
// Scenario file format

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: usize,
    pub alpha: f64,
    pub beta: f64,
    pub a_min: f64,
    pub a_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoordinatorDoc {
    pub c1: f64,
    pub c2: f64,
    pub y_min: f64,
    pub y_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficit: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PriorDoc {
    pub support: Vec<Vec<Theta>>,
    pub weights: Vec<Vec<f64>>,
    pub independent: bool,
}

/// Wire form of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub agents: Vec<AgentDoc>,
    pub coordinator: CoordinatorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorDoc>,
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = Error;

    fn try_from(doc: ScenarioDoc) -> Result<Self> {
        let agents = doc
            .agents
            .into_iter()
            .map(|a| AgentSpec {
                id: a.id,
                theta: Theta::new(a.alpha, a.beta),
                bounds: Interval::new(a.a_min, a.a_max),
            })
            .collect();
        let c = doc.coordinator;
        let coordinator = CoordinatorSpec {
            cost: QuadraticCost { c1: c.c1, c2: c.c2 },
            supply_bounds: Interval::new(c.y_min, c.y_max),
            capacity: c.capacity,
            deficit: c.deficit,
        };
        let prior = doc.prior.map(|p| TypePrior {
            support: p.support,
            weights: p.weights,
            independent: p.independent,
        });
        Scenario::new(agents, coordinator, prior)
    }
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        Self {
            agents: s
                .agents
                .iter()
                .map(|a| AgentDoc {
                    id: a.id,
                    alpha: a.theta.alpha,
                    beta: a.theta.beta,
                    a_min: a.bounds.lo,
                    a_max: a.bounds.hi,
                })
                .collect(),
            coordinator: CoordinatorDoc {
                c1: s.coordinator.cost.c1,
                c2: s.coordinator.cost.c2,
                y_min: s.coordinator.supply_bounds.lo,
                y_max: s.coordinator.supply_bounds.hi,
                capacity: s.coordinator.capacity,
                deficit: s.coordinator.deficit,
            },
            prior: s.prior.as_ref().map(|p| PriorDoc {
                support: p.support.clone(),
                weights: p.weights.clone(),
                independent: p.independent,
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Information structure

/// Directed graph over nodes `0..nodes`; node 0 is the coordinator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiGraph {
    pub nodes: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl DiGraph {
    pub fn empty(nodes: usize) -> Self {
        Self {
            nodes,
            edges: BTreeSet::new(),
        }
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indegree = vec![0usize; self.nodes];
        for &(_, to) in &self.edges {
            indegree[to] += 1;
        }
        let mut ready: Vec<usize> = (0..self.nodes).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &(from, to) in self.edges.range((v, 0)..=(v, usize::MAX)) {
                debug_assert_eq!(from, v);
                indegree[to] -= 1;
                if indegree[to] == 0 {
                    ready.push(to);
                }
            }
        }
        seen == self.nodes
    }

    pub fn is_transitively_closed(&self) -> bool {
        self.edges.iter().all(|&(a, b)| {
            self.edges
                .range((b, 0)..=(b, usize::MAX))
                .all(|&(_, c)| a == c || self.has_edge(a, c))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationStructure {
    pub type_graph: DiGraph,
    pub decision_graph: DiGraph,
    pub stages: Vec<Vec<usize>>,
}

impl InformationStructure {
    pub fn new(knowledge: &[Vec<bool>], stages: Vec<Vec<usize>>) -> Result<Self> {
        let type_graph = build_type_graph(knowledge)?;
        let decision_graph = build_decision_graph(&stages)?;
        if type_graph.nodes != decision_graph.nodes {
            return Err(Error::InvalidInput(format!(
                "knowledge matrix covers {} nodes but stages cover {}",
                type_graph.nodes, decision_graph.nodes
            )));
        }
        Ok(Self {
            type_graph,
            decision_graph,
            stages,
        })
    }
}

/// `knowledge[i][j]` is true when agent `i` knows `θ_j`; that draws the edge
/// `j → i`.
pub fn build_type_graph(knowledge: &[Vec<bool>]) -> Result<DiGraph> {
    let n = knowledge.len();
    if n == 0 || knowledge.iter().any(|row| row.len() != n) {
        return Err(Error::BadDimensions {
            expected: n,
            rows: n,
            cols: knowledge.iter().map(Vec::len).collect(),
        });
    }
    for (i, row) in knowledge.iter().enumerate().skip(1) {
        if !row[i] {
            return Err(Error::InvalidInput(format!("agent {i} must know its own type")));
        }
    }
    let mut graph = DiGraph::empty(n);
    for (i, row) in knowledge.iter().enumerate() {
        for (j, &known) in row.iter().enumerate() {
            if known && i != j {
                graph.edges.insert((j, i));
            }
        }
    }
    Ok(graph)
}

/// Draws `j → i` whenever `i` moves in a later stage than `j`.
pub fn build_decision_graph(stages: &[Vec<usize>]) -> Result<DiGraph> {
    let nodes: usize = stages.iter().map(Vec::len).sum();
    if nodes == 0 {
        return Err(Error::NotAPartition {
            max_node: 0,
            reason: "no nodes".into(),
        });
    }
    let max_node = nodes - 1;
    let mut stage_of = vec![None; nodes];
    for (s, members) in stages.iter().enumerate() {
        for &v in members {
            if v >= nodes {
                return Err(Error::NotAPartition {
                    max_node,
                    reason: format!("node {v} out of range"),
                });
            }
            if stage_of[v].is_some() {
                return Err(Error::NotAPartition {
                    max_node,
                    reason: format!("node {v} appears twice"),
                });
            }
            stage_of[v] = Some(s);
        }
    }
    // Counting guarantees every slot is filled once duplicates are excluded.
    let stage_of: Vec<usize> = stage_of
        .into_iter()
        .map(|s| s.expect("partition covers all nodes"))
        .collect();
    let mut graph = DiGraph::empty(nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            if stage_of[i] > stage_of[j] {
                graph.edges.insert((j, i));
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(alpha: f64, beta: f64, lo: f64, hi: f64) -> AgentSpec {
        AgentSpec::new(1, Theta::new(alpha, beta), Interval::new(lo, hi)).unwrap()
    }

    fn coordinator(c1: f64, c2: f64, lo: f64, hi: f64) -> CoordinatorSpec {
        CoordinatorSpec {
            cost: QuadraticCost { c1, c2 },
            supply_bounds: Interval::new(lo, hi),
            capacity: None,
            deficit: None,
        }
    }

    #[test]
    fn utility_examples() {
        let theta = Theta::new(10.0, 1.0);
        assert_eq!(utility_value(0.0, &theta), 0.0);
        assert_eq!(utility_value(4.0, &theta), 32.0);
        let peak = theta.alpha / theta.beta;
        assert_eq!(peak, 10.0);
        assert_eq!(utility_value(peak, &theta), 50.0);
    }

    #[test]
    fn demand_matches_grid_search() {
        let a = agent(10.0, 1.0, 0.0, 10.0);
        let theta = a.theta;
        let best = (0..=10_000)
            .map(|k| k as f64 * 1e-3)
            .max_by(|x, y| {
                let fx = utility_value(*x, &theta) - 6.0 * x;
                let fy = utility_value(*y, &theta) - 6.0 * y;
                fx.partial_cmp(&fy).unwrap()
            })
            .unwrap();
        assert!((best - 4.0).abs() <= 1e-3);
        assert_eq!(demand(6.0, &a), 4.0);
    }

    #[test]
    fn demand_clamps() {
        assert_eq!(demand(12.0, &agent(10.0, 1.0, 0.0, 10.0)), 0.0);
        assert_eq!(demand(10.0, &agent(10.0, 1.0, 0.0, 10.0)), 0.0);
        assert_eq!(demand(0.0, &agent(10.0, 1.0, 0.0, 4.0)), 4.0);
    }

    #[test]
    fn supply_examples() {
        let c = coordinator(0.0, 1.0, 0.0, 100.0);
        let grid_best = (0..=100_000)
            .map(|k| k as f64 * 1e-3)
            .max_by(|x, y| (6.0 * x - 0.5 * x * x).partial_cmp(&(6.0 * y - 0.5 * y * y)).unwrap())
            .unwrap();
        assert!((grid_best - 6.0).abs() <= 1e-3);
        assert_eq!(supply(6.0, &c).unwrap(), 6.0);
        assert_eq!(supply(2.5, &coordinator(2.5, 3.0, 0.0, 100.0)).unwrap(), 0.0);
        assert_eq!(supply(20.0, &coordinator(0.0, 1.0, 0.0, 10.0)).unwrap(), 10.0);
    }

    #[test]
    fn linear_cost_supply() {
        let unbounded = coordinator(2.0, 0.0, 0.0, f64::INFINITY);
        assert!(matches!(supply(3.0, &unbounded), Err(Error::DegenerateSupply { .. })));
        assert_eq!(supply(1.0, &unbounded).unwrap(), 0.0);
        assert_eq!(supply(2.0, &unbounded).unwrap(), 0.0);
        let bounded = coordinator(2.0, 0.0, 1.0, 7.0);
        assert_eq!(supply(3.0, &bounded).unwrap(), 7.0);
        assert_eq!(supply(2.0, &bounded).unwrap(), 1.0);
    }

    #[test]
    fn agent_validation() {
        assert!(AgentSpec::new(1, Theta::new(1.0, 0.0), Interval::new(0.0, 1.0)).is_err());
        assert!(AgentSpec::new(1, Theta::new(1.0, 1.0), Interval::new(2.0, 1.0)).is_err());
        assert!(AgentSpec::new(1, Theta::new(1.0, 1.0), Interval::new(-1.0, 1.0)).is_err());
        assert!(AgentSpec::new(1, Theta::new(f64::NAN, 1.0), Interval::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn scenario_rejects_bad_ids_and_empty() {
        let c = coordinator(0.0, 1.0, 0.0, 10.0);
        assert!(Scenario::new(vec![], c.clone(), None).is_err());
        let mut a = agent(1.0, 1.0, 0.0, 1.0);
        a.id = 2;
        assert!(Scenario::new(vec![a], c, None).is_err());
    }

    #[test]
    fn prior_weights_must_sum_to_one() {
        let t = Theta::new(1.0, 1.0);
        assert!(TypePrior::new(vec![vec![t, t]], vec![vec![0.5, 0.4]], true).is_err());
        assert!(TypePrior::new(vec![vec![t, t]], vec![vec![0.5, 0.5]], true).is_ok());
        assert!(TypePrior::new(vec![vec![]], vec![vec![]], true).is_err());
        assert!(TypePrior::new(vec![vec![t, t]], vec![vec![1.5, -0.5]], true).is_err());
    }

    #[test]
    fn scenario_json_rejects_unknown_keys() {
        let text = r#"{"agents":[{"id":1,"alpha":10,"beta":1,"a_min":0,"a_max":10,"color":"red"}],
            "coordinator":{"c1":0,"c2":1,"y_min":0,"y_max":100}}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::ScenarioInvalid(_))));
        let text = r#"{"agents":[{"id":1,"alpha":10,"beta":1,"a_min":0,"a_max":10}],
            "coordinator":{"c1":0,"c2":1,"y_min":0,"y_max":100},"extra":1}"#;
        assert!(Scenario::from_json(text).is_err());
    }

    #[test]
    fn scenario_json_parses_prior() {
        let text = r#"{"agents":[{"id":1,"alpha":10,"beta":1,"a_min":0,"a_max":10},
                                 {"id":2,"alpha":8,"beta":1,"a_min":0,"a_max":10}],
            "coordinator":{"c1":0,"c2":1,"y_min":0,"y_max":100,"capacity":4},
            "prior":{"support":[[{"alpha":5,"beta":1},{"alpha":15,"beta":1}],[{"alpha":8,"beta":1}]],
                     "weights":[[0.5,0.5],[1.0]],"independent":true}}"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.coordinator.capacity, Some(4.0));
        assert_eq!(s.prior.as_ref().unwrap().support[0].len(), 2);
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn type_graph_examples() {
        // Coordinator knows everyone; agents know themselves.
        let n = 3;
        let full: Vec<Vec<bool>> = (0..=n).map(|i| (0..=n).map(|j| i == 0 || i == j).collect()).collect();
        let g = build_type_graph(&full).unwrap();
        let expected: BTreeSet<_> = (1..=n).map(|j| (j, 0)).collect();
        assert_eq!(g.edges, expected);

        let private: Vec<Vec<bool>> = (0..=n).map(|i| (0..=n).map(|j| i == j).collect()).collect();
        assert!(build_type_graph(&private).unwrap().edges.is_empty());

        let single = vec![vec![false, false], vec![false, true]];
        assert!(build_type_graph(&single).unwrap().edges.is_empty());
    }

    #[test]
    fn type_graph_rejects_non_square() {
        let bad = vec![vec![true, false], vec![true]];
        assert!(matches!(build_type_graph(&bad), Err(Error::BadDimensions { .. })));
    }

    #[test]
    fn decision_graph_examples() {
        let g = build_decision_graph(&[vec![0], vec![1, 2, 3]]).unwrap();
        let expected: BTreeSet<_> = (1..=3).map(|i| (0, i)).collect();
        assert_eq!(g.edges, expected);

        assert!(build_decision_graph(&[vec![0, 1, 2]]).unwrap().edges.is_empty());

        let g = build_decision_graph(&[vec![0], vec![1], vec![2]]).unwrap();
        let expected: BTreeSet<_> = [(0, 1), (0, 2), (1, 2)].into_iter().collect();
        assert_eq!(g.edges, expected);
    }

    #[test]
    fn decision_graph_rejects_non_partitions() {
        assert!(matches!(
            build_decision_graph(&[vec![0, 1], vec![1]]),
            Err(Error::NotAPartition { .. })
        ));
        assert!(matches!(
            build_decision_graph(&[vec![0], vec![2]]),
            Err(Error::NotAPartition { .. })
        ));
    }
}
