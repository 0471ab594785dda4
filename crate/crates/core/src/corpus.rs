//! Deterministic pseudo-random scenario generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentSpec, CoordinatorSpec, Interval, QuadraticCost, Scenario, Theta, TypePrior};

/// Shape of the generated scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub min_agents: usize,
    pub max_agents: usize,
    /// Adds `D = 0.6·Σ α_i/β_i`.
    pub capacity: bool,
    /// Adds a load-shedding deficit `d ∈ [1, 10]`.
    pub deficit: bool,
    /// Adds a uniform prior on `{α/2, 3α/2}` at the agent's β.
    pub prior: bool,
}

impl Default for CorpusParams {
    fn default() -> Self {
        Self {
            min_agents: 2,
            max_agents: 3,
            capacity: true,
            deficit: false,
            prior: false,
        }
    }
}

impl CorpusParams {
    /// Instances for the supply-function game (3 to 4 bidders with a deficit).
    pub fn supply_game() -> Self {
        Self {
            min_agents: 3,
            max_agents: 4,
            capacity: false,
            deficit: true,
            prior: false,
        }
    }

    /// Capacity-constrained instances with a two-point prior.
    pub fn mechanism() -> Self {
        Self {
            prior: true,
            ..Self::default()
        }
    }
}

/// `count` scenarios drawn from a ChaCha8 stream seeded with `seed`.
pub fn generate_corpus(seed: u64, count: usize, params: &CorpusParams) -> Result<Vec<Scenario>> {
    if count == 0 {
        return Err(Error::InvalidInput("corpus count must be at least 1".into()));
    }
    if params.min_agents == 0 || params.min_agents > params.max_agents {
        return Err(Error::InvalidInput(format!(
            "agent range [{}, {}] is empty",
            params.min_agents, params.max_agents
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw(&mut rng, params)).collect()
}

fn draw(rng: &mut ChaCha8Rng, params: &CorpusParams) -> Result<Scenario> {
    let n = rng.gen_range(params.min_agents..=params.max_agents);
    let mut agents = Vec::with_capacity(n);
    for id in 1..=n {
        let theta = Theta::new(rng.gen_range(4.0..=16.0), rng.gen_range(0.5..=2.0));
        let bounds = Interval::new(0.0, 2.0 * theta.alpha / theta.beta);
        agents.push(AgentSpec::new(id, theta, bounds)?);
    }
    let c2 = rng.gen_range(0.5..=2.0);
    let y_max: f64 = agents.iter().map(|a| a.bounds.hi).sum();
    let capacity = params
        .capacity
        .then(|| 0.6 * agents.iter().map(|a| a.theta.alpha / a.theta.beta).sum::<f64>());
    let deficit = params.deficit.then(|| rng.gen_range(1.0..=10.0));
    let prior = if params.prior {
        Some(TypePrior::uniform(
            agents
                .iter()
                .map(|a| {
                    vec![
                        Theta::new(0.5 * a.theta.alpha, a.theta.beta),
                        Theta::new(1.5 * a.theta.alpha, a.theta.beta),
                    ]
                })
                .collect(),
        )?)
    } else {
        None
    };
    let coordinator = CoordinatorSpec {
        cost: QuadraticCost { c1: 0.0, c2 },
        supply_bounds: Interval::new(0.0, y_max),
        capacity,
        deficit,
    };
    Scenario::new(agents, coordinator, prior)
}
