use thiserror::Error;

use crate::welfare::ConvergenceTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("supply is unbounded: linear cost with price {price} != c1 {c1} and an unbounded supply interval")]
    DegenerateSupply { price: f64, c1: f64 },

    #[error("matrix must be {expected}x{expected}, found {rows} rows (row lengths {cols:?})")]
    BadDimensions {
        expected: usize,
        rows: usize,
        cols: Vec<usize>,
    },

    #[error("stages are not a partition of 0..={max_node}: {reason}")]
    NotAPartition { max_node: usize, reason: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        trace: Option<Box<ConvergenceTrace>>,
    },

    #[error("game has no pure-strategy Nash equilibrium")]
    NoPureNash,

    #[error("type index {index} is outside the support of player {player} (size {size})")]
    TypeOffSupport { player: usize, index: usize, size: usize },

    #[error("bid sum must be positive, found {0}")]
    ZeroBidSum(f64),

    #[error("supply-function game needs at least {required} bidders, found {bidders}")]
    TooFewBidders { bidders: usize, required: usize },

    #[error("capacity {capacity} is below the minimum total demand {min_demand}")]
    InfeasibleCapacity { capacity: f64, min_demand: f64 },

    #[error("team problem is unbounded: {0}")]
    UnboundedTeam(String),

    #[error("allocation gradient of the agent payoff vanishes at the team point ({allocation}, {price})")]
    GradientDegenerate { allocation: f64, price: f64 },

    #[error("not incentive-controllable: {0}")]
    NotIncentiveControllable(String),

    #[error("mechanism requires a type prior")]
    PriorRequired,

    #[error("mechanism requires at least two agents, found {0}")]
    NeedTwoAgents(usize),
}

impl Error {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ScenarioInvalid(_) => "ScenarioInvalid",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DegenerateSupply { .. } => "DegenerateSupply",
            Error::BadDimensions { .. } => "BadDimensions",
            Error::NotAPartition { .. } => "NotAPartition",
            Error::Infeasible(_) => "Infeasible",
            Error::NotConverged { .. } => "NotConverged",
            Error::NoPureNash => "NoPureNash",
            Error::TypeOffSupport { .. } => "TypeOffSupport",
            Error::ZeroBidSum(_) => "ZeroBidSum",
            Error::TooFewBidders { .. } => "TooFewBidders",
            Error::InfeasibleCapacity { .. } => "InfeasibleCapacity",
            Error::UnboundedTeam(_) => "UnboundedTeam",
            Error::GradientDegenerate { .. } => "GradientDegenerate",
            Error::NotIncentiveControllable(_) => "NotIncentiveControllable",
            Error::PriorRequired => "PriorRequired",
            Error::NeedTwoAgents(_) => "NeedTwoAgents",
        }
    }

    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
