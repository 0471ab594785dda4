//! Market-based coordination of distributed energy resources.
//!
//! Every solver works over one scenario model: `N` resource agents with
//! quadratic utilities `V(a; θ) = α·a − ½·β·a²` and a coordinator with
//! convex quadratic supply cost `C(y) = c1·y + ½·c2·y²`. On top of that model
//! the crate provides four families of coordination:
//!
//! - [`welfare`]: competitive equilibrium by price auction or primal-dual
//!   price iteration, plus equilibrium verification.
//! - [`games`]: finite-game solution concepts and the supply-function
//!   bidding game.
//! - [`stackelberg`]: price-setting leader problems and linear incentive
//!   pricing for the reverse game.
//! - [`mechanisms`]: VCG, dAGVA and SSVCG mechanisms together with
//!   exhaustive incentive, budget and participation checkers.
//!
//! All operations are pure functions over immutable values.

pub mod corpus;
pub mod error;
pub mod games;
pub mod mechanisms;
pub mod model;
pub mod roots;
pub mod stackelberg;
pub mod welfare;

pub use error::{Error, Result};
pub use model::{
    AgentSpec, CoordinatorSpec, Interval, MarketOutcome, Prices, QuadraticCost, Scenario, Theta, TypePrior,
};
