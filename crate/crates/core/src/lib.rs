//! Pricing engine for finite-horizon Bertrand-Edgeworth competition among
//! unit-capacity sellers of a perishable good.
//!
//! Each of `N` sellers holds one unit and posts a price each period until the
//! horizon runs out. Buyers arrive randomly, pay at most a common reservation
//! price `p̄`, and always buy from the cheapest sellers. The crate computes
//!
//! * option values `V(p̄, n, t)` and seller reservation prices `P*_{n,t}`
//!   by backward induction ([`valuation`]),
//! * equilibrium strategies for the four model variants — pure prices under
//!   Bernoulli demand, mixed-strategy CDFs under general demand
//!   ([`equilibrium`]),
//! * independent verification of those strategies via an exact
//!   deviation-payoff oracle and a seeded Monte Carlo market simulator
//!   ([`verification`], [`simulation`]).
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases live at the crate root.

pub mod config;
pub mod demand;
pub mod equilibrium;
pub mod real;
pub mod simulation;
pub mod valuation;
pub mod verification;

pub use real::Real;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate demand: {0}")]
    DegenerateDemand(String),
    #[error("wrong model variant: {0}")]
    WrongVariant(String),
    #[error("equilibrium conditions violated: {0}")]
    ConditionsViolated(String),
    #[error("no fixed point: {0}")]
    NoFixedPoint(String),
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// `f64` aliases for the generic core types.
pub type Demand = demand::DemandModel<f64>;
pub type Params = valuation::MarketParams<f64>;
pub type Values = valuation::ValueTable<f64>;
pub type Strategy = equilibrium::MixedStrategyCdf<f64>;
pub type Profile = equilibrium::StrategyProfile<f64>;
pub type Profiles = equilibrium::ProfileFamily<f64>;
