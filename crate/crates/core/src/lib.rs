//! Two-orchard SAIR–SI model of citrus greening (Huanglongbing) with one-way
//! dispersal of the Asian citrus psyllid vector between orchards.
//!
//! The crate covers:
//!
//! - [`model`]: parameters, controls, the twelve-dimensional vector field,
//!   disease-free equilibrium and initial conditions;
//! - [`integrator`]: fixed-step RK4 trajectories and epidemic summaries;
//! - [`reproduction`]: next-generation matrix, local and global basic
//!   reproduction numbers (spectral and closed form);
//! - [`sensitivity`]: Latin hypercube sampling and partial rank correlation;
//! - [`analytics`]: cost functionals, cumulative-infection identities,
//!   final-size effectiveness and the optimization objective;
//! - [`ga`]: genetic algorithm over the four control knobs of a strategy.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix it to `f64`, which is what the sensitivity analysis and
//! the optimizer use.

// `!(x >= 0)` style checks are there to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod ga;
pub mod integrator;
pub mod model;
pub mod reproduction;
pub mod scalar;
pub mod sensitivity;

pub use error::{Error, Result};
pub use model::{Orchard, SeedPolicy, StrategyKind};
pub use scalar::Scalar;

pub type OrchardParams = model::OrchardParams<f64>;
pub type ControlSet = model::ControlSet<f64>;
pub type EffectiveRates = model::EffectiveRates<f64>;
pub type SystemState = model::SystemState<f64>;
pub type Scenario = model::Scenario<f64>;
pub type Trajectory = integrator::Trajectory<f64>;
pub type EpidemicSummary = integrator::EpidemicSummary<f64>;
pub type IntegratorOptions = integrator::IntegratorOptions<f64>;
pub type DerivedQuantities = reproduction::DerivedQuantities<f64>;
pub type NgmMatrices = reproduction::NgmMatrices<f64>;
pub type CharPolyCoeffs = reproduction::CharPolyCoeffs<f64>;
pub type CostWeights = analytics::CostWeights<f64>;
pub type AnalyticConstants = analytics::AnalyticConstants<f64>;

/// Single-precision aliases.
pub type Scenario32 = model::Scenario<f32>;
pub type Trajectory32 = integrator::Trajectory<f32>;
