//! Lane-choice equilibria of mixed selfish and altruistic traffic at a
//! two-lane highway on-ramp.
//!
//! The core types are generic over the [`Scalar`] type (`f32` or `f64`);
//! the `*64` aliases below fix it to `f64`, which the CLI and the
//! tolerances quoted throughout the docs assume.

// `!(x > 0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod equilibrium;
pub mod error;
mod grid;
pub mod model;
pub mod oracle;
pub mod robustness;
mod scalar;
pub mod sweep;

pub use analysis::{
    analyze, classify, AnalysisSummary, Classification, ErrorInterval, Membership, NotInGReason,
};
pub use equilibrium::{solve_equilibrium, CaseLabel, EquilibriumResult};
pub use error::{Error, Result};
pub use model::{CostCoefficients, DerivedCoefficients, FlowDistribution, OnRamp, OnRampConfig};

pub use robustness::{optimal_altruism_level, price_of_anarchy, RobustnessSummary};
pub use scalar::Scalar;

pub type OnRamp64 = OnRamp<f64>;
pub type OnRamp32 = OnRamp<f32>;
pub type OnRampConfig64 = OnRampConfig<f64>;
pub type OnRampConfig32 = OnRampConfig<f32>;
pub type CostCoefficients64 = CostCoefficients<f64>;
pub type CostCoefficients32 = CostCoefficients<f32>;
pub type FlowDistribution64 = FlowDistribution<f64>;
pub type AnalysisSummary64 = AnalysisSummary<f64>;
pub type ErrorInterval64 = ErrorInterval<f64>;
pub type EquilibriumResult64 = EquilibriumResult<f64>;
pub type RobustnessSummary64 = RobustnessSummary<f64>;
