//! Shapley attribution of model outputs and of model risk.
//!
//! A model `f` maps features `X` to an outcome. The crate attributes either a
//! single prediction `f(x̄) − f(x′)` or a risk figure `ρ(f(X)) − ρ(f(x′))`
//! to the features by Shapley values of a baseline-substitution game, and
//! ships the supporting pieces: risk estimators, model inference, CSV
//! ingestion, axiom checks, a minimum-CVaR optimizer and a CLI.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` case.

pub mod axioms;
pub mod cli;
pub mod data_io;
pub mod linalg;
pub mod models;
pub mod portfolio_opt;
pub mod risk_measures;
pub mod scalar;
pub mod shapley;
pub mod synthetic;

pub use axioms::{check_completeness, check_dummy, check_monotonicity, check_subadditivity_bound, check_symmetry};
pub use data_io::{load_csv, ScenarioMatrix};
pub use models::ModelSpec;
pub use portfolio_opt::{grid_oracle, min_cvar_weights};
pub use risk_measures::{RiskKind, RiskMeasureSpec};
pub use scalar::Scalar;
pub use shapley::{euler_allocation, shapley_exact, shapley_sampled, AttributionReport, CharacteristicGame};

pub type ScenarioMatrix64 = data_io::ScenarioMatrix<f64>;
pub type ScenarioMatrix32 = data_io::ScenarioMatrix<f32>;
pub type Model64 = models::ModelSpec<f64>;
pub type Model32 = models::ModelSpec<f32>;
pub type RiskSpec64 = risk_measures::RiskMeasureSpec<f64>;
pub type RiskSpec32 = risk_measures::RiskMeasureSpec<f32>;
pub type Report64 = shapley::AttributionReport<f64>;
pub type Report32 = shapley::AttributionReport<f32>;
pub type Game64 = shapley::CharacteristicGame<f64>;
pub type Game32 = shapley::CharacteristicGame<f32>;
pub type SampleRiskGame64 = shapley::SampleRiskGame<f64>;
pub type GaussianRiskGame64 = shapley::GaussianRiskGame<f64>;
pub type BaselineGame64 = shapley::BaselineGame<f64>;
