//! Shapley allocation of model outputs and model risk.
//!
//! `SH_i(v) = Σ_{S⊆M∖i} |S|!(m−|S|−1)!/m! · (v(S∪i) − v(S))`, applied to the
//! baseline-substitution characteristic functions in [`game`]. `v(∅)` is
//! evaluated literally (a tail measure of a constant portfolio need not be
//! zero); Shapley values depend only on differences of `v`, so the
//! attributions always sum to `v(M) − v(∅)`.

mod coalition;
mod euler;
mod exact;
pub mod game;
mod report;
mod sampled;

use thiserror::Error;

pub use coalition::{subsets_excluding, Coalition};
pub use euler::{euler_allocation, euler_allocation_for_model, EulerAllocation};
pub use exact::{
    characteristic_table, shapley_exact, shapley_exact_with_limit, shapley_from_table, shapley_weights,
    DEFAULT_MAX_PLAYERS,
};
pub use game::{
    BaselineGame, CharacteristicGame, CooperativeGame, GameError, GaussianRiskGame, SampleRiskGame, TableGame,
};
pub use report::{AttributionReport, Method};
pub use sampled::{permutation_for, shapley_sampled};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapleyError {
    #[error("{players} players exceeds the exact-enumeration limit of {limit}; use sampled Shapley instead")]
    TooManyPlayers { players: usize, limit: usize },
    #[error("sampled Shapley needs at least 2 permutations, got {0}")]
    TooFewPermutations(usize),
    #[error("game has no players")]
    NoPlayers,
    #[error("Euler allocation requires a linear portfolio, got a {0} model")]
    NonLinearModel(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Game(#[from] GameError),
}
