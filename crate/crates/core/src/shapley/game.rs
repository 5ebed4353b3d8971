//! Characteristic functions.
//!
//! Every game substitutes baseline constants for the features outside the
//! coalition. [`BaselineGame`] applies the model to a single explicand,
//! [`SampleRiskGame`] applies a sample risk measure to the model outputs over
//! a scenario set, and [`GaussianRiskGame`] evaluates the StdDev/Variance of
//! a linear portfolio in closed form from a covariance matrix.

use thiserror::Error;

use super::Coalition;
use crate::data_io::ScenarioMatrix;
use crate::linalg;
use crate::models::{ModelError, ModelSpec};
use crate::risk_measures::{RiskError, RiskKind, RiskMeasureSpec};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("model failed for coalition {coalition:?} at scenario {scenario}: {source}")]
    Model {
        coalition: Vec<usize>,
        scenario: usize,
        #[source]
        source: ModelError,
    },
    #[error("risk measure failed for coalition {coalition:?}: {source}")]
    Risk {
        coalition: Vec<usize>,
        #[source]
        source: RiskError,
    },
    #[error("invalid game: {0}")]
    Invalid(String),
}

/// A transferable-utility game over `players()` features.
pub trait CooperativeGame<T: Scalar>: Sync {
    fn players(&self) -> usize;

    fn value(&self, coalition: &Coalition) -> Result<T, GameError>;
}

impl<T: Scalar, G: CooperativeGame<T> + ?Sized> CooperativeGame<T> for &G {
    fn players(&self) -> usize {
        (**self).players()
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        (**self).value(coalition)
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<(), GameError> {
    if got != want {
        return Err(GameError::Invalid(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

fn check_finite<T: Scalar>(what: &str, v: &[T]) -> Result<(), GameError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(GameError::Invalid(format!("{what}[{i}] is not finite"))),
        None => Ok(()),
    }
}

fn substitute<T: Scalar>(out: &mut [T], actual: &[T], baseline: &[T], coalition: &Coalition) {
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = if coalition.contains(j) {
            actual[j]
        } else {
            baseline[j]
        };
    }
}

/// `v_B(S) = f(x̄_S; x'_{M∖S})`.
#[derive(Debug, Clone)]
pub struct BaselineGame<T> {
    model: ModelSpec<T>,
    explicand: Vec<T>,
    baseline: Vec<T>,
}

impl<T: Scalar> BaselineGame<T> {
    pub fn new(model: ModelSpec<T>, explicand: Vec<T>, baseline: Vec<T>) -> Result<Self, GameError> {
        let m = model.feature_count();
        check_len("explicand", explicand.len(), m)?;
        check_len("baseline", baseline.len(), m)?;
        check_finite("explicand", &explicand)?;
        check_finite("baseline", &baseline)?;
        Ok(Self {
            model,
            explicand,
            baseline,
        })
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }
}

impl<T: Scalar> CooperativeGame<T> for BaselineGame<T> {
    fn players(&self) -> usize {
        self.baseline.len()
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        let mut x = vec![T::zero(); self.players()];
        substitute(&mut x, &self.explicand, &self.baseline, coalition);
        self.model.evaluate(&x).map_err(|source| GameError::Model {
            coalition: coalition.members(),
            scenario: 0,
            source,
        })
    }
}

/// `v_R(S) = ρ̂({f((x_S)_i; x'_{M∖S})}_{i=1..n})`.
#[derive(Debug, Clone)]
pub struct SampleRiskGame<T> {
    model: ModelSpec<T>,
    scenarios: ScenarioMatrix<T>,
    baseline: Vec<T>,
    risk: RiskMeasureSpec<T>,
}

impl<T: Scalar> SampleRiskGame<T> {
    pub fn new(
        model: ModelSpec<T>,
        scenarios: ScenarioMatrix<T>,
        baseline: Vec<T>,
        risk: RiskMeasureSpec<T>,
    ) -> Result<Self, GameError> {
        let m = model.feature_count();
        check_len("scenario matrix width", scenarios.n_cols(), m)?;
        check_len("baseline", baseline.len(), m)?;
        check_finite("baseline", &baseline)?;
        risk.validate().map_err(|source| GameError::Risk {
            coalition: vec![],
            source,
        })?;
        Ok(Self {
            model,
            scenarios,
            baseline,
            risk,
        })
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }

    pub fn scenarios(&self) -> &ScenarioMatrix<T> {
        &self.scenarios
    }

    pub fn baseline(&self) -> &[T] {
        &self.baseline
    }

    pub fn risk(&self) -> &RiskMeasureSpec<T> {
        &self.risk
    }

    /// Model outputs per scenario with out-of-coalition features at baseline.
    pub fn outcomes(&self, coalition: &Coalition) -> Result<Vec<T>, GameError> {
        let mut x = vec![T::zero(); self.baseline.len()];
        self.scenarios
            .rows()
            .enumerate()
            .map(|(i, row)| {
                substitute(&mut x, row, &self.baseline, coalition);
                self.model.evaluate(&x).map_err(|source| GameError::Model {
                    coalition: coalition.members(),
                    scenario: i,
                    source,
                })
            })
            .collect()
    }
}

impl<T: Scalar> CooperativeGame<T> for SampleRiskGame<T> {
    fn players(&self) -> usize {
        self.baseline.len()
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        let y = self.outcomes(coalition)?;
        self.risk.evaluate(&y).map_err(|source| GameError::Risk {
            coalition: coalition.members(),
            source,
        })
    }
}

/// `v_R(S) = g(Σ_{i,j∈S} c_i c_j Σ_ij)`, `g = sqrt` (StdDev) or identity
/// (Variance): the population risk of a linear portfolio of jointly
/// distributed features with the absent ones frozen at a constant.
#[derive(Debug, Clone)]
pub struct GaussianRiskGame<T> {
    covariance: Vec<T>,
    weights: Vec<T>,
    kind: RiskKind,
}

impl<T: Scalar> GaussianRiskGame<T> {
    /// PSD tolerance applied to the covariance matrix.
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(covariance: Vec<T>, weights: Vec<T>, kind: RiskKind) -> Result<Self, GameError> {
        let m = weights.len();
        if m == 0 {
            return Err(GameError::Invalid("no features".into()));
        }
        check_len("covariance", covariance.len(), m * m)?;
        check_finite("covariance", &covariance)?;
        check_finite("weights", &weights)?;
        if !matches!(kind, RiskKind::StdDev | RiskKind::Variance) {
            return Err(GameError::Invalid(format!(
                "analytic Gaussian game supports StdDev and Variance, not {kind}"
            )));
        }
        let scale = covariance.iter().fold(T::one(), |a, v| a.max(v.abs()));
        let tol = T::lit(Self::PSD_TOL) * scale;
        if linalg::asymmetry(&covariance, m) > tol {
            return Err(GameError::Invalid("covariance matrix is not symmetric".into()));
        }
        if let Some(i) = (0..m).find(|&i| covariance[i * m + i] < T::zero()) {
            return Err(GameError::Invalid(format!("covariance diagonal {i} is negative")));
        }
        if let Err(j) = linalg::semidefinite_cholesky(&covariance, m, tol) {
            return Err(GameError::Invalid(format!(
                "covariance matrix is not positive semidefinite (column {j})"
            )));
        }
        Ok(Self {
            covariance,
            weights,
            kind,
        })
    }

    /// Builds `Σ = D R D` from per-feature volatilities and correlations.
    pub fn from_correlation(
        sigmas: &[T],
        correlation: &[T],
        weights: Vec<T>,
        kind: RiskKind,
    ) -> Result<Self, GameError> {
        check_len("correlation", correlation.len(), sigmas.len() * sigmas.len())?;
        Self::new(
            linalg::covariance_from_correlation(sigmas, correlation),
            weights,
            kind,
        )
    }

    pub fn covariance(&self) -> &[T] {
        &self.covariance
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn kind(&self) -> RiskKind {
        self.kind
    }
}

impl<T: Scalar> CooperativeGame<T> for GaussianRiskGame<T> {
    fn players(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        let m = self.players();
        let members = coalition.members();
        let mut q = T::zero();
        for &i in &members {
            for &j in &members {
                q += self.weights[i] * self.weights[j] * self.covariance[i * m + j];
            }
        }
        // round-off can push a rank-deficient form slightly below zero
        let q = q.max(T::zero());
        Ok(match self.kind {
            RiskKind::StdDev => q.sqrt(),
            _ => q,
        })
    }
}

/// A game given by its full table of `2^m` values, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct TableGame<T> {
    players: usize,
    values: Vec<T>,
}

impl<T: Scalar> TableGame<T> {
    pub fn new(players: usize, values: Vec<T>) -> Result<Self, GameError> {
        if players > 30 {
            return Err(GameError::Invalid("table games are limited to 30 players".into()));
        }
        check_len("value table", values.len(), 1 << players)?;
        Ok(Self { players, values })
    }

    pub fn from_fn(players: usize, f: impl Fn(u64) -> T) -> Result<Self, GameError> {
        Self::new(players, (0..1u64 << players).map(f).collect())
    }
}

impl<T: Scalar> CooperativeGame<T> for TableGame<T> {
    fn players(&self) -> usize {
        self.players
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        let mask = coalition
            .members()
            .iter()
            .fold(0usize, |acc, &i| acc | (1 << i));
        Ok(self.values[mask])
    }
}

/// Any of the three characteristic functions.
#[derive(Debug, Clone)]
pub enum CharacteristicGame<T> {
    /// Single-prediction baseline attribution.
    Bam(BaselineGame<T>),
    /// Sample risk attribution over scenarios.
    Sram(SampleRiskGame<T>),
    /// Closed-form risk of a linear portfolio.
    GaussianAnalytic(GaussianRiskGame<T>),
}

impl<T: Scalar> CharacteristicGame<T> {
    pub fn mode(&self) -> &'static str {
        match self {
            CharacteristicGame::Bam(_) => "bam",
            CharacteristicGame::Sram(_) => "sram",
            CharacteristicGame::GaussianAnalytic(_) => "gaussian_analytic",
        }
    }

    /// Linear weights and measure when the game is a linear-portfolio risk
    /// game, the setting of the sub-additivity bound.
    pub fn linear_risk_setting(&self) -> Option<(&[T], RiskMeasureSpec<T>)> {
        match self {
            CharacteristicGame::Sram(g) => g.model().linear_weights().map(|w| (w, *g.risk())),
            CharacteristicGame::GaussianAnalytic(g) => {
                let spec = match g.kind() {
                    RiskKind::StdDev => RiskMeasureSpec::std_dev(),
                    _ => RiskMeasureSpec::variance(),
                };
                Some((g.weights(), spec))
            }
            CharacteristicGame::Bam(_) => None,
        }
    }
}

impl<T: Scalar> CooperativeGame<T> for CharacteristicGame<T> {
    fn players(&self) -> usize {
        match self {
            CharacteristicGame::Bam(g) => g.players(),
            CharacteristicGame::Sram(g) => g.players(),
            CharacteristicGame::GaussianAnalytic(g) => g.players(),
        }
    }

    fn value(&self, coalition: &Coalition) -> Result<T, GameError> {
        match self {
            CharacteristicGame::Bam(g) => g.value(coalition),
            CharacteristicGame::Sram(g) => g.value(coalition),
            CharacteristicGame::GaussianAnalytic(g) => g.value(coalition),
        }
    }
}

impl<T> From<BaselineGame<T>> for CharacteristicGame<T> {
    fn from(g: BaselineGame<T>) -> Self {
        CharacteristicGame::Bam(g)
    }
}

impl<T> From<SampleRiskGame<T>> for CharacteristicGame<T> {
    fn from(g: SampleRiskGame<T>) -> Self {
        CharacteristicGame::Sram(g)
    }
}

impl<T> From<GaussianRiskGame<T>> for CharacteristicGame<T> {
    fn from(g: GaussianRiskGame<T>) -> Self {
        CharacteristicGame::GaussianAnalytic(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sram_single_feature_is_column_risk() {
        let x = ScenarioMatrix::from_rows(vec![
            vec![0.01, 0.3],
            vec![-0.02, -0.1],
            vec![0.04, 0.2],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let game = SampleRiskGame::new(
            ModelSpec::linear(vec![1.0, 1.0]),
            x.clone(),
            vec![0.0, 0.0],
            RiskMeasureSpec::std_dev(),
        )
        .unwrap();
        let v1 = game.value(&Coalition::from_members(2, &[0])).unwrap();
        let direct = RiskMeasureSpec::std_dev().evaluate(&x.column(0)).unwrap();
        assert_eq!(v1, direct);
        assert_eq!(game.value(&Coalition::empty(2)).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_full_coalition() {
        let g = GaussianRiskGame::from_correlation(
            &[3.0, 4.0],
            &[1.0, 0.0, 0.0, 1.0],
            vec![1.0, 1.0],
            RiskKind::StdDev,
        )
        .unwrap();
        assert_eq!(g.value(&Coalition::full(2)).unwrap(), 5.0);
        assert_eq!(g.value(&Coalition::empty(2)).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_validation() {
        assert!(GaussianRiskGame::new(vec![1.0, 0.5, 0.4, 1.0], vec![1.0, 1.0], RiskKind::StdDev).is_err());
        assert!(GaussianRiskGame::new(vec![1.0, 2.0, 2.0, 1.0], vec![1.0, 1.0], RiskKind::StdDev).is_err());
        assert!(GaussianRiskGame::new(vec![-1.0], vec![1.0], RiskKind::StdDev).is_err());
        assert!(GaussianRiskGame::new(vec![1.0], vec![1.0], RiskKind::ConditionalValueAtRisk).is_err());
        assert!(GaussianRiskGame::new(vec![9.0, 12.0, 12.0, 16.0], vec![1.0, 1.0], RiskKind::Variance).is_ok());
    }

    #[test]
    fn bam_substitutes_baseline() {
        let g = BaselineGame::new(ModelSpec::linear(vec![1.0, 1.0]), vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(g.value(&Coalition::from_members(2, &[1])).unwrap(), 2.0);
        assert!(BaselineGame::new(ModelSpec::linear(vec![1.0]), vec![1.0, 2.0], vec![0.0]).is_err());
    }

    #[test]
    fn errors_carry_the_coalition() {
        let x = ScenarioMatrix::from_rows(vec![vec![800.0, 1.0, 1.0]]).unwrap();
        let game = SampleRiskGame::new(
            ModelSpec::bsm_call(100.0, 1.0).unwrap(),
            x,
            vec![0.0, 0.0, 0.0],
            RiskMeasureSpec::std_dev(),
        )
        .unwrap();
        match game.value(&Coalition::from_members(3, &[0])) {
            Err(GameError::Model { coalition, scenario, .. }) => {
                assert_eq!(coalition, vec![0]);
                assert_eq!(scenario, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
