//! Executable axiom checks against computed attribution reports.
//!
//! Hypotheses are verified on the characteristic function by enumerating
//! coalitions, never through derivatives of the model. Every check returns a
//! [`CheckRecord`]: whether the hypothesis held, whether the conclusion held,
//! and a witness when either failed.

mod incompat;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::risk_measures::{RiskKind, RiskMeasureSpec};
use crate::scalar::Scalar;
use crate::shapley::{
    characteristic_table, shapley_exact, AttributionReport, CharacteristicGame, Coalition, CooperativeGame,
    GaussianRiskGame, SampleRiskGame, ShapleyError,
};

pub use incompat::{
    demonstrate_incompatibilities, linearity_case, linearity_case_sampled, symmetric_monotonicity_case,
    symmetric_monotonicity_case_sampled, IncompatibilityReport, LinearityCase, Source, SymmetricMonotonicityCase,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AxiomError {
    #[error("report has {report} attributions, game has {game} players")]
    DimensionMismatch { report: usize, game: usize },
    #[error("feature {feature} out of range for {players} players")]
    FeatureOutOfRange { feature: usize, players: usize },
    #[error(transparent)]
    Shapley(#[from] ShapleyError),
}

/// Numerical tolerances; defaults are tuned for `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack when testing dummy/symmetry hypotheses on `v`.
    pub hypothesis: f64,
    /// Slack on the dummy/symmetry conclusions (exact reports).
    pub assertion: f64,
    /// Relative completeness tolerance for exact reports.
    pub completeness: f64,
    /// Slack for sub-additivity margins and monotonicity checks.
    pub ordering: f64,
    /// Multiples of the standard error allowed for sampled reports.
    pub sigmas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hypothesis: 1e-10,
            assertion: 1e-10,
            completeness: 1e-9,
            ordering: 1e-12,
            sigmas: 3.0,
        }
    }
}

/// Coalition or feature that breaks a hypothesis or a conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalition: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub features: Vec<usize>,
    pub hypothesis_held: bool,
    /// `None` when the hypothesis failed or the check was skipped.
    pub assertion_held: Option<bool>,
    /// Largest hypothesis violation found during enumeration.
    pub max_violation: f64,
    /// Check-specific scalar: residual, attribution, or margin.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    /// Per-feature margins (sub-additivity check only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<f64>,
}

impl CheckRecord {
    fn new(check: &str, features: Vec<usize>) -> Self {
        Self {
            check: check.to_string(),
            features,
            hypothesis_held: true,
            assertion_held: None,
            max_violation: 0.0,
            value: 0.0,
            witness: None,
            skipped: None,
            margins: Vec::new(),
        }
    }

    fn skip(check: &str, features: Vec<usize>, reason: &str) -> Self {
        let mut r = Self::new(check, features);
        r.hypothesis_held = false;
        r.skipped = Some(reason.to_string());
        r
    }

    /// True unless the hypothesis held and the conclusion failed.
    pub fn passed(&self) -> bool {
        self.assertion_held != Some(false)
    }

    /// Dummy-check view: the attribution is zero.
    pub fn attribution_zero(&self) -> Option<bool> {
        self.assertion_held
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match (&self.skipped, self.assertion_held) {
            (Some(reason), _) => format!("skipped ({reason})"),
            (None, None) => "not applicable".to_string(),
            (None, Some(true)) => "pass".to_string(),
            (None, Some(false)) => "FAIL".to_string(),
        };
        write!(f, "{} {:?}: {} (value {:.3e})", self.check, self.features, verdict, self.value)?;
        if let Some(w) = &self.witness {
            write!(f, " [{}]", w.detail)?;
        }
        Ok(())
    }
}

/// Which monotonicity axiom to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicityKind {
    /// `v(S) ≤ v(S∪i) ∀S ⇒ SH_i ≥ 0`.
    Individual,
    /// `v(S∪i) ≤ v(S∪j) ∀S ⊆ M∖{i,j} ⇒ SH_i ≤ SH_j` (one game).
    Pairwise,
    /// `w(S∪i)−w(S) ≤ v(S∪j)−v(S) ∀S ⊆ M∖{i,j} ⇒ SH_i(w) ≤ SH_j(v)`
    /// across two games; guaranteed only for `i = j`.
    Symmetric,
}

/// Axiom checker over one game, its full characteristic table and a report.
pub struct AxiomChecker<'a, T, G> {
    game: &'a G,
    report: &'a AttributionReport<T>,
    table: Vec<T>,
    tol: Tolerances,
}

impl<'a, T: Scalar, G: CooperativeGame<T>> AxiomChecker<'a, T, G> {
    pub fn new(game: &'a G, report: &'a AttributionReport<T>) -> Result<Self, AxiomError> {
        Self::with_tolerances(game, report, Tolerances::default())
    }

    pub fn with_tolerances(
        game: &'a G,
        report: &'a AttributionReport<T>,
        tol: Tolerances,
    ) -> Result<Self, AxiomError> {
        let m = game.players();
        if report.players() != m {
            return Err(AxiomError::DimensionMismatch {
                report: report.players(),
                game: m,
            });
        }
        if m > crate::shapley::DEFAULT_MAX_PLAYERS {
            return Err(ShapleyError::TooManyPlayers {
                players: m,
                limit: crate::shapley::DEFAULT_MAX_PLAYERS,
            }
            .into());
        }
        let table = characteristic_table(game)?;
        Ok(Self {
            game,
            report,
            table,
            tol,
        })
    }

    pub fn players(&self) -> usize {
        self.game.players()
    }

    /// `v` at a bitmask.
    pub fn v(&self, mask: usize) -> T {
        self.table[mask]
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    fn check_feature(&self, i: usize) -> Result<(), AxiomError> {
        if i >= self.players() {
            return Err(AxiomError::FeatureOutOfRange {
                feature: i,
                players: self.players(),
            });
        }
        Ok(())
    }

    /// Allowed slack on a conclusion about feature `i`.
    fn slack(&self, base: f64, i: usize) -> f64 {
        match &self.report.stderr {
            Some(se) => base.max(self.tol.sigmas * se[i].as_f64()),
            None => base,
        }
    }

    fn masks_without(&self, excluded: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.table.len()).filter(move |mask| mask & excluded == 0)
    }

    /// `|Σ A_i − (v(M) − v(∅))|` against freshly evaluated endpoint values.
    pub fn completeness(&self) -> CheckRecord {
        let mut rec = CheckRecord::new("completeness", (0..self.players()).collect());
        let full = self.table[self.table.len() - 1];
        let empty = self.table[0];
        let residual = self.report.attributions.iter().copied().sum::<T>() - (full - empty);
        let residual = residual.abs().as_f64();
        let mut allowed = self.tol.completeness * full.abs().as_f64().max(1.0);
        if let Some(se) = self.report.aggregate_stderr() {
            allowed = allowed.max(self.tol.sigmas * se.as_f64());
        }
        rec.value = residual;
        rec.assertion_held = Some(residual <= allowed);
        if residual > allowed {
            rec.witness = Some(Witness {
                coalition: None,
                feature: None,
                detail: format!("residual {residual:.3e} exceeds {allowed:.3e}"),
            });
        }
        rec
    }

    /// Dummy: `v(S∪i) = v(S) ∀S ⊆ M∖i ⇒ A_i = 0`.
    pub fn dummy(&self, i: usize) -> Result<CheckRecord, AxiomError> {
        self.check_feature(i)?;
        let mut rec = CheckRecord::new("dummy", vec![i]);
        let bit = 1 << i;
        let mut worst = (0.0f64, 0usize);
        for mask in self.masks_without(bit) {
            let d = (self.table[mask | bit] - self.table[mask]).abs().as_f64();
            if d > worst.0 {
                worst = (d, mask);
            }
        }
        rec.max_violation = worst.0;
        let a = self.report.attributions[i].as_f64();
        rec.value = a;
        rec.hypothesis_held = worst.0 <= self.tol.hypothesis;
        if !rec.hypothesis_held {
            rec.witness = Some(Witness {
                coalition: Some(members(worst.1, self.players())),
                feature: Some(i),
                detail: format!("marginal {:.3e} is not zero", worst.0),
            });
            return Ok(rec);
        }
        let ok = a.abs() <= self.slack(self.tol.assertion, i);
        rec.assertion_held = Some(ok);
        if !ok {
            rec.witness = Some(Witness {
                coalition: None,
                feature: Some(i),
                detail: format!("dummy feature has attribution {a:.3e}"),
            });
        }
        Ok(rec)
    }

    /// Symmetry: `v(S∪i) = v(S∪j) ∀S ⊆ M∖{i,j} ⇒ A_i = A_j`.
    pub fn symmetry(&self, i: usize, j: usize) -> Result<CheckRecord, AxiomError> {
        self.check_feature(i)?;
        self.check_feature(j)?;
        let mut rec = CheckRecord::new("symmetry", vec![i, j]);
        let (bi, bj) = (1 << i, 1 << j);
        let mut worst = (0.0f64, 0usize);
        for mask in self.masks_without(bi | bj) {
            let d = (self.table[mask | bi] - self.table[mask | bj]).abs().as_f64();
            if d > worst.0 {
                worst = (d, mask);
            }
        }
        rec.max_violation = worst.0;
        let gap = (self.report.attributions[i] - self.report.attributions[j]).as_f64();
        rec.value = gap;
        rec.hypothesis_held = i != j && worst.0 <= self.tol.hypothesis;
        if !rec.hypothesis_held {
            if i != j {
                rec.witness = Some(Witness {
                    coalition: Some(members(worst.1, self.players())),
                    feature: None,
                    detail: format!("v(S∪i) − v(S∪j) = {:.3e}", worst.0),
                });
            }
            return Ok(rec);
        }
        let allowed = self.slack(self.tol.assertion, i).max(self.slack(self.tol.assertion, j));
        let ok = gap.abs() <= allowed;
        rec.assertion_held = Some(ok);
        if !ok {
            rec.witness = Some(Witness {
                coalition: None,
                feature: Some(i),
                detail: format!("symmetric pair differs by {gap:.3e}"),
            });
        }
        Ok(rec)
    }

    /// Individual monotonicity for feature `i`.
    pub fn individual_monotonicity(&self, i: usize) -> Result<CheckRecord, AxiomError> {
        self.check_feature(i)?;
        let mut rec = CheckRecord::new("individual_monotonicity", vec![i]);
        let bit = 1 << i;
        let mut worst = (0.0f64, 0usize);
        for mask in self.masks_without(bit) {
            let drop = (self.table[mask] - self.table[mask | bit]).as_f64();
            if drop > worst.0 {
                worst = (drop, mask);
            }
        }
        rec.max_violation = worst.0;
        let a = self.report.attributions[i].as_f64();
        rec.value = a;
        rec.hypothesis_held = worst.0 <= self.tol.ordering;
        if !rec.hypothesis_held {
            rec.witness = Some(Witness {
                coalition: Some(members(worst.1, self.players())),
                feature: Some(i),
                detail: format!("v drops by {:.3e} when i joins", worst.0),
            });
            return Ok(rec);
        }
        let ok = a >= -self.slack(self.tol.ordering, i);
        rec.assertion_held = Some(ok);
        if !ok {
            rec.witness = Some(Witness {
                coalition: None,
                feature: Some(i),
                detail: format!("attribution {a:.3e} is negative"),
            });
        }
        Ok(rec)
    }

    /// Pairwise monotonicity `i ≼ j` within this game.
    pub fn pairwise_monotonicity(&self, i: usize, j: usize) -> Result<CheckRecord, AxiomError> {
        self.check_feature(i)?;
        self.check_feature(j)?;
        let (bi, bj) = (1 << i, 1 << j);
        let left: Vec<T> = self.masks_without(bi | bj).map(|s| self.table[s | bi]).collect();
        let right: Vec<T> = self.masks_without(bi | bj).map(|s| self.table[s | bj]).collect();
        let masks: Vec<usize> = self.masks_without(bi | bj).collect();
        let ai = self.report.attributions[i].as_f64();
        let aj = self.report.attributions[j].as_f64();
        let slack = self.slack(self.tol.ordering, i).max(self.slack(self.tol.ordering, j));
        Ok(ordering_record(
            "pairwise_monotonicity",
            vec![i, j],
            &left,
            &right,
            &masks,
            self.players(),
            ai,
            aj,
            self.tol.ordering,
            slack,
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn ordering_record<T: Scalar>(
    name: &str,
    features: Vec<usize>,
    left: &[T],
    right: &[T],
    masks: &[usize],
    players: usize,
    a_left: f64,
    a_right: f64,
    hyp_tol: f64,
    slack: f64,
) -> CheckRecord {
    let mut rec = CheckRecord::new(name, features);
    let mut worst = (0.0f64, 0usize);
    for ((l, r), &mask) in left.iter().zip(right).zip(masks) {
        let excess = (*l - *r).as_f64();
        if excess > worst.0 {
            worst = (excess, mask);
        }
    }
    rec.max_violation = worst.0;
    rec.value = a_right - a_left;
    rec.hypothesis_held = worst.0 <= hyp_tol;
    if !rec.hypothesis_held {
        rec.witness = Some(Witness {
            coalition: Some(members(worst.1, players)),
            feature: None,
            detail: format!("hypothesis fails by {:.3e}", worst.0),
        });
        return rec;
    }
    let ok = a_left <= a_right + slack;
    rec.assertion_held = Some(ok);
    if !ok {
        rec.witness = Some(Witness {
            coalition: None,
            feature: None,
            detail: format!("attribution order reversed: {a_left:.6e} > {a_right:.6e}"),
        });
    }
    rec
}

fn members(mask: usize, players: usize) -> Vec<usize> {
    (0..players).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn check_completeness<T: Scalar, G: CooperativeGame<T>>(
    report: &AttributionReport<T>,
    game: &G,
) -> Result<CheckRecord, AxiomError> {
    let m = game.players();
    if report.players() != m {
        return Err(AxiomError::DimensionMismatch {
            report: report.players(),
            game: m,
        });
    }
    // only the two endpoint values are needed
    let full = game.value(&Coalition::full(m)).map_err(ShapleyError::Game)?;
    let empty = game.value(&Coalition::empty(m)).map_err(ShapleyError::Game)?;
    let tol = Tolerances::default();
    let mut rec = CheckRecord::new("completeness", (0..m).collect());
    let residual = (report.attributions.iter().copied().sum::<T>() - (full - empty))
        .abs()
        .as_f64();
    let mut allowed = tol.completeness * full.abs().as_f64().max(1.0);
    if let Some(se) = report.aggregate_stderr() {
        allowed = allowed.max(tol.sigmas * se.as_f64());
    }
    rec.value = residual;
    rec.assertion_held = Some(residual <= allowed);
    if residual > allowed {
        rec.witness = Some(Witness {
            coalition: None,
            feature: None,
            detail: format!("residual {residual:.3e} exceeds {allowed:.3e}"),
        });
    }
    Ok(rec)
}

pub fn check_dummy<T: Scalar, G: CooperativeGame<T>>(
    game: &G,
    report: &AttributionReport<T>,
    i: usize,
) -> Result<CheckRecord, AxiomError> {
    AxiomChecker::new(game, report)?.dummy(i)
}

pub fn check_symmetry<T: Scalar, G: CooperativeGame<T>>(
    game: &G,
    report: &AttributionReport<T>,
    i: usize,
    j: usize,
) -> Result<CheckRecord, AxiomError> {
    AxiomChecker::new(game, report)?.symmetry(i, j)
}

/// Monotonicity across one game (individual, pairwise) or two games
/// (symmetric). Attributions are the exact Shapley values of each game.
pub fn check_monotonicity<T: Scalar, G: CooperativeGame<T>>(
    game_a: &G,
    game_b: &G,
    i: usize,
    j: usize,
    kind: MonotonicityKind,
) -> Result<CheckRecord, AxiomError> {
    let tol = Tolerances::default();
    match kind {
        MonotonicityKind::Individual => {
            let report = shapley_exact(game_a)?;
            AxiomChecker::new(game_a, &report)?.individual_monotonicity(i)
        }
        MonotonicityKind::Pairwise => {
            let report = shapley_exact(game_a)?;
            AxiomChecker::new(game_a, &report)?.pairwise_monotonicity(i, j)
        }
        MonotonicityKind::Symmetric => {
            let m = game_a.players();
            if game_b.players() != m {
                return Err(AxiomError::DimensionMismatch {
                    report: game_b.players(),
                    game: m,
                });
            }
            for f in [i, j] {
                if f >= m {
                    return Err(AxiomError::FeatureOutOfRange { feature: f, players: m });
                }
            }
            let ra = shapley_exact(game_a)?;
            let rb = shapley_exact(game_b)?;
            let ta = characteristic_table(game_a)?;
            let tb = characteristic_table(game_b)?;
            let (bi, bj) = (1usize << i, 1usize << j);
            let masks: Vec<usize> = (0..ta.len()).filter(|s| s & (bi | bj) == 0).collect();
            let left: Vec<T> = masks.iter().map(|&s| ta[s | bi] - ta[s]).collect();
            let right: Vec<T> = masks.iter().map(|&s| tb[s | bj] - tb[s]).collect();
            Ok(ordering_record(
                "symmetric_monotonicity",
                vec![i, j],
                &left,
                &right,
                &masks,
                m,
                ra.attributions[i].as_f64(),
                rb.attributions[j].as_f64(),
                tol.ordering,
                tol.ordering,
            ))
        }
    }
}

/// Standalone risk `ρ̂(c_i (X_i − x'_i))` of each position of a linear
/// portfolio: the upper bound a sub-additive measure places on its
/// attribution. `None` outside linear-portfolio risk games.
pub fn standalone_risks<T: Scalar>(game: &CharacteristicGame<T>) -> Option<Result<Vec<T>, AxiomError>> {
    match game {
        CharacteristicGame::Sram(g) => g.model().linear_weights().map(|w| standalone_sample(g, w)),
        CharacteristicGame::GaussianAnalytic(g) => Some(Ok(standalone_gaussian(g))),
        CharacteristicGame::Bam(_) => None,
    }
}

fn standalone_sample<T: Scalar>(g: &SampleRiskGame<T>, weights: &[T]) -> Result<Vec<T>, AxiomError> {
    let x = g.scenarios();
    let b = g.baseline();
    (0..weights.len())
        .map(|i| {
            let pos: Vec<T> = x.rows().map(|r| weights[i] * (r[i] - b[i])).collect();
            g.risk().evaluate(&pos).map_err(|source| {
                AxiomError::Shapley(ShapleyError::Game(crate::shapley::GameError::Risk {
                    coalition: vec![i],
                    source,
                }))
            })
        })
        .collect()
}

fn standalone_gaussian<T: Scalar>(g: &GaussianRiskGame<T>) -> Vec<T> {
    let m = g.players();
    (0..m)
        .map(|i| {
            let v = g.weights()[i] * g.weights()[i] * g.covariance()[i * m + i];
            match g.kind() {
                RiskKind::StdDev => v.sqrt(),
                _ => v,
            }
        })
        .collect()
}

/// Sub-additivity bound `A_i ≤ ρ̂(c_i X_i)` for linear portfolios under a
/// sub-additive measure; `margins[i] = ρ̂(c_i X_i) − A_i`.
pub fn check_subadditivity_bound<T: Scalar>(
    game: &CharacteristicGame<T>,
    report: &AttributionReport<T>,
) -> Result<CheckRecord, AxiomError> {
    let m = game.players();
    let features: Vec<usize> = (0..m).collect();
    if report.players() != m {
        return Err(AxiomError::DimensionMismatch {
            report: report.players(),
            game: m,
        });
    }
    let Some((_, spec)) = game.linear_risk_setting() else {
        return Ok(CheckRecord::skip(
            "subadditivity_bound",
            features,
            "model is not a linear portfolio",
        ));
    };
    if !measure_is_subadditive(&spec) {
        return Ok(CheckRecord::skip(
            "subadditivity_bound",
            features,
            "measure not sub-additive",
        ));
    }
    let standalone = standalone_risks(game).expect("linear risk game")?;
    let tol = Tolerances::default();
    let mut rec = CheckRecord::new("subadditivity_bound", features);
    rec.margins = standalone
        .iter()
        .zip(&report.attributions)
        .map(|(&s, &a)| (s - a).as_f64())
        .collect();
    let (worst_i, worst) = rec
        .margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    rec.value = worst;
    let allowed = match &report.stderr {
        Some(se) => tol.ordering.max(tol.sigmas * se[worst_i].as_f64()),
        None => tol.ordering,
    };
    let ok = worst >= -allowed;
    rec.assertion_held = Some(ok);
    if !ok {
        rec.witness = Some(Witness {
            coalition: None,
            feature: Some(worst_i),
            detail: format!("attribution exceeds standalone risk by {:.3e}", -worst),
        });
    }
    Ok(rec)
}

fn measure_is_subadditive<T: Scalar>(spec: &RiskMeasureSpec<T>) -> bool {
    spec.is_subadditive()
}

/// Runs every applicable check on an exact or sampled report: completeness,
/// dummy for each feature, symmetry for each pair, individual
/// monotonicity for each feature, pairwise monotonicity for each ordered
/// pair, and the sub-additivity bound.
pub fn check_all<T: Scalar>(
    game: &CharacteristicGame<T>,
    report: &AttributionReport<T>,
) -> Result<Vec<CheckRecord>, AxiomError> {
    let checker = AxiomChecker::new(game, report)?;
    let m = game.players();
    let mut out = vec![checker.completeness()];
    for i in 0..m {
        out.push(checker.dummy(i)?);
    }
    for i in 0..m {
        for j in i + 1..m {
            out.push(checker.symmetry(i, j)?);
        }
    }
    for i in 0..m {
        out.push(checker.individual_monotonicity(i)?);
    }
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out.push(checker.pairwise_monotonicity(i, j)?);
            }
        }
    }
    out.push(check_subadditivity_bound(game, report)?);
    Ok(out)
}
