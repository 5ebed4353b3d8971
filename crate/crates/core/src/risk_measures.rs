//! Sample risk measures applied to a vector of outcomes (returns, prices, P&L).
//!
//! All measures are functionals of the empirical distribution of the input:
//!
//! - `StdDev` / `Variance` use the population estimator (divide by `n`) unless
//!   the spec is switched to the sample (`n - 1`) denominator.
//! - `VaR_α = -y_(k)` where `y_(1) <= ... <= y_(n)` and `k = ⌈αn⌉`.
//! - `CVaR_α = min_ζ ζ + 1/(αn) Σ (−y_i − ζ)⁺`, evaluated in closed form from
//!   the order statistics; the minimum is attained at `ζ = VaR_α`.
//!
//! Sign convention: larger losses give larger risk. Tail measures of an
//! all-positive return vector are negative.
//!
//! Every estimator sorts a copy of its input before accumulating, so the
//! result is bit-identical under any permutation of the outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cmp_finite, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskKind {
    StdDev,
    Variance,
    #[serde(rename = "var")]
    ValueAtRisk,
    #[serde(rename = "cvar")]
    ConditionalValueAtRisk,
}

impl RiskKind {
    pub fn is_tail(self) -> bool {
        matches!(self, RiskKind::ValueAtRisk | RiskKind::ConditionalValueAtRisk)
    }

    /// Short CLI name: `std`, `var` (variance), `varq` (quantile VaR), `cvar`.
    pub fn cli_name(self) -> &'static str {
        match self {
            RiskKind::StdDev => "std",
            RiskKind::Variance => "var",
            RiskKind::ValueAtRisk => "varq",
            RiskKind::ConditionalValueAtRisk => "cvar",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        match name {
            "std" => Some(RiskKind::StdDev),
            "var" => Some(RiskKind::Variance),
            "varq" => Some(RiskKind::ValueAtRisk),
            "cvar" => Some(RiskKind::ConditionalValueAtRisk),
            _ => None,
        }
    }
}

impl fmt::Display for RiskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RiskKind::StdDev => "StdDev",
            RiskKind::Variance => "Variance",
            RiskKind::ValueAtRisk => "VaR",
            RiskKind::ConditionalValueAtRisk => "CVaR",
        };
        f.write_str(s)
    }
}

/// Denominator used by `StdDev` and `Variance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1` (Bessel's correction).
    Sample,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("risk measure applied to an empty outcome vector")]
    Empty,
    #[error("outcome {index} is not finite")]
    NonFinite { index: usize },
    #[error("{kind} requires a tail level alpha")]
    MissingAlpha { kind: RiskKind },
    #[error("{kind} does not take a tail level alpha")]
    UnexpectedAlpha { kind: RiskKind },
    #[error("alpha = {alpha} is outside (0, 1)")]
    InvalidAlpha { alpha: f64 },
    #[error("sample denominator needs at least two outcomes")]
    TooFewForSample,
}

/// Which risk functional to apply, plus its tail level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskMeasureSpec<T> {
    pub kind: RiskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
    #[serde(default)]
    pub denominator: Denominator,
}

impl<T: Scalar> RiskMeasureSpec<T> {
    pub fn new(kind: RiskKind, alpha: Option<T>) -> Result<Self, RiskError> {
        let spec = Self {
            kind,
            alpha,
            denominator: Denominator::Population,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn std_dev() -> Self {
        Self {
            kind: RiskKind::StdDev,
            alpha: None,
            denominator: Denominator::Population,
        }
    }

    pub fn variance() -> Self {
        Self {
            kind: RiskKind::Variance,
            alpha: None,
            denominator: Denominator::Population,
        }
    }

    pub fn value_at_risk(alpha: T) -> Result<Self, RiskError> {
        Self::new(RiskKind::ValueAtRisk, Some(alpha))
    }

    pub fn cvar(alpha: T) -> Result<Self, RiskError> {
        Self::new(RiskKind::ConditionalValueAtRisk, Some(alpha))
    }

    pub fn with_denominator(mut self, denominator: Denominator) -> Self {
        self.denominator = denominator;
        self
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        match (self.kind.is_tail(), self.alpha) {
            (true, None) => Err(RiskError::MissingAlpha { kind: self.kind }),
            (false, Some(_)) => Err(RiskError::UnexpectedAlpha { kind: self.kind }),
            (true, Some(a)) if !(a > T::zero() && a < T::one()) => {
                Err(RiskError::InvalidAlpha { alpha: a.as_f64() })
            }
            _ => Ok(()),
        }
    }

    /// True for the coherent, sub-additive measures (StdDev and CVaR).
    pub fn is_subadditive(&self) -> bool {
        matches!(
            self.kind,
            RiskKind::StdDev | RiskKind::ConditionalValueAtRisk
        )
    }

    /// True for measures that are positively homogeneous of degree one.
    pub fn is_homogeneous(&self) -> bool {
        !matches!(self.kind, RiskKind::Variance)
    }

    pub fn evaluate(&self, outcomes: &[T]) -> Result<T, RiskError> {
        evaluate(self, outcomes)
    }
}

impl<T: Scalar> fmt::Display for RiskMeasureSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha {
            Some(a) => write!(f, "{}_{}", self.kind, a),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Applies the risk measure to the outcome sample.
pub fn evaluate<T: Scalar>(spec: &RiskMeasureSpec<T>, outcomes: &[T]) -> Result<T, RiskError> {
    spec.validate()?;
    if outcomes.is_empty() {
        return Err(RiskError::Empty);
    }
    if let Some(index) = outcomes.iter().position(|y| !y.is_finite()) {
        return Err(RiskError::NonFinite { index });
    }
    let mut sorted = outcomes.to_vec();
    sorted.sort_unstable_by(cmp_finite);

    match spec.kind {
        RiskKind::StdDev => Ok(variance_sorted(&sorted, spec.denominator)?.sqrt()),
        RiskKind::Variance => variance_sorted(&sorted, spec.denominator),
        RiskKind::ValueAtRisk => {
            let k = tail_count(spec.alpha.unwrap(), sorted.len());
            Ok(-sorted[k - 1])
        }
        RiskKind::ConditionalValueAtRisk => Ok(cvar_sorted(&sorted, spec.alpha.unwrap())),
    }
}

/// Size of the lower tail, `k = ⌈αn⌉`, clamped to `[1, n]`.
///
/// A product `αn` within a few ulps of an integer is snapped to it so that,
/// for example, `α = 0.07, n = 100` gives `k = 7` rather than 8.
pub fn tail_count<T: Scalar>(alpha: T, n: usize) -> usize {
    let an = alpha.as_f64() * n as f64;
    let nearest = an.round();
    let k = if (an - nearest).abs() <= 1e-9 * an.max(1.0) {
        nearest
    } else {
        an.ceil()
    };
    (k as usize).clamp(1, n)
}

/// `α·n` with the same snapping rule as [`tail_count`].
fn tail_mass<T: Scalar>(alpha: T, n: usize) -> T {
    let an = alpha * T::from_count(n);
    let nearest = an.round();
    if (an - nearest).abs() <= T::lit(1e-9) * an.max(T::one()) {
        nearest
    } else {
        an
    }
}

fn variance_sorted<T: Scalar>(sorted: &[T], denominator: Denominator) -> Result<T, RiskError> {
    let n = sorted.len();
    let divisor = match denominator {
        Denominator::Population => n,
        Denominator::Sample if n < 2 => return Err(RiskError::TooFewForSample),
        Denominator::Sample => n - 1,
    };
    if sorted[0] == sorted[n - 1] {
        return Ok(T::zero());
    }
    let mean = sorted.iter().copied().sum::<T>() / T::from_count(n);
    let ss: T = sorted.iter().map(|&y| (y - mean) * (y - mean)).sum();
    Ok(ss / T::from_count(divisor))
}

/// Closed-form Rockafellar–Uryasev value on ascending-sorted outcomes.
fn cvar_sorted<T: Scalar>(sorted: &[T], alpha: T) -> T {
    let n = sorted.len();
    let k = tail_count(alpha, n);
    let mass = tail_mass(alpha, n);
    // losses of the k-1 strictly-worse scenarios plus the fractional atom at VaR
    let worst: T = sorted[..k - 1].iter().map(|&y| -y).sum();
    let var = -sorted[k - 1];
    let weight = mass - T::from_count(k - 1);
    (worst + weight * var) / mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Brute-force minimization of the Rockafellar–Uryasev objective. The
    /// objective is piecewise linear in ζ with kinks at the losses, so the
    /// minimum sits on one of them; the grid also sweeps between kinks.
    fn ru_brute_force(y: &[f64], alpha: f64) -> f64 {
        let n = y.len() as f64;
        let obj = |z: f64| z + y.iter().map(|&v| (-v - z).max(0.0)).sum::<f64>() / (alpha * n);
        let lo = y.iter().map(|v| -v).fold(f64::INFINITY, f64::min);
        let hi = y.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
        let mut best = f64::INFINITY;
        for &v in y {
            best = best.min(obj(-v));
        }
        let steps = 20_000;
        for s in 0..=steps {
            let z = lo + (hi - lo) * s as f64 / steps as f64;
            best = best.min(obj(z));
        }
        best
    }

    #[test]
    fn std_of_plus_minus_one() {
        let s = RiskMeasureSpec::<f64>::std_dev();
        assert_eq!(s.evaluate(&[1.0, -1.0]).unwrap(), 1.0);
    }

    #[test]
    fn var_half_of_four_points() {
        let s = RiskMeasureSpec::value_at_risk(0.5).unwrap();
        assert_eq!(s.evaluate(&[-0.1, 0.0, 0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn cvar_half_matches_brute_force() {
        let y = [-0.1, 0.0, 0.1, 0.2];
        let oracle = ru_brute_force(&y, 0.5);
        assert!(close(oracle, 0.05, 1e-12), "oracle {oracle}");
        let s = RiskMeasureSpec::cvar(0.5).unwrap();
        assert!(close(s.evaluate(&y).unwrap(), 0.05, 1e-15));
    }

    #[test]
    fn cvar_of_constant() {
        let s = RiskMeasureSpec::cvar(0.05).unwrap();
        let c = 0.013;
        assert!(close(s.evaluate(&vec![c; 37]).unwrap(), -c, 1e-15));
    }

    #[test]
    fn cvar_fractional_tail_matches_brute_force() {
        let y = [0.03, -0.02, 0.011, -0.07, 0.0, 0.05, -0.01];
        for alpha in [0.05, 0.2, 0.33, 0.5, 0.9] {
            let got = RiskMeasureSpec::cvar(alpha).unwrap().evaluate(&y).unwrap();
            let want = ru_brute_force(&y, alpha);
            assert!(close(got, want, 1e-12), "alpha {alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn tail_count_snaps_near_integers() {
        assert_eq!(tail_count(0.07, 100), 7);
        assert_eq!(tail_count(0.05, 2000), 100);
        assert_eq!(tail_count(0.05, 10), 1);
        assert_eq!(tail_count(0.05, 30), 2);
        assert_eq!(tail_count(0.001, 10), 1);
    }

    #[test]
    fn error_paths() {
        let s = RiskMeasureSpec::<f64>::std_dev();
        assert_eq!(s.evaluate(&[]), Err(RiskError::Empty));
        assert_eq!(
            s.evaluate(&[1.0, f64::NAN]),
            Err(RiskError::NonFinite { index: 1 })
        );
        let missing = RiskMeasureSpec::<f64> {
            kind: RiskKind::ConditionalValueAtRisk,
            alpha: None,
            denominator: Denominator::Population,
        };
        assert!(matches!(
            missing.evaluate(&[1.0]),
            Err(RiskError::MissingAlpha { .. })
        ));
        assert!(RiskMeasureSpec::<f64>::cvar(1.0).is_err());
        assert!(RiskMeasureSpec::<f64>::cvar(0.0).is_err());
        assert!(RiskMeasureSpec::<f64>::new(RiskKind::Variance, Some(0.1)).is_err());
    }

    #[test]
    fn sample_denominator() {
        let s = RiskMeasureSpec::<f64>::variance().with_denominator(Denominator::Sample);
        assert!(close(s.evaluate(&[1.0, -1.0]).unwrap(), 2.0, 1e-15));
        assert_eq!(s.evaluate(&[1.0]), Err(RiskError::TooFewForSample));
    }

    #[test]
    fn subadditive_flags() {
        assert!(RiskMeasureSpec::<f64>::std_dev().is_subadditive());
        assert!(RiskMeasureSpec::cvar(0.05).unwrap().is_subadditive());
        assert!(!RiskMeasureSpec::<f64>::variance().is_subadditive());
        assert!(!RiskMeasureSpec::value_at_risk(0.05).unwrap().is_subadditive());
    }

    #[test]
    fn works_in_f32() {
        let s = RiskMeasureSpec::<f32>::cvar(0.5).unwrap();
        let v = s.evaluate(&[-0.1f32, 0.0, 0.1, 0.2]).unwrap();
        assert!((v - 0.05).abs() < 1e-6);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-0.2f64..0.2, 1..80)
    }

    fn all_specs() -> Vec<RiskMeasureSpec<f64>> {
        vec![
            RiskMeasureSpec::std_dev(),
            RiskMeasureSpec::variance(),
            RiskMeasureSpec::value_at_risk(0.05).unwrap(),
            RiskMeasureSpec::value_at_risk(0.3).unwrap(),
            RiskMeasureSpec::cvar(0.05).unwrap(),
            RiskMeasureSpec::cvar(0.3).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn translation(y in sample(), c in -1.0f64..1.0) {
            let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
            for spec in all_specs() {
                let a = spec.evaluate(&y).unwrap();
                let b = spec.evaluate(&shifted).unwrap();
                match spec.kind {
                    RiskKind::StdDev | RiskKind::Variance => prop_assert!(close(a, b, 1e-12)),
                    _ => prop_assert!(close(b, a - c, 1e-12)),
                }
            }
        }

        #[test]
        fn positive_homogeneity(y in sample(), lambda in 0.0f64..5.0) {
            let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            for spec in all_specs() {
                let a = spec.evaluate(&y).unwrap();
                let b = spec.evaluate(&scaled).unwrap();
                let want = if spec.kind == RiskKind::Variance { lambda * lambda * a } else { lambda * a };
                prop_assert!(close(b, want, 1e-12), "{spec}: {b} vs {want}");
            }
        }

        #[test]
        fn subadditivity(pairs in prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..80)) {
            let y1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let sum: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
            for spec in all_specs().into_iter().filter(|s| s.is_subadditive()) {
                let lhs = spec.evaluate(&sum).unwrap();
                let rhs = spec.evaluate(&y1).unwrap() + spec.evaluate(&y2).unwrap();
                prop_assert!(lhs <= rhs + 1e-12, "{spec}: {lhs} > {rhs}");
            }
        }

        #[test]
        fn cvar_dominates_var(y in sample(), alpha in 0.01f64..0.99) {
            let var = RiskMeasureSpec::value_at_risk(alpha).unwrap().evaluate(&y).unwrap();
            let cvar = RiskMeasureSpec::cvar(alpha).unwrap().evaluate(&y).unwrap();
            prop_assert!(cvar >= var - 1e-15);
        }

        #[test]
        fn permutation_invariance(y in sample(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = y.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            for spec in all_specs() {
                prop_assert_eq!(spec.evaluate(&y).unwrap(), spec.evaluate(&shuffled).unwrap());
            }
        }
    }
}
