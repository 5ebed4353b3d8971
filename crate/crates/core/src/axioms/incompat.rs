//! Worked counterexamples: axioms that cannot hold together for risk
//! attributions.

use std::fmt;

use super::{check_monotonicity, AxiomError, CheckRecord, MonotonicityKind};
use crate::models::ModelSpec;
use crate::risk_measures::{RiskKind, RiskMeasureSpec};
use crate::shapley::{shapley_exact, CharacteristicGame, GaussianRiskGame, SampleRiskGame, ShapleyError};
use crate::synthetic::correlated_normals;

const DEGENERATE_GAP: f64 = 1e-12;

/// Additivity of attributions across `f = X1`, `g = X2` and `f + g` under
/// StdDev.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityCase {
    pub source: Source,
    pub sigma: [f64; 2],
    pub rho: f64,
    pub a_f: [f64; 2],
    pub a_g: [f64; 2],
    pub a_sum: [f64; 2],
    /// `Σ A(f) + Σ A(g)`
    pub parts: f64,
    /// `Σ A(f+g)`
    pub whole: f64,
    /// `parts − whole`
    pub gap: f64,
    /// `σ1 + σ2 − √(σ1² + σ2² + 2ρσ1σ2)` from the (sample) moments.
    pub expected_gap: f64,
}

impl LinearityCase {
    /// Perfect correlation: StdDev is additive and no gap appears.
    pub fn degenerate(&self) -> bool {
        self.expected_gap.abs() <= DEGENERATE_GAP
    }
}

/// Variance attributions for `f = X1 + X2`, `g = X2`, `h = X1` with equal
/// marginal variances.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMonotonicityCase {
    pub source: Source,
    pub sigma2: f64,
    pub rho: f64,
    pub bs_f: [f64; 2],
    pub bs_g: [f64; 2],
    pub bs_h: [f64; 2],
    /// `(σ² + ρσ², σ² + ρσ²)` and `(0, σ²)` from the (sample) moments.
    pub expected_f: [f64; 2],
    pub expected_g: [f64; 2],
    /// `A_1(f) − A_2(g)`: how far equally distributed features are from
    /// equal attributions across models.
    pub cross_model_gap: f64,
    /// `v_f(M) − (A_2(g) + A_1(h))`: completeness shortfall if the cross
    /// model equalities were imposed on `f`.
    pub imposed_shortfall: f64,
    /// SH-level symmetric monotonicity between `X2` in `g` and `X1` in `f`.
    pub sh_check: CheckRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Sample { n: usize, seed: u64 },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Analytic => write!(f, "analytic"),
            Source::Sample { n, seed } => write!(f, "sample n={n} seed={seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibilityReport {
    pub linearity: Vec<LinearityCase>,
    pub symmetric_monotonicity: Vec<SymmetricMonotonicityCase>,
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

fn analytic(sigma: [f64; 2], rho: f64, weights: [f64; 2], kind: RiskKind) -> Result<[f64; 2], AxiomError> {
    let game: CharacteristicGame<f64> =
        GaussianRiskGame::from_correlation(&sigma, &[1.0, rho, rho, 1.0], weights.to_vec(), kind)
            .map_err(ShapleyError::Game)?
            .into();
    Ok(pair(&shapley_exact(&game)?.attributions))
}

fn sampled_game(
    x: &crate::data_io::ScenarioMatrix<f64>,
    weights: [f64; 2],
    risk: RiskMeasureSpec<f64>,
) -> Result<CharacteristicGame<f64>, AxiomError> {
    Ok(SampleRiskGame::new(ModelSpec::linear(weights.to_vec()), x.clone(), vec![0.0; 2], risk)
        .map_err(ShapleyError::Game)?
        .into())
}

fn finish_linearity(source: Source, sigma: [f64; 2], rho: f64, a: [[f64; 2]; 3], expected_gap: f64) -> LinearityCase {
    let [a_f, a_g, a_sum] = a;
    let parts = a_f[0] + a_f[1] + a_g[0] + a_g[1];
    let whole = a_sum[0] + a_sum[1];
    LinearityCase {
        source,
        sigma,
        rho,
        a_f,
        a_g,
        a_sum,
        parts,
        whole,
        gap: parts - whole,
        expected_gap,
    }
}

/// Linearity counterexample on the closed-form Gaussian StdDev game.
pub fn linearity_case(sigma: [f64; 2], rho: f64) -> Result<LinearityCase, AxiomError> {
    let a = [
        analytic(sigma, rho, [1.0, 0.0], RiskKind::StdDev)?,
        analytic(sigma, rho, [0.0, 1.0], RiskKind::StdDev)?,
        analytic(sigma, rho, [1.0, 1.0], RiskKind::StdDev)?,
    ];
    let whole = (sigma[0] * sigma[0] + sigma[1] * sigma[1] + 2.0 * rho * sigma[0] * sigma[1]).max(0.0).sqrt();
    Ok(finish_linearity(Source::Analytic, sigma, rho, a, sigma[0] + sigma[1] - whole))
}

/// Linearity counterexample on `n` correlated Gaussian scenarios; the
/// expected gap uses the sample standard deviations.
pub fn linearity_case_sampled(sigma: [f64; 2], rho: f64, n: usize, seed: u64) -> Result<LinearityCase, AxiomError> {
    let cov = covariance(sigma, rho);
    let x = correlated_normals(n, &[0.0, 0.0], &cov, seed)
        .map_err(|e| AxiomError::Shapley(ShapleyError::Invalid(e.to_string())))?;
    let sd = RiskMeasureSpec::std_dev();
    let mut a = [[0.0; 2]; 3];
    for (slot, w) in a.iter_mut().zip([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]) {
        *slot = pair(&shapley_exact(&sampled_game(&x, w, sd)?)?.attributions);
    }
    let eval = |v: Vec<f64>| sd.evaluate(&v).expect("finite sample");
    let s1 = eval(x.column(0));
    let s2 = eval(x.column(1));
    let s12 = eval(x.rows().map(|r| r[0] + r[1]).collect());
    Ok(finish_linearity(Source::Sample { n, seed }, sigma, rho, a, s1 + s2 - s12))
}

fn covariance(sigma: [f64; 2], rho: f64) -> Vec<f64> {
    let c = rho * sigma[0] * sigma[1];
    vec![sigma[0] * sigma[0], c, c, sigma[1] * sigma[1]]
}

fn finish_sm(
    source: Source,
    sigma2: f64,
    rho: f64,
    games: [CharacteristicGame<f64>; 3],
    expected_f: [f64; 2],
    expected_g: [f64; 2],
) -> Result<SymmetricMonotonicityCase, AxiomError> {
    let [f, g, h] = &games;
    let report_f = shapley_exact(f)?;
    let bs_f = pair(&report_f.attributions);
    let bs_g = pair(&shapley_exact(g)?.attributions);
    let bs_h = pair(&shapley_exact(h)?.attributions);
    let sh_check = check_monotonicity(g, f, 1, 0, MonotonicityKind::Symmetric)?;
    Ok(SymmetricMonotonicityCase {
        source,
        sigma2,
        rho,
        bs_f,
        bs_g,
        bs_h,
        expected_f,
        expected_g,
        cross_model_gap: bs_f[0] - bs_g[1],
        imposed_shortfall: report_f.total() - (bs_g[1] + bs_h[0]),
        sh_check,
    })
}

/// Symmetric monotonicity counterexample on the closed-form Gaussian
/// Variance game with `Var(X1) = Var(X2) = σ²`.
pub fn symmetric_monotonicity_case(sigma: f64, rho: f64) -> Result<SymmetricMonotonicityCase, AxiomError> {
    let cov = covariance([sigma, sigma], rho);
    let game = |w: [f64; 2]| -> Result<CharacteristicGame<f64>, AxiomError> {
        Ok(GaussianRiskGame::new(cov.clone(), w.to_vec(), RiskKind::Variance)
            .map_err(ShapleyError::Game)?
            .into())
    };
    let s2 = sigma * sigma;
    finish_sm(
        Source::Analytic,
        s2,
        rho,
        [game([1.0, 1.0])?, game([0.0, 1.0])?, game([1.0, 0.0])?],
        [s2 + rho * s2, s2 + rho * s2],
        [0.0, s2],
    )
}

/// Sample version: expected matrices use the sample moments, so
/// `expected_f = (Var̂(X1) + Ĉov, Var̂(X2) + Ĉov)`.
pub fn symmetric_monotonicity_case_sampled(
    sigma: f64,
    rho: f64,
    n: usize,
    seed: u64,
) -> Result<SymmetricMonotonicityCase, AxiomError> {
    let x = correlated_normals(n, &[0.0, 0.0], &covariance([sigma, sigma], rho), seed)
        .map_err(|e| AxiomError::Shapley(ShapleyError::Invalid(e.to_string())))?;
    let var = RiskMeasureSpec::variance();
    let a = x.column(0);
    let b = x.column(1);
    let nf = n as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / nf, b.iter().sum::<f64>() / nf);
    let cov = a.iter().zip(&b).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>() / nf;
    let va = var.evaluate(&a).expect("finite sample");
    let vb = var.evaluate(&b).expect("finite sample");
    finish_sm(
        Source::Sample { n, seed },
        sigma * sigma,
        rho,
        [
            sampled_game(&x, [1.0, 1.0], var)?,
            sampled_game(&x, [0.0, 1.0], var)?,
            sampled_game(&x, [1.0, 0.0], var)?,
        ],
        [va + cov, vb + cov],
        [0.0, vb],
    )
}

/// Runs the standard set of counterexamples.
pub fn demonstrate_incompatibilities() -> Result<IncompatibilityReport, AxiomError> {
    let mut linearity = Vec::new();
    for (sigma, rho) in [([1.0, 1.0], 0.0), ([1.0, 1.0], 0.5), ([3.0, 4.0], -0.5), ([1.0, 1.0], 1.0)] {
        linearity.push(linearity_case(sigma, rho)?);
    }
    linearity.push(linearity_case_sampled([1.0, 2.0], 0.3, 5_000, 11)?);
    let symmetric_monotonicity = vec![
        symmetric_monotonicity_case(1.0, 0.5)?,
        symmetric_monotonicity_case(2.0, 0.25)?,
        symmetric_monotonicity_case_sampled(1.0, 0.5, 5_000, 12)?,
    ];
    Ok(IncompatibilityReport {
        linearity,
        symmetric_monotonicity,
    })
}

impl fmt::Display for IncompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Linearity vs completeness (StdDev, f = X1, g = X2)")?;
        for c in &self.linearity {
            write!(
                f,
                "  [{}] sigma=({}, {}) rho={}: sum A(f) + sum A(g) = {:.6}, sum A(f+g) = {:.6}, gap {:.6e} (expected {:.6e})",
                c.source, c.sigma[0], c.sigma[1], c.rho, c.parts, c.whole, c.gap, c.expected_gap
            )?;
            if c.degenerate() {
                write!(f, " degenerate: perfectly correlated, no gap")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "Symmetric monotonicity across models (Variance, f = X1 + X2, g = X2, h = X1)")?;
        for c in &self.symmetric_monotonicity {
            writeln!(
                f,
                "  [{}] sigma^2={} rho={}: BS(f) = ({:.6}, {:.6}), BS(g) = ({:.6}, {:.6}), BS(h) = ({:.6}, {:.6})",
                c.source, c.sigma2, c.rho, c.bs_f[0], c.bs_f[1], c.bs_g[0], c.bs_g[1], c.bs_h[0], c.bs_h[1]
            )?;
            writeln!(
                f,
                "    X1 in f and X2 in g share a distribution yet differ by {:.6}; forcing equality leaves {:.6} of Var(f) unallocated",
                c.cross_model_gap, c.imposed_shortfall
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sigmas_uncorrelated_gap() {
        let c = linearity_case([1.0, 1.0], 0.0).unwrap();
        assert!((c.gap - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(c.a_f, [1.0, 0.0]);
        assert!(!c.degenerate());
    }

    #[test]
    fn perfect_correlation_is_degenerate() {
        let c = linearity_case([1.0, 1.0], 1.0).unwrap();
        assert!(c.degenerate() && c.gap.abs() < 1e-12);
    }

    #[test]
    fn variance_fixture_matrices() {
        let c = symmetric_monotonicity_case(1.0, 0.5).unwrap();
        assert_eq!(c.bs_f, [1.5, 1.5]);
        assert_eq!(c.bs_g, [0.0, 1.0]);
        assert!((c.cross_model_gap - 0.5).abs() < 1e-15);
        assert!((c.imposed_shortfall - 1.0).abs() < 1e-15);
        assert_eq!(c.sh_check.assertion_held, Some(true));
    }

    #[test]
    fn report_mentions_degenerate_case() {
        let r = demonstrate_incompatibilities().unwrap();
        let text = r.to_string();
        assert!(text.contains("degenerate"));
        for c in &r.linearity {
            assert!((c.gap - c.expected_gap).abs() < 1e-10, "{c:?}");
        }
    }
}
