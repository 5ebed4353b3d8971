//! Euler (gradient) risk allocation for linear portfolios.
//!
//! For a risk measure that is positively homogeneous of degree one,
//! `ρ(Xc) = Σ_i c_i ∂ρ/∂c_i`. This gives a complete allocation that differs
//! from the Shapley one; it exists here as a comparison.

use super::ShapleyError;
use crate::data_io::ScenarioMatrix;
use crate::models::ModelSpec;
use crate::risk_measures::{tail_count, RiskKind, RiskMeasureSpec};
use crate::scalar::{cmp_finite, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerAllocation<T> {
    pub allocations: Vec<T>,
    /// `ρ̂(Xc)` under the crate's estimator for the measure.
    pub portfolio_risk: T,
    /// `Σ allocations − portfolio_risk`. Zero up to round-off for StdDev;
    /// for CVaR nonzero only when `αn` is fractional.
    pub residual: T,
}

/// Euler contributions `A_i` of a linear portfolio.
///
/// - StdDev: `A_i = c_i Σ_j c_j Ĉov(X_i, X_j) / StdDev(Xc)` (population
///   covariance; all zero for a riskless portfolio).
/// - CVaR: `A_i = −mean_{s∈T} c_i x_{s,i}` over the `⌈αn⌉` worst scenarios
///   `T` of the portfolio, ties broken by scenario index.
pub fn euler_allocation<T: Scalar>(
    returns: &ScenarioMatrix<T>,
    weights: &[T],
    spec: &RiskMeasureSpec<T>,
) -> Result<EulerAllocation<T>, ShapleyError> {
    let m = returns.n_cols();
    if weights.len() != m {
        return Err(ShapleyError::Invalid(format!(
            "{} weights for {m} assets",
            weights.len()
        )));
    }
    spec.validate()
        .map_err(|e| ShapleyError::Invalid(e.to_string()))?;
    let n = returns.n_rows();
    let portfolio: Vec<T> = returns
        .rows()
        .map(|r| r.iter().zip(weights).fold(T::zero(), |a, (&x, &c)| a + x * c))
        .collect();
    let portfolio_risk = spec
        .evaluate(&portfolio)
        .map_err(|e| ShapleyError::Invalid(e.to_string()))?;

    let allocations = match spec.kind {
        RiskKind::StdDev => {
            let nf = T::from_count(n);
            let means: Vec<T> = (0..m)
                .map(|j| returns.rows().map(|r| r[j]).sum::<T>() / nf)
                .collect();
            if portfolio_risk == T::zero() {
                vec![T::zero(); m]
            } else {
                let pmean = portfolio.iter().copied().sum::<T>() / nf;
                // c_i Cov(X_i, Xc) = c_i Σ_j c_j Cov(X_i, X_j)
                (0..m)
                    .map(|i| {
                        let cov: T = returns
                            .rows()
                            .zip(&portfolio)
                            .map(|(r, &p)| (r[i] - means[i]) * (p - pmean))
                            .sum::<T>()
                            / nf;
                        weights[i] * cov / portfolio_risk
                    })
                    .collect()
            }
        }
        RiskKind::ConditionalValueAtRisk => {
            let k = tail_count(spec.alpha.unwrap(), n);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| cmp_finite(&portfolio[a], &portfolio[b]).then(a.cmp(&b)));
            let tail = &order[..k];
            let kf = T::from_count(k);
            (0..m)
                .map(|i| -tail.iter().map(|&s| weights[i] * returns.get(s, i)).sum::<T>() / kf)
                .collect()
        }
        other => {
            return Err(ShapleyError::Invalid(format!(
                "Euler allocation needs a degree-one homogeneous measure (StdDev or CVaR), not {other}"
            )))
        }
    };
    let residual = allocations.iter().copied().sum::<T>() - portfolio_risk;
    Ok(EulerAllocation {
        allocations,
        portfolio_risk,
        residual,
    })
}

/// Euler allocation for a model, which must be a linear portfolio.
pub fn euler_allocation_for_model<T: Scalar>(
    model: &ModelSpec<T>,
    returns: &ScenarioMatrix<T>,
    spec: &RiskMeasureSpec<T>,
) -> Result<EulerAllocation<T>, ShapleyError> {
    match model.linear_weights() {
        Some(w) => euler_allocation(returns, w, spec),
        None => Err(ShapleyError::NonLinearModel(model.variant_name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_asset_gets_everything() {
        let x = ScenarioMatrix::from_rows(vec![vec![0.01f64], vec![-0.03], vec![0.02], vec![-0.01]]).unwrap();
        for spec in [RiskMeasureSpec::std_dev(), RiskMeasureSpec::cvar(0.5).unwrap()] {
            let e = euler_allocation(&x, &[0.7], &spec).unwrap();
            assert!((e.allocations[0] - e.portfolio_risk).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_homogeneous_and_nonlinear() {
        let x = ScenarioMatrix::from_rows(vec![vec![0.01], vec![-0.03]]).unwrap();
        assert!(euler_allocation(&x, &[1.0], &RiskMeasureSpec::variance()).is_err());
        assert!(euler_allocation(&x, &[1.0], &RiskMeasureSpec::value_at_risk(0.5).unwrap()).is_err());
        assert!(euler_allocation(&x, &[1.0, 1.0], &RiskMeasureSpec::std_dev()).is_err());
        let bsm = ModelSpec::bsm_call(1.0, 1.0).unwrap();
        assert!(matches!(
            euler_allocation_for_model(&bsm, &x, &RiskMeasureSpec::std_dev()),
            Err(ShapleyError::NonLinearModel("bsm_call"))
        ));
    }

    #[test]
    fn cvar_tail_ties_break_by_index() {
        // scenarios 0 and 1 tie on the portfolio; k = 1 picks scenario 0
        let x = ScenarioMatrix::from_rows(vec![vec![-0.02, 0.0], vec![0.0, -0.02], vec![0.05, 0.05]]).unwrap();
        let e = euler_allocation(&x, &[1.0, 1.0], &RiskMeasureSpec::cvar(0.3).unwrap()).unwrap();
        assert_eq!(e.allocations, vec![0.02, -0.0]);
    }
}
