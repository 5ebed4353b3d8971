//! Long-only minimum-CVaR portfolios.
//!
//! The Rockafellar–Uryasev program
//!
//! ```text
//! min  ζ + 1/(αn) Σ_s u_s
//! s.t. u_s ≥ −x_s·c − ζ,  u_s ≥ 0,  Σ c_j = 1,  c_j ≥ 0
//! ```
//!
//! is solved with the dense simplex in [`simplex`]. The free threshold is
//! written `ζ = B − z` with `z ≥ 0` and `B = max|x| + 1`, so every scenario
//! row has a nonnegative right-hand side and only the budget row needs an
//! artificial variable.

pub mod simplex;

use thiserror::Error;

use crate::data_io::ScenarioMatrix;
use crate::risk_measures::{RiskError, RiskMeasureSpec};
use crate::scalar::Scalar;
pub use simplex::{Constraint, LinearProgram, LpSolution, LpStatus, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("CVaR at alpha = {alpha} needs at least {needed} scenarios, got {n}")]
    TailTooSmall { alpha: f64, n: usize, needed: usize },
    #[error("return matrix has no assets")]
    NoAssets,
    #[error("non-finite return at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("simplex stopped: {status} after {iterations} iterations; best weights {best:?}")]
    Solver {
        status: LpStatus,
        iterations: usize,
        best: Vec<f64>,
    },
    #[error("LP objective {lp} differs from CVaR {cvar} of the returned weights")]
    Identity { lp: f64, cvar: f64 },
    #[error("grid oracle supports at most 3 assets, got {0}")]
    TooManyAssets(usize),
    #[error("grid step must lie in (0, 1], got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvarPortfolio<T> {
    pub weights: Vec<T>,
    /// Empirical CVaR of `Xc` for the returned weights.
    pub optimal_cvar: T,
    /// Optimal value of the linear program.
    pub lp_objective: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum<T> {
    pub weights: Vec<T>,
    pub cvar: T,
}

fn checked_returns<T: Scalar>(returns: &ScenarioMatrix<T>) -> Result<Vec<Vec<f64>>, OptError> {
    if returns.n_cols() == 0 {
        return Err(OptError::NoAssets);
    }
    returns
        .rows()
        .enumerate()
        .map(|(row, r)| {
            r.iter()
                .enumerate()
                .map(|(column, v)| {
                    let v = v.as_f64();
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(OptError::NonFinite { row, column })
                    }
                })
                .collect()
        })
        .collect()
}

fn portfolio<T: Scalar>(returns: &ScenarioMatrix<T>, weights: &[T]) -> Vec<T> {
    returns
        .rows()
        .map(|r| r.iter().zip(weights).fold(T::zero(), |a, (&x, &c)| a + x * c))
        .collect()
}

fn cvar_spec<T: Scalar>(alpha: T, n: usize) -> Result<RiskMeasureSpec<T>, OptError> {
    let spec = RiskMeasureSpec::cvar(alpha)?;
    let a = alpha.as_f64();
    // αn ≥ 1, snapping products within 1e-9 of an integer
    let an = a * n as f64;
    if an < 1.0 - 1e-9 {
        return Err(OptError::TailTooSmall {
            alpha: a,
            n,
            needed: (1.0 / a - 1e-9).ceil() as usize,
        });
    }
    Ok(spec)
}

/// CVaR of each asset held alone.
pub fn single_asset_cvars<T: Scalar>(returns: &ScenarioMatrix<T>, alpha: T) -> Result<Vec<T>, OptError> {
    let spec = cvar_spec(alpha, returns.n_rows())?;
    (0..returns.n_cols())
        .map(|j| Ok(spec.evaluate(&returns.column(j))?))
        .collect()
}

/// Minimum-CVaR long-only weights. The LP optimum is checked against the
/// empirical CVaR of the returned weights to `1e-8`.
pub fn min_cvar_weights<T: Scalar>(returns: &ScenarioMatrix<T>, alpha: T) -> Result<CvarPortfolio<T>, OptError> {
    let x = checked_returns(returns)?;
    let (n, m) = (returns.n_rows(), returns.n_cols());
    let spec = cvar_spec(alpha, n)?;
    let a = alpha.as_f64();
    let big = x.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())) + 1.0;

    // variables: c (m), z (1), u (n)
    let vars = m + 1 + n;
    let mut objective = vec![0.0; vars];
    objective[m] = -1.0;
    for o in &mut objective[m + 1..] {
        *o = 1.0 / (a * n as f64);
    }
    let mut lp = LinearProgram::new(objective);
    for (s, row) in x.iter().enumerate() {
        let mut coef = vec![0.0; vars];
        for j in 0..m {
            coef[j] = -row[j];
        }
        coef[m] = 1.0;
        coef[m + 1 + s] = -1.0;
        lp.add(coef, Relation::Le, big);
    }
    let mut budget = vec![0.0; vars];
    budget[..m].iter_mut().for_each(|v| *v = 1.0);
    lp.add(budget, Relation::Eq, 1.0);

    let solution = lp.solve(50 * (n + m));
    let raw: Vec<f64> = solution.x[..m].to_vec();
    if solution.status != LpStatus::Optimal {
        return Err(OptError::Solver {
            status: solution.status,
            iterations: solution.iterations,
            best: raw,
        });
    }
    let clipped: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let weights: Vec<T> = clipped.iter().map(|&v| T::lit(v / total)).collect();
    let lp_objective = solution.objective + big;
    let cvar = spec.evaluate(&portfolio(returns, &weights))?;
    // weights are rounded to T before re-evaluation
    let tol = 1e-8f64.max(100.0 * T::epsilon().as_f64()) * lp_objective.abs().max(1.0);
    if (cvar.as_f64() - lp_objective).abs() > tol {
        return Err(OptError::Identity {
            lp: lp_objective,
            cvar: cvar.as_f64(),
        });
    }
    Ok(CvarPortfolio {
        weights,
        optimal_cvar: cvar,
        lp_objective: T::lit(lp_objective),
        iterations: solution.iterations,
    })
}

/// Exhaustive search over the simplex lattice with spacing `step`; the last
/// weight absorbs the remainder. The first minimizer in lattice order wins.
pub fn grid_oracle<T: Scalar>(returns: &ScenarioMatrix<T>, alpha: T, step: f64) -> Result<GridOptimum<T>, OptError> {
    let m = returns.n_cols();
    if m == 0 {
        return Err(OptError::NoAssets);
    }
    if m > 3 {
        return Err(OptError::TooManyAssets(m));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(OptError::InvalidStep(step));
    }
    checked_returns(returns)?;
    let spec = cvar_spec(alpha, returns.n_rows())?;
    let k = (1.0 / step + 1e-9).floor() as usize;
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    match m {
        1 => candidates.push(vec![1.0]),
        2 => {
            for i in 0..=k {
                let w = (i as f64 * step).min(1.0);
                candidates.push(vec![w, 1.0 - w]);
            }
        }
        _ => {
            for i in 0..=k {
                for j in 0..=k - i {
                    let (a, b) = (i as f64 * step, j as f64 * step);
                    candidates.push(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    let mut best: Option<GridOptimum<T>> = None;
    for c in candidates {
        let w: Vec<T> = c.iter().map(|&v| T::lit(v)).collect();
        let cvar = spec.evaluate(&portfolio(returns, &w))?;
        if best.as_ref().is_none_or(|b| cvar < b.cvar) {
            best = Some(GridOptimum { weights: w, cvar });
        }
    }
    Ok(best.expect("lattice is non-empty"))
}
