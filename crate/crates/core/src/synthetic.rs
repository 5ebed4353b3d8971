//! Seeded synthetic data: correlated Gaussian returns and a one-year
//! price/volatility/rate history for option scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data_io::{DataError, ScenarioMatrix};
use crate::linalg;

/// `n` draws from `N(means, cov)` (row-major `m × m` covariance) with
/// columns `x1..xm`.
pub fn correlated_normals(n: usize, means: &[f64], cov: &[f64], seed: u64) -> Result<ScenarioMatrix<f64>, DataError> {
    let m = means.len();
    if cov.len() != m * m {
        return Err(DataError::Length(format!("covariance has {} entries for {m} means", cov.len())));
    }
    let l = linalg::semidefinite_cholesky(cov, m, 1e-12)
        .map_err(|j| DataError::Series(format!("covariance not PSD at column {j}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            (0..m)
                .map(|i| means[i] + (0..=i).map(|k| l[i * m + k] * z[k]).sum::<f64>())
                .collect()
        })
        .collect();
    ScenarioMatrix::from_rows(rows)
}

/// Daily levels of an index, its implied volatility and a short rate.
#[derive(Debug, Clone)]
pub struct MarketHistory {
    pub prices: Vec<f64>,
    pub vols: Vec<f64>,
    pub rates: Vec<f64>,
}

impl MarketHistory {
    pub fn to_matrix(&self) -> ScenarioMatrix<f64> {
        ScenarioMatrix::from_columns(
            vec!["price".into(), "vol".into(), "rate".into()],
            vec![self.prices.clone(), self.vols.clone(), self.rates.clone()],
        )
        .expect("aligned series")
    }
}

/// A stressed trading year: lognormal prices with 2.5% daily volatility
/// ending at `final_price`, log-volatility mean-reverting around 45% with
/// a wide stationary band, and a rate that barely moves around 2%.
pub fn stressed_market_year(days: usize, final_price: f64, seed: u64) -> MarketHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_price = 0.0f64;
    let mut prices = Vec::with_capacity(days);
    let mut log_vol = 0.45f64.ln();
    let mut vols = Vec::with_capacity(days);
    let mut rates = Vec::with_capacity(days);
    let (kappa, vol_of_vol) = (0.05, 0.08);
    for _ in 0..days {
        prices.push(log_price);
        vols.push(log_vol.exp());
        let z: f64 = rng.sample(StandardNormal);
        rates.push(0.02 * (1.0 + 0.002 * z));
        let zp: f64 = rng.sample(StandardNormal);
        log_price += -0.002 + 0.025 * zp;
        let zv: f64 = rng.sample(StandardNormal);
        log_vol += kappa * (0.45f64.ln() - log_vol) + vol_of_vol * zv;
    }
    let shift = final_price.ln() - prices[days - 1];
    let prices = prices.into_iter().map(|lp| (lp + shift).exp()).collect();
    MarketHistory { prices, vols, rates }
}
