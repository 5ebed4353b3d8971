//! Independent reference implementations used by the integration and
//! acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskshap::shapley::{Coalition, CooperativeGame};

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shapley values straight from the textbook formula: for each player, a
/// loop over all subsets of the others with factorial weights.
pub fn naive_shapley<G: CooperativeGame<f64>>(game: &G) -> Vec<f64> {
    let m = game.players();
    let v = |mask: u64| game.value(&Coalition::from_mask(m, mask)).unwrap();
    let mut out = vec![0.0; m];
    for (i, slot) in out.iter_mut().enumerate() {
        for mask in 0u64..(1 << m) {
            if mask & (1 << i) != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = factorial(s) * factorial(m - s - 1) / factorial(m);
            *slot += w * (v(mask | (1 << i)) - v(mask));
        }
    }
    out
}

/// Standard normal density.
fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Call price as the discounted expected payoff under the risk-neutral
/// lognormal law, integrated with composite Simpson over the exercise
/// region `z > z*` (the payoff is smooth there).
pub fn bsm_quadrature(spot: f64, strike: f64, tau: f64, sigma: f64, rate: f64) -> f64 {
    let drift = (rate - 0.5 * sigma * sigma) * tau;
    let vol = sigma * tau.sqrt();
    let z_star = ((strike / spot).ln() - drift) / vol;
    let lo = z_star.max(-14.0);
    let hi = 14.0f64.max(lo + 1.0);
    let payoff = |z: f64| (spot * (drift + vol * z).exp() - strike).max(0.0) * phi(z);
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let mut acc = payoff(lo) + payoff(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * payoff(lo + k as f64 * h);
    }
    (-rate * tau).exp() * acc * h / 3.0
}

/// Random correlation-style covariance `A Aᵀ + δI` with entries of order 1.
pub fn random_covariance(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let a: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            c[i * m + j] = (0..m).map(|k| a[i * m + k] * a[j * m + k]).sum::<f64>();
        }
        c[i * m + i] += 0.1;
    }
    c
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("riskshap-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["riskshap"];
    full.extend_from_slice(args);
    let code = riskshap::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
