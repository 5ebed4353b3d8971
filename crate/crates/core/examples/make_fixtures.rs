//! Regenerates the bundled CSV/JSON files under `data/`.
//!
//! cargo run --example make_fixtures

use std::fs;
use std::path::Path;

use riskshap::data_io::ScenarioMatrix;
use riskshap::models::{save_model, ModelSpec};
use riskshap::synthetic::{correlated_normals, stressed_market_year};

/// Weekday dates from 2023-01-02 (a Monday).
fn business_days(n: usize) -> Vec<String> {
    let month_len = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let (mut y, mut m, mut d, mut weekday) = (2023, 1usize, 2u32, 0u32);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if weekday < 5 {
            out.push(format!("{y:04}-{m:02}-{d:02}"));
        }
        weekday = (weekday + 1) % 7;
        d += 1;
        if d > month_len[m - 1] {
            d = 1;
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
    }
    out
}

fn cov_from(sd: &[f64], corr: &[f64]) -> Vec<f64> {
    let m = sd.len();
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            c[i * m + j] = corr[i * m + j] * sd[i] * sd[j];
        }
    }
    c
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&root)?;

    let history = stressed_market_year(253, 890.0, 2023);
    history
        .to_matrix()
        .with_row_labels(business_days(253))?
        .save_csv(root.join("market_year.csv"))?;

    let two = correlated_normals(1_000, &[0.0004, 0.0006], &cov_from(&[0.01, 0.02], &[1.0, 0.3, 0.3, 1.0]), 1)?;
    ScenarioMatrix::new(vec!["bonds".into(), "equities".into()], two.rows().map(|r| r.to_vec()).collect())?
        .with_row_labels(business_days(1_000))?
        .save_csv(root.join("two_assets.csv"))?;
    save_model(&ModelSpec::linear(vec![0.6, 0.4]), root.join("two_assets_model.json"))?;

    let sd = [0.018, 0.013, 0.035, 0.016, 0.028];
    #[rustfmt::skip]
    let corr = [
        1.00, 0.20, 0.35, 0.40, 0.30,
        0.20, 1.00, 0.10, 0.25, 0.10,
        0.35, 0.10, 1.00, 0.20, 0.30,
        0.40, 0.25, 0.20, 1.00, 0.20,
        0.30, 0.10, 0.30, 0.20, 1.00,
    ];
    let five = correlated_normals(250, &[0.0008, 0.0002, 0.0015, 0.0005, 0.0010], &cov_from(&sd, &corr), 5)?;
    let names = ["tech", "pharma", "auto", "bank", "media"];
    ScenarioMatrix::new(names.iter().map(|s| s.to_string()).collect(), five.rows().map(|r| r.to_vec()).collect())?
        .with_row_labels(business_days(250))?
        .save_csv(root.join("five_assets.csv"))?;

    // two factor returns and one stock driven by them plus noise
    let f = correlated_normals(500, &[0.0, 0.0, 0.0], &cov_from(&[0.012, 0.009, 0.006], &[1.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 1.0]), 9)?;
    let factors: Vec<Vec<f64>> = f.rows().map(|r| vec![r[0], r[1]]).collect();
    let stock: Vec<Vec<f64>> = f.rows().map(|r| vec![1.2 * r[0] + 0.4 * r[1] + r[2]]).collect();
    ScenarioMatrix::new(vec!["technology".into(), "financial".into()], factors)?
        .save_csv(root.join("factors.csv"))?;
    ScenarioMatrix::new(vec!["stock".into()], stock)?.save_csv(root.join("stock.csv"))?;
    save_model(&ModelSpec::linear(vec![1.2, 0.4]), root.join("factor_model.json"))?;

    eprintln!("wrote fixtures to {}", root.display());
    Ok(())
}
