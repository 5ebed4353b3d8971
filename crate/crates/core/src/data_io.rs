//! Scenario matrices: CSV ingestion, log-return transforms, factor-model
//! residuals and BSM scenario construction.
//!
//! Missing cells are a hard error. Row labels (dates) are carried along as
//! opaque strings; alignment between files is by row index.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::models::{ModelError, ModelSpec};
use crate::scalar::Scalar;

/// Name given to the appended residual column.
pub const RESIDUAL_COLUMN: &str = "idiosyncratic";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: u64, expected: usize, found: usize },
    #[error("line {line}, column '{column}': missing value")]
    Missing { line: u64, column: String },
    #[error("line {line}, column '{column}': cannot parse '{value}' as a number")]
    NonNumeric { line: u64, column: String, value: String },
    #[error("line {line}, column '{column}': value is not finite")]
    NonFinite { line: u64, column: String },
    #[error("line {line}, column '{column}': log transform needs positive prices, found {value}")]
    NonPositive { line: u64, column: String, value: f64 },
    #[error("date column '{0}' not found in header")]
    UnknownDateColumn(String),
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("no numeric columns")]
    NoColumns,
    #[error("no data rows{0}")]
    NoRows(&'static str),
    #[error("row {row} has {found} values, matrix has {expected} columns")]
    Shape { row: usize, expected: usize, found: usize },
    #[error("value at row {row}, column {col} is not finite")]
    NonFiniteCell { row: usize, col: usize },
    #[error("length mismatch: {0}")]
    Length(String),
    #[error("model evaluation failed at row {row}: {source}")]
    Model {
        row: usize,
        #[source]
        source: ModelError,
    },
    #[error("invalid series: {0}")]
    Series(String),
}

/// `n` scenarios × `m` named features, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix<T> {
    columns: Vec<String>,
    data: Vec<T>,
    rows: usize,
    row_labels: Option<Vec<String>>,
}

impl<T: Scalar> ScenarioMatrix<T> {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self, DataError> {
        let m = columns.len();
        if m == 0 {
            return Err(DataError::NoColumns);
        }
        check_unique(&columns)?;
        if rows.is_empty() {
            return Err(DataError::NoRows(""));
        }
        let mut data = Vec::with_capacity(rows.len() * m);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(DataError::Shape {
                    row: r,
                    expected: m,
                    found: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteCell { row: r, col: c });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            columns,
            rows: rows.len(),
            data,
            row_labels: None,
        })
    }

    /// Builds a matrix with default column names `x1..xm`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, DataError> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(default_names(m), rows)
    }

    pub fn from_columns(columns: Vec<String>, values: Vec<Vec<T>>) -> Result<Self, DataError> {
        let n = values.first().map_or(0, Vec::len);
        if let Some(j) = values.iter().position(|c| c.len() != n) {
            return Err(DataError::Length(format!(
                "column {j} has {} values, column 0 has {n}",
                values[j].len()
            )));
        }
        let rows = (0..n).map(|i| values.iter().map(|c| c[i]).collect()).collect();
        Self::new(columns, rows)
    }

    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self, DataError> {
        if labels.len() != self.rows {
            return Err(DataError::Length(format!(
                "{} row labels for {} rows",
                labels.len(),
                self.rows
            )));
        }
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let m = self.n_cols();
        &self.data[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n_cols())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// The most recent scenario; the natural "current market" baseline.
    pub fn last_row(&self) -> &[T] {
        self.row(self.rows - 1)
    }

    /// Returns a new matrix with one more column appended.
    pub fn with_column(&self, name: &str, values: &[T]) -> Result<Self, DataError> {
        if values.len() != self.rows {
            return Err(DataError::Length(format!(
                "new column has {} values, matrix has {} rows",
                values.len(),
                self.rows
            )));
        }
        let mut columns = self.columns.clone();
        columns.push(name.to_string());
        check_unique(&columns)?;
        let rows = self
            .rows()
            .zip(values)
            .map(|(r, &v)| {
                let mut row = r.to_vec();
                row.push(v);
                row
            })
            .collect();
        let mut out = Self::new(columns, rows)?;
        out.row_labels = self.row_labels.clone();
        Ok(out)
    }

    /// Applies `p_t -> ln(p_{t+1} / p_t)` to every column. The result has
    /// one row fewer and keeps the later row's label.
    pub fn log_returns(&self) -> Result<Self, DataError> {
        if self.rows < 2 {
            return Err(DataError::NoRows(" after log-return transform"));
        }
        for (i, row) in self.rows().enumerate() {
            if let Some(j) = row.iter().position(|&p| p <= T::zero()) {
                return Err(DataError::NonPositive {
                    line: i as u64 + 2,
                    column: self.columns[j].clone(),
                    value: row[j].as_f64(),
                });
            }
        }
        let rows = (1..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(self.row(i - 1))
                    .map(|(&next, &prev)| (next / prev).ln())
                    .collect()
            })
            .collect();
        let mut out = Self::new(self.columns.clone(), rows)?;
        out.row_labels = self.row_labels.as_ref().map(|l| l[1..].to_vec());
        Ok(out)
    }

    /// Writes RFC-4180 CSV with shortest round-trip decimal formatting.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = Vec::new();
        if self.row_labels.is_some() {
            header.push("date".into());
        }
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, row) in self.rows().enumerate() {
            let mut rec: Vec<String> = Vec::with_capacity(row.len() + 1);
            if let Some(labels) = &self.row_labels {
                rec.push(labels[i].clone());
            }
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn default_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

fn check_unique(columns: &[String]) -> Result<(), DataError> {
    let mut seen = std::collections::HashSet::new();
    for c in columns {
        if !seen.insert(c.as_str()) {
            return Err(DataError::DuplicateColumn(c.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    #[default]
    None,
    LogReturn,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Column holding row labels; excluded from the numeric matrix.
    pub date_column: Option<String>,
    pub transform: Transform,
}

/// Parses CSV text from any reader. Line numbers in errors are 1-based file
/// lines (the header is line 1).
pub fn read_csv<T: Scalar, R: Read>(reader: R, options: &LoadOptions) -> Result<ScenarioMatrix<T>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(&e))?
        .iter()
        .map(str::to_string)
        .collect();
    let date_idx = match &options.date_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::UnknownDateColumn(name.clone()))?,
        ),
        None => None,
    };
    let numeric: Vec<usize> = (0..header.len()).filter(|&j| Some(j) != date_idx).collect();
    if numeric.is_empty() {
        return Err(DataError::NoColumns);
    }
    let columns: Vec<String> = numeric.iter().map(|&j| header[j].clone()).collect();
    check_unique(&columns)?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(DataError::Ragged {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(numeric.len());
        for &j in &numeric {
            let cell = &record[j];
            if cell.is_empty() {
                return Err(DataError::Missing {
                    line,
                    column: header[j].clone(),
                });
            }
            let v: T = cell.parse().map_err(|_| DataError::NonNumeric {
                line,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    line,
                    column: header[j].clone(),
                });
            }
            row.push(v);
        }
        if let Some(d) = date_idx {
            labels.push(record[d].to_string());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::NoRows(""));
    }
    let mut matrix = ScenarioMatrix::new(columns, rows)?;
    if date_idx.is_some() {
        matrix = matrix.with_row_labels(labels)?;
    }
    match options.transform {
        Transform::None => Ok(matrix),
        Transform::LogReturn => matrix.log_returns(),
    }
}

fn csv_err(e: &csv::Error) -> DataError {
    DataError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, options: &LoadOptions) -> Result<ScenarioMatrix<T>, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(std::io::BufReader::new(file), options)
}

/// Residuals `ε̂_i = y_i − f(x_i)` appended as the column `idiosyncratic`.
///
/// Pair the result with [`ModelSpec::residual_augmented`] and a residual
/// baseline of 0.
pub fn compute_residuals<T: Scalar>(
    model: &ModelSpec<T>,
    x: &ScenarioMatrix<T>,
    y: &[T],
) -> Result<ScenarioMatrix<T>, DataError> {
    if y.len() != x.n_rows() {
        return Err(DataError::Length(format!(
            "{} targets for {} scenarios",
            y.len(),
            x.n_rows()
        )));
    }
    if model.feature_count() != x.n_cols() {
        return Err(DataError::Length(format!(
            "model takes {} features, matrix has {}",
            model.feature_count(),
            x.n_cols()
        )));
    }
    let residuals = x
        .rows()
        .zip(y)
        .enumerate()
        .map(|(row, (r, &yi))| {
            model
                .evaluate(r)
                .map(|f| yi - f)
                .map_err(|source| DataError::Model { row, source })
        })
        .collect::<Result<Vec<T>, _>>()?;
    x.with_column(RESIDUAL_COLUMN, &residuals)
}

/// Scenario set for the one-day-ahead call-option risk question.
#[derive(Debug, Clone)]
pub struct BsmScenarios<T> {
    /// Rows `(ln(S_T δ_i), ln σ_{i+1}, ln r_{i+1})`.
    pub scenarios: ScenarioMatrix<T>,
    /// `(ln S_T, ln σ_T, ln r_T)`: today's market.
    pub baseline: Vec<T>,
    pub model: ModelSpec<T>,
}

/// Builds scenarios from aligned daily series of price, volatility and
/// rate levels with `δ_i = S_{i+1}/S_i`, paired with `σ_{i+1}`, `r_{i+1}`.
pub fn build_bsm_scenarios<T: Scalar>(
    prices: &[T],
    vols: &[T],
    rates: &[T],
    strike: T,
    maturity: T,
) -> Result<BsmScenarios<T>, DataError> {
    let len = prices.len();
    if vols.len() != len || rates.len() != len {
        return Err(DataError::Length(format!(
            "series lengths differ: prices {len}, vols {}, rates {}",
            vols.len(),
            rates.len()
        )));
    }
    if len < 2 {
        return Err(DataError::Series("need at least two observations".into()));
    }
    for (name, s) in [("price", prices), ("volatility", vols), ("rate", rates)] {
        if let Some(i) = s.iter().position(|v| !(v.is_finite() && *v > T::zero())) {
            return Err(DataError::Series(format!("{name} at index {i} must be positive")));
        }
    }
    let model = ModelSpec::bsm_call(strike, maturity).map_err(|e| DataError::Series(e.to_string()))?;
    let spot = prices[len - 1];
    let rows = (0..len - 1)
        .map(|i| {
            let delta = prices[i + 1] / prices[i];
            vec![(spot * delta).ln(), vols[i + 1].ln(), rates[i + 1].ln()]
        })
        .collect();
    let scenarios = ScenarioMatrix::new(
        vec!["log_price".into(), "log_vol".into(), "log_rate".into()],
        rows,
    )?;
    let baseline = vec![spot.ln(), vols[len - 1].ln(), rates[len - 1].ln()];
    Ok(BsmScenarios {
        scenarios,
        baseline,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, options: &LoadOptions) -> Result<ScenarioMatrix<f64>, DataError> {
        read_csv(text.as_bytes(), options)
    }

    #[test]
    fn log_returns_of_exponential_prices() {
        let e = std::f64::consts::E;
        let text = format!("p\n1\n{}\n{}\n", e, e * e);
        let m = parse(
            &text,
            &LoadOptions {
                transform: Transform::LogReturn,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.n_rows(), 2);
        for v in m.column(0) {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let m = parse(
            "a,b\n5,2\n5,2\n5,2\n",
            &LoadOptions {
                transform: Transform::LogReturn,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.rows().all(|r| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn blank_cell_reports_coordinates() {
        match parse("a,b\n1,2\n3,\n", &LoadOptions::default()) {
            Err(DataError::Missing { line, column }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric() {
        assert!(matches!(
            parse("a,b\n1,2\n3\n", &LoadOptions::default()),
            Err(DataError::Ragged { line: 3, expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse("a,b\n1,x\n", &LoadOptions::default()),
            Err(DataError::NonNumeric { line: 2, .. })
        ));
        assert!(matches!(
            parse("a\n1\n-2\n", &LoadOptions { transform: Transform::LogReturn, ..Default::default() }),
            Err(DataError::NonPositive { line: 3, .. })
        ));
        assert!(matches!(
            parse("a,a\n1,2\n", &LoadOptions::default()),
            Err(DataError::DuplicateColumn(_))
        ));
        assert!(matches!(parse("a\n", &LoadOptions::default()), Err(DataError::NoRows(_))));
    }

    #[test]
    fn date_column_becomes_labels() {
        let opts = LoadOptions {
            date_column: Some("date".into()),
            transform: Transform::LogReturn,
        };
        let m = parse("date,a\n2023-01-02,1\n2023-01-03,2\n", &opts).unwrap();
        assert_eq!(m.columns(), ["a"]);
        assert_eq!(m.row_labels().unwrap(), ["2023-01-03"]);
        assert!((m.get(0, 0) - 2f64.ln()).abs() < 1e-15);
        let missing = LoadOptions {
            date_column: Some("when".into()),
            ..Default::default()
        };
        assert!(matches!(parse("a\n1\n", &missing), Err(DataError::UnknownDateColumn(_))));
    }

    #[test]
    fn residuals() {
        let x = ScenarioMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![0.0, 3.0]]).unwrap();
        let c = vec![0.3, -0.2];
        let e = [0.01, -0.02, 0.005];
        let y: Vec<f64> = x
            .rows()
            .zip(&e)
            .map(|(r, ei)| c[0] * r[0] + c[1] * r[1] + ei)
            .collect();
        let aug = compute_residuals(&ModelSpec::linear(c.clone()), &x, &y).unwrap();
        assert_eq!(aug.columns().last().unwrap(), RESIDUAL_COLUMN);
        for (got, want) in aug.column(2).iter().zip(&e) {
            assert!((got - want).abs() < 1e-12);
        }
        // zero model: residuals equal the targets
        let zero = compute_residuals(&ModelSpec::linear(vec![0.0, 0.0]), &x, &y).unwrap();
        assert_eq!(zero.column(2), y);
        // perfect fit
        let exact: Vec<f64> = x.rows().map(|r| c[0] * r[0] + c[1] * r[1]).collect();
        let fit = compute_residuals(&ModelSpec::linear(c.clone()), &x, &exact).unwrap();
        assert!(fit.column(2).iter().all(|&v| v == 0.0));
        // augmented model reproduces y exactly
        let model = ModelSpec::residual_augmented(ModelSpec::linear(c));
        for (r, yi) in aug.rows().zip(&y) {
            assert_eq!(model.evaluate(r).unwrap(), *yi);
        }
        assert!(compute_residuals(&ModelSpec::linear(vec![1.0]), &x, &y).is_err());
        assert!(compute_residuals(&ModelSpec::linear(vec![1.0, 1.0]), &x, &y[..2]).is_err());
    }

    #[test]
    fn bsm_scenarios_constant_and_two_rows() {
        let s = build_bsm_scenarios(&[890.0; 5], &[0.4; 5], &[0.02; 5], 800.0, 30.0 / 365.0).unwrap();
        assert_eq!(s.scenarios.n_rows(), 4);
        assert!(s.scenarios.column(0).iter().all(|&v| v == 890f64.ln()));
        assert_eq!(s.baseline, vec![890f64.ln(), 0.4f64.ln(), 0.02f64.ln()]);
        let two = build_bsm_scenarios(&[100.0, 110.0], &[0.2, 0.3], &[0.01, 0.02], 100.0, 0.1).unwrap();
        assert_eq!(two.scenarios.n_rows(), 1);
        let row = two.scenarios.row(0);
        assert!((row[0] - (110.0f64 * 1.1).ln()).abs() < 1e-12);
        assert_eq!(row[1], 0.3f64.ln());
        assert_eq!(row[2], 0.02f64.ln());
        assert!(build_bsm_scenarios(&[1.0], &[0.2], &[0.01], 1.0, 0.1).is_err());
        assert!(build_bsm_scenarios(&[1.0, 2.0], &[0.2], &[0.01, 0.1], 1.0, 0.1).is_err());
        assert!(build_bsm_scenarios(&[1.0, 2.0], &[0.2, 0.1], &[0.01, 0.0], 1.0, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20),
                          labelled in any::<bool>()) {
            let mut m = ScenarioMatrix::new(vec!["a".into(), "b c".into(), "d,e".into()], rows).unwrap();
            let opts = if labelled {
                let labels = (0..m.n_rows()).map(|i| format!("2023-01-{:02}", i + 1)).collect();
                m = m.with_row_labels(labels).unwrap();
                LoadOptions { date_column: Some("date".into()), ..Default::default() }
            } else {
                LoadOptions::default()
            };
            let back: ScenarioMatrix<f64> = read_csv(m.to_csv_string().as_bytes(), &opts).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
