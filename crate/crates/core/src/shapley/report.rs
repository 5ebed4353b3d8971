use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled { permutations: usize, seed: u64 },
}

/// Per-feature attributions plus the bookkeeping needed to audit them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport<T> {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<String>,
    pub attributions: Vec<T>,
    /// `v(M)`
    pub v_full: T,
    /// `v(∅)`
    pub v_empty: T,
    pub method: Method,
    /// Standard error per feature; present for sampled reports only.
    pub stderr: Option<Vec<T>>,
    /// `|Σ attributions − (v_full − v_empty)|`
    pub completeness_residual: T,
}

impl<T: Scalar> AttributionReport<T> {
    pub(crate) fn assemble(attributions: Vec<T>, v_full: T, v_empty: T, method: Method, stderr: Option<Vec<T>>) -> Self {
        let completeness_residual = completeness_gap(&attributions, v_full, v_empty);
        Self {
            features: Vec::new(),
            attributions,
            v_full,
            v_empty,
            method,
            stderr,
            completeness_residual,
        }
    }

    pub fn with_features(mut self, names: &[String]) -> Self {
        self.features = names.to_vec();
        self
    }

    pub fn players(&self) -> usize {
        self.attributions.len()
    }

    pub fn total(&self) -> T {
        self.v_full - self.v_empty
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    /// Feature label for index `i`, falling back to `x{i+1}`.
    pub fn feature_name(&self, i: usize) -> String {
        self.features
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("x{}", i + 1))
    }

    /// Root-sum-square of the per-feature standard errors.
    pub fn aggregate_stderr(&self) -> Option<T> {
        self.stderr
            .as_ref()
            .map(|s| s.iter().map(|&e| e * e).sum::<T>().sqrt())
    }
}

impl<T: Scalar + Serialize> AttributionReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per feature: `feature,attribution[,stderr]`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let sampled = self.stderr.is_some();
        let mut header = vec!["feature", "attribution"];
        if sampled {
            header.push("stderr");
        }
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.players() {
            let mut rec = vec![self.feature_name(i), self.attributions[i].to_string()];
            if let Some(s) = &self.stderr {
                rec.push(s[i].to_string());
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub(crate) fn completeness_gap<T: Scalar>(attributions: &[T], v_full: T, v_empty: T) -> T {
    (attributions.iter().copied().sum::<T>() - (v_full - v_empty)).abs()
}
