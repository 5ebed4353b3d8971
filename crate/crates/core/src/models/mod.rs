//! The functions `f` whose output risk is attributed: linear portfolios, the
//! BSM call on log inputs, ReLU feed-forward networks, and the
//! residual-augmented wrapper `f̃(x, ε) = f(x) + ε`.

mod bsm;
mod schema;

use thiserror::Error;

use crate::scalar::Scalar;

pub use bsm::{bsm_price, norm_cdf};
pub use schema::{load_model, parse_model, save_model, to_json, ModelLoadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at {location}")]
    NonFinite { location: String },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

/// Dense layer `y = x W + b` with `W` stored row-major as `inputs × outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn new(weights: Vec<Vec<T>>, bias: Vec<T>) -> Result<Self, ModelError> {
        let inputs = weights.len();
        let outputs = bias.len();
        if inputs == 0 || outputs == 0 {
            return Err(ModelError::InvalidParameter("empty layer".into()));
        }
        if let Some((row, r)) = weights.iter().enumerate().find(|(_, r)| r.len() != outputs) {
            return Err(ModelError::InvalidParameter(format!(
                "weight row {row} has {} columns, bias has {outputs}",
                r.len()
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            weights: weights.into_iter().flatten().collect(),
            bias,
        })
    }

    fn forward(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend_from_slice(&self.bias);
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
    }
}

/// Affine input transform `(x − mean) / scale` applied before the first layer.
#[derive(Debug, Clone, PartialEq)]
pub struct InputNormalization<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

/// ReLU hidden layers with a linear output layer of width one.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward<T> {
    pub layers: Vec<DenseLayer<T>>,
    pub normalization: Option<InputNormalization<T>>,
}

impl<T: Scalar> FeedForward<T> {
    pub fn new(
        layers: Vec<DenseLayer<T>>,
        normalization: Option<InputNormalization<T>>,
    ) -> Result<Self, ModelError> {
        let Some(first) = layers.first() else {
            return Err(ModelError::InvalidParameter("network has no layers".into()));
        };
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(ModelError::InvalidParameter(format!(
                    "layer {k} has {} outputs but layer {} has {} inputs",
                    pair[0].outputs,
                    k + 1,
                    pair[1].inputs
                )));
            }
        }
        let last = layers.last().unwrap();
        if last.outputs != 1 {
            return Err(ModelError::InvalidParameter(format!(
                "output layer must have width 1, has {}",
                last.outputs
            )));
        }
        if let Some(norm) = &normalization {
            if norm.mean.len() != first.inputs || norm.scale.len() != first.inputs {
                return Err(ModelError::InvalidParameter(
                    "input normalization length differs from network input width".into(),
                ));
            }
            if norm.scale.iter().any(|s| !(s.is_finite() && *s != T::zero())) {
                return Err(ModelError::InvalidParameter(
                    "input normalization scale must be finite and nonzero".into(),
                ));
            }
        }
        Ok(Self {
            layers,
            normalization,
        })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    fn evaluate(&self, x: &[T]) -> Result<T, ModelError> {
        let mut current: Vec<T> = match &self.normalization {
            Some(norm) => x
                .iter()
                .zip(norm.mean.iter().zip(&norm.scale))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect(),
            None => x.to_vec(),
        };
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.forward(&current, &mut next);
            if k < last {
                for v in next.iter_mut() {
                    *v = v.max(T::zero());
                }
            }
            if let Some(unit) = next.iter().position(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite {
                    location: format!("layer {k}, unit {unit}"),
                });
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current[0])
    }
}

/// A model `f` mapping an m-vector of features to one scalar.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec<T> {
    /// `f(x) = c · x`.
    LinearPortfolio { weights: Vec<T> },
    /// BSM call on `(ln S, ln σ, ln r)`.
    BsmCall { strike: T, maturity: T },
    FeedForward(FeedForward<T>),
    /// `f̃(x, ε) = inner(x) + ε`; the residual is the last feature.
    ResidualAugmented { inner: Box<ModelSpec<T>> },
}

impl<T: Scalar> ModelSpec<T> {
    pub fn linear(weights: Vec<T>) -> Self {
        ModelSpec::LinearPortfolio { weights }
    }

    pub fn bsm_call(strike: T, maturity: T) -> Result<Self, ModelError> {
        if !(strike.is_finite() && strike > T::zero()) {
            return Err(ModelError::InvalidParameter("strike must be > 0".into()));
        }
        if !(maturity.is_finite() && maturity > T::zero()) {
            return Err(ModelError::InvalidParameter("maturity must be > 0".into()));
        }
        Ok(ModelSpec::BsmCall { strike, maturity })
    }

    pub fn residual_augmented(inner: ModelSpec<T>) -> Self {
        ModelSpec::ResidualAugmented {
            inner: Box::new(inner),
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            ModelSpec::LinearPortfolio { weights } => weights.len(),
            ModelSpec::BsmCall { .. } => 3,
            ModelSpec::FeedForward(net) => net.input_width(),
            ModelSpec::ResidualAugmented { inner } => inner.feature_count() + 1,
        }
    }

    /// Weights of a linear portfolio, or `None` for any other model.
    pub fn linear_weights(&self) -> Option<&[T]> {
        match self {
            ModelSpec::LinearPortfolio { weights } => Some(weights),
            _ => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ModelSpec::LinearPortfolio { .. } => "linear",
            ModelSpec::BsmCall { .. } => "bsm_call",
            ModelSpec::FeedForward(_) => "mlp",
            ModelSpec::ResidualAugmented { .. } => "residual_augmented",
        }
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T, ModelError> {
        let expected = self.feature_count();
        if x.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite {
                location: format!("input feature {i}"),
            });
        }
        self.evaluate_unchecked(x)
    }

    fn evaluate_unchecked(&self, x: &[T]) -> Result<T, ModelError> {
        match self {
            ModelSpec::LinearPortfolio { weights } => {
                Ok(weights.iter().zip(x).fold(T::zero(), |acc, (&c, &v)| acc + c * v))
            }
            ModelSpec::BsmCall { strike, maturity } => {
                let spot = x[0].exp();
                let sigma = x[1].exp();
                let rate = x[2].exp();
                for (name, v) in [("spot", spot), ("volatility", sigma), ("rate", rate)] {
                    if !v.is_finite() {
                        return Err(ModelError::NonFinite {
                            location: format!("exp(log {name})"),
                        });
                    }
                }
                bsm_price(spot, *strike, *maturity, sigma, rate)
            }
            ModelSpec::FeedForward(net) => net.evaluate(x),
            ModelSpec::ResidualAugmented { inner } => {
                let m = x.len() - 1;
                let y = inner.evaluate_unchecked(&x[..m])? + x[m];
                if !y.is_finite() {
                    return Err(ModelError::NonFinite {
                        location: "residual sum".into(),
                    });
                }
                Ok(y)
            }
        }
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ModelSpec<U> {
        let c = |v: &T| U::lit(v.as_f64());
        let cv = |v: &[T]| v.iter().map(c).collect::<Vec<U>>();
        match self {
            ModelSpec::LinearPortfolio { weights } => ModelSpec::LinearPortfolio { weights: cv(weights) },
            ModelSpec::BsmCall { strike, maturity } => ModelSpec::BsmCall {
                strike: c(strike),
                maturity: c(maturity),
            },
            ModelSpec::FeedForward(net) => ModelSpec::FeedForward(FeedForward {
                layers: net
                    .layers
                    .iter()
                    .map(|l| DenseLayer {
                        inputs: l.inputs,
                        outputs: l.outputs,
                        weights: cv(&l.weights),
                        bias: cv(&l.bias),
                    })
                    .collect(),
                normalization: net.normalization.as_ref().map(|n| InputNormalization {
                    mean: cv(&n.mean),
                    scale: cv(&n.scale),
                }),
            }),
            ModelSpec::ResidualAugmented { inner } => ModelSpec::ResidualAugmented {
                inner: Box::new(inner.cast()),
            },
        }
    }
}
