//! JSON model files.
//!
//! ```json
//! {"variant": "linear", "weights": [0.4, 0.6]}
//! {"variant": "bsm_call", "strike": 800.0, "maturity": 0.0821917808219178}
//! {"variant": "mlp",
//!  "hidden_activation": "relu", "output_activation": "linear",
//!  "input_normalization": {"mean": [0.0, 0.0], "scale": [1.0, 1.0]},
//!  "layers": [{"weights": [[1.0, -1.0], [2.0, 0.5]], "bias": [0.0, 0.1]},
//!             {"weights": [[1.5], [-2.0]], "bias": [0.25]}]}
//! {"variant": "residual_augmented", "inner": {"variant": "linear", "weights": [1.0]}}
//! ```
//!
//! Layer weights are nested row-major arrays of shape `inputs × outputs`
//! (`y = x W + b`).

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DenseLayer, FeedForward, InputNormalization, ModelSpec};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelLoadError {
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("model dimension error at {path}: {message}")]
    Dimension { path: String, message: String },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutputActivation {
    Linear,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizationFile {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum ModelFile {
    Linear {
        weights: Vec<f64>,
    },
    BsmCall {
        strike: f64,
        maturity: f64,
    },
    Mlp {
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
        input_normalization: Option<NormalizationFile>,
        layers: Vec<LayerFile>,
    },
    ResidualAugmented {
        inner: Box<ModelFile>,
    },
}

fn dim_err(path: &str, message: impl Into<String>) -> ModelLoadError {
    ModelLoadError::Dimension {
        path: path.to_string(),
        message: message.into(),
    }
}

fn finite(path: &str, values: &[f64]) -> Result<(), ModelLoadError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(dim_err(&format!("{path}[{i}]"), "non-finite parameter")),
        None => Ok(()),
    }
}

fn build<T: Scalar>(file: ModelFile, path: &str) -> Result<ModelSpec<T>, ModelLoadError> {
    let cast = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    match file {
        ModelFile::Linear { weights } => {
            let p = format!("{path}.weights");
            if weights.is_empty() {
                return Err(dim_err(&p, "linear model needs at least one weight"));
            }
            finite(&p, &weights)?;
            Ok(ModelSpec::linear(cast(&weights)))
        }
        ModelFile::BsmCall { strike, maturity } => ModelSpec::bsm_call(T::lit(strike), T::lit(maturity))
            .map_err(|e| dim_err(path, e.to_string())),
        ModelFile::Mlp {
            input_normalization,
            layers,
            ..
        } => {
            if layers.is_empty() {
                return Err(dim_err(&format!("{path}.layers"), "network has no layers"));
            }
            let mut built = Vec::with_capacity(layers.len());
            for (k, layer) in layers.into_iter().enumerate() {
                let p = format!("{path}.layers[{k}]");
                if let Some(prev) = built.last() {
                    let prev: &DenseLayer<T> = prev;
                    if layer.weights.len() != prev.outputs {
                        return Err(dim_err(
                            &format!("{p}.weights"),
                            format!(
                                "has {} rows but the previous layer has {} outputs",
                                layer.weights.len(),
                                prev.outputs
                            ),
                        ));
                    }
                }
                for (r, row) in layer.weights.iter().enumerate() {
                    if row.len() != layer.bias.len() {
                        return Err(dim_err(
                            &format!("{p}.weights[{r}]"),
                            format!("has {} columns but bias has {}", row.len(), layer.bias.len()),
                        ));
                    }
                    finite(&format!("{p}.weights[{r}]"), row)?;
                }
                finite(&format!("{p}.bias"), &layer.bias)?;
                let weights = layer.weights.iter().map(|r| cast(r)).collect();
                built.push(DenseLayer::new(weights, cast(&layer.bias)).map_err(|e| dim_err(&p, e.to_string()))?);
            }
            let last = built.len() - 1;
            if built[last].outputs != 1 {
                return Err(dim_err(
                    &format!("{path}.layers[{last}].bias"),
                    format!("output layer must have width 1, has {}", built[last].outputs),
                ));
            }
            let normalization = match input_normalization {
                Some(n) => {
                    let p = format!("{path}.input_normalization");
                    finite(&format!("{p}.mean"), &n.mean)?;
                    finite(&format!("{p}.scale"), &n.scale)?;
                    Some(InputNormalization {
                        mean: cast(&n.mean),
                        scale: cast(&n.scale),
                    })
                }
                None => None,
            };
            FeedForward::new(built, normalization)
                .map(ModelSpec::FeedForward)
                .map_err(|e| dim_err(path, e.to_string()))
        }
        ModelFile::ResidualAugmented { inner } => {
            let inner = build(*inner, &format!("{path}.inner"))?;
            Ok(ModelSpec::residual_augmented(inner))
        }
    }
}

/// Parses and validates a model from JSON text.
pub fn parse_model<T: Scalar>(text: &str) -> Result<ModelSpec<T>, ModelLoadError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelLoadError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(file, "$")
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<ModelSpec<T>, ModelLoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelLoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

fn to_file<T: Scalar>(model: &ModelSpec<T>) -> ModelFile {
    let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    match model {
        ModelSpec::LinearPortfolio { weights } => ModelFile::Linear { weights: f(weights) },
        ModelSpec::BsmCall { strike, maturity } => ModelFile::BsmCall {
            strike: strike.as_f64(),
            maturity: maturity.as_f64(),
        },
        ModelSpec::FeedForward(net) => ModelFile::Mlp {
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Linear,
            input_normalization: net.normalization.as_ref().map(|n| NormalizationFile {
                mean: f(&n.mean),
                scale: f(&n.scale),
            }),
            layers: net
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.chunks(l.outputs).map(f).collect(),
                    bias: f(&l.bias),
                })
                .collect(),
        },
        ModelSpec::ResidualAugmented { inner } => ModelFile::ResidualAugmented {
            inner: Box::new(to_file(inner)),
        },
    }
}

/// Serializes a model in the file schema.
pub fn to_json<T: Scalar>(model: &ModelSpec<T>) -> String {
    serde_json::to_string_pretty(&to_file(model)).expect("model serializes")
}

pub fn save_model<T: Scalar>(model: &ModelSpec<T>, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, to_json(model) + "\n")
}
