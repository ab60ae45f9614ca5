//! JSON weight file format shared by the LSTM and DNN models.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "kind": "lstm",
//!   "input_dim": 6,
//!   "hidden_dim": 100,
//!   "normalization": { "mean": [..6], "std": [..6] },
//!   "tensors": { "w_ii": { "shape": [100, 6], "data": [...] }, ... }
//! }
//! ```
//!
//! DNN files carry `"layers": [4, 100, 100, 100, 1]` instead of
//! `hidden_dim`, with tensors `dense_{l}.weight` (`[out, in]`) and
//! `dense_{l}.bias` (`[out]`). Matrices are row-major.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dnn::DnnWeights;
use super::lstm::LstmWeights;
use crate::error::{config_err, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Lstm,
    Dnn,
}

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.mean.len() != dim || self.std.len() != dim {
            return Err(config_err(format!(
                "normalization has {} means and {} stds, expected {dim}",
                self.mean.len(),
                self.std.len()
            )));
        }
        if let Some(s) = self.std.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(config_err(format!("normalization std {s} must be positive")));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(config_err("normalization mean must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, i: usize, x: f64) -> f64 {
        (x - self.mean[i]) / self.std[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Self {
        Self { shape, data }
    }

    /// Checks the declared shape against the expected one and the data length.
    pub(crate) fn expect(&self, name: &str, shape: &[usize]) -> Result<&[f64]> {
        if self.shape != shape {
            return Err(config_err(format!(
                "tensor {name}: shape {:?}, expected {:?}",
                self.shape, shape
            )));
        }
        let n: usize = shape.iter().product();
        if self.data.len() != n {
            return Err(config_err(format!(
                "tensor {name}: {} values for shape {:?} ({n} expected)",
                self.data.len(),
                shape
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(config_err(format!("tensor {name}: non-finite value")));
        }
        Ok(&self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub format_version: u32,
    pub kind: WeightKind,
    pub input_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
    pub normalization: Normalization,
    pub tensors: BTreeMap<String, Tensor>,
}

impl WeightFile {
    pub(crate) fn tensor(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        self.tensors
            .get(name)
            .ok_or_else(|| config_err(format!("missing tensor {name}")))?
            .expect(name, shape)
            .map(<[f64]>::to_vec)
    }

    pub(crate) fn check_header(&self, kind: WeightKind) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(config_err(format!(
                "unsupported weight format version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.kind != kind {
            return Err(config_err(format!(
                "weight file holds {:?}, expected {kind:?}",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// A validated weight file of either kind.
#[derive(Debug, Clone)]
pub enum LoadedWeights {
    Lstm(LstmWeights),
    Dnn(DnnWeights),
}

/// Reads a weight file and shape-checks every tensor.
pub fn load_weight_file(path: impl AsRef<Path>) -> Result<LoadedWeights> {
    let text = std::fs::read_to_string(path)?;
    let file = WeightFile::from_json(&text)?;
    match file.kind {
        WeightKind::Lstm => Ok(LoadedWeights::Lstm(LstmWeights::from_file(&file)?)),
        WeightKind::Dnn => Ok(LoadedWeights::Dnn(DnnWeights::from_file(&file)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_rejects_zero_std() {
        let n = Normalization {
            mean: vec![0.0, 0.0],
            std: vec![1.0, 0.0],
        };
        assert!(n.validate(2).is_err());
        assert!(Normalization::identity(2).validate(2).is_ok());
        assert!(Normalization::identity(2).validate(3).is_err());
    }

    #[test]
    fn tensor_shape_checks() {
        let t = Tensor::new(vec![2, 3], vec![0.0; 6]);
        assert!(t.expect("t", &[2, 3]).is_ok());
        assert!(t.expect("t", &[3, 2]).is_err());
        let short = Tensor::new(vec![2, 3], vec![0.0; 5]);
        assert!(short.expect("t", &[2, 3]).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"format_version":1,"kind":"dnn","input_dim":4,"normalization":{"mean":[],"std":[]},"tensors":{},"extra":1}"#;
        assert!(WeightFile::from_json(text).is_err());
    }
}
