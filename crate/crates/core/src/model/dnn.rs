//! Dense baseline: z-scored static kinematics through fully connected ReLU
//! layers to a single linear output (mean thrust).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weights::{Normalization, Tensor, WeightFile, WeightKind, FORMAT_VERSION};
use super::ForwardModel;
use crate::error::{config_err, Result};
use crate::kinematics::{Gait, NUM_KINEMATICS};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub input_dim: usize,
    pub output_dim: usize,
    /// `output × input`, row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnWeights {
    pub layers: Vec<DenseLayer>,
    pub normalization: Normalization,
}

impl DnnWeights {
    pub fn validate(&self) -> Result<()> {
        let first = self
            .layers
            .first()
            .ok_or_else(|| config_err("DNN needs at least one layer"))?;
        if first.input_dim != NUM_KINEMATICS {
            return Err(config_err(format!(
                "DNN input is {}, expected {NUM_KINEMATICS}",
                first.input_dim
            )));
        }
        let mut prev = first.input_dim;
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.input_dim != prev
                || layer.weight.len() != layer.input_dim * layer.output_dim
                || layer.bias.len() != layer.output_dim
            {
                return Err(config_err(format!("DNN layer {l}: inconsistent shapes")));
            }
            prev = layer.output_dim;
        }
        if prev != 1 {
            return Err(config_err(format!("DNN output is {prev}, expected 1")));
        }
        self.normalization.validate(NUM_KINEMATICS)
    }

    /// Layer widths including input and output, e.g. `[4, 100, 100, 100, 1]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers.first().map_or(0, |l| l.input_dim)];
        w.extend(self.layers.iter().map(|l| l.output_dim));
        w
    }

    pub fn from_file(file: &WeightFile) -> Result<Self> {
        file.check_header(WeightKind::Dnn)?;
        let widths = file
            .layers
            .as_ref()
            .ok_or_else(|| config_err("DNN weight file needs layers"))?;
        if widths.len() < 2 || widths[0] != file.input_dim {
            return Err(config_err("DNN layers must start with input_dim and have an output"));
        }
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                Ok(DenseLayer {
                    input_dim: w[0],
                    output_dim: w[1],
                    weight: file.tensor(&format!("dense_{l}.weight"), &[w[1], w[0]])?,
                    bias: file.tensor(&format!("dense_{l}.bias"), &[w[1]])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = Self {
            layers,
            normalization: file.normalization.clone(),
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn to_file(&self) -> WeightFile {
        let mut tensors = std::collections::BTreeMap::new();
        for (l, layer) in self.layers.iter().enumerate() {
            tensors.insert(
                format!("dense_{l}.weight"),
                Tensor::new(vec![layer.output_dim, layer.input_dim], layer.weight.clone()),
            );
            tensors.insert(
                format!("dense_{l}.bias"),
                Tensor::new(vec![layer.output_dim], layer.bias.clone()),
            );
        }
        WeightFile {
            format_version: FORMAT_VERSION,
            kind: WeightKind::Dnn,
            input_dim: NUM_KINEMATICS,
            hidden_dim: None,
            layers: Some(self.widths()),
            normalization: self.normalization.clone(),
            tensors,
        }
    }

    /// Seeded He-uniform weights for the given hidden widths.
    pub fn random(hidden: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut widths = vec![NUM_KINEMATICS];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| {
                let k = (6.0 / w[0] as f64).sqrt();
                DenseLayer {
                    input_dim: w[0],
                    output_dim: w[1],
                    weight: (0..w[0] * w[1]).map(|_| rng.random_range(-k..k)).collect(),
                    bias: (0..w[1]).map(|_| rng.random_range(-0.1..0.1)).collect(),
                }
            })
            .collect();
        Self {
            layers,
            normalization: Normalization {
                mean: vec![27.5, 27.5, 1.375, 0.03125],
                std: vec![18.0, 18.0, 0.43, 0.065],
            },
        }
    }
}

pub fn dnn_forward(weights: &DnnWeights, gait: &Gait) -> Result<f64> {
    weights.validate()?;
    Ok(forward_unchecked(weights, gait))
}

fn forward_unchecked(weights: &DnnWeights, gait: &Gait) -> f64 {
    let g = gait.to_array();
    let mut act: Vec<f64> = (0..NUM_KINEMATICS)
        .map(|i| weights.normalization.apply(i, g[i]))
        .collect();
    let last = weights.layers.len() - 1;
    for (l, layer) in weights.layers.iter().enumerate() {
        act = layer
            .weight
            .chunks_exact(layer.input_dim)
            .zip(&layer.bias)
            .map(|(row, b)| {
                let z = b + row.iter().zip(&act).map(|(w, x)| w * x).sum::<f64>();
                if l == last {
                    z
                } else {
                    z.max(0.0)
                }
            })
            .collect();
    }
    act[0]
}

#[derive(Debug, Clone)]
pub struct DnnModel {
    weights: DnnWeights,
}

impl DnnModel {
    pub fn new(weights: DnnWeights) -> Result<Self> {
        weights.validate()?;
        Ok(Self { weights })
    }
}

impl ForwardModel for DnnModel {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        Ok(forward_unchecked(&self.weights, gait))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(hidden: &[usize]) -> DnnWeights {
        let mut w = DnnWeights::random(hidden, 0);
        for l in &mut w.layers {
            l.weight.iter_mut().for_each(|v| *v = 0.0);
            l.bias.iter_mut().for_each(|v| *v = 0.0);
        }
        w
    }

    #[test]
    fn zero_weights_give_output_bias() {
        let mut w = zeros(&[100, 100, 100]);
        w.layers.last_mut().unwrap().bias[0] = 0.42;
        for g in [Gait::new(0.0, 0.0, 1.0, 0.0), Gait::new(55.0, 40.0, 2.0, 0.125)] {
            assert_eq!(dnn_forward(&w, &g).unwrap(), 0.42);
        }
    }

    #[test]
    fn hidden_bias_passes_through_relu() {
        // Single active path: hidden unit 0 carries bias 0.3 (kept by ReLU) or
        // -0.3 (zeroed), then a unit output weight.
        for (bias, expected) in [(0.3, 0.3), (-0.3, 0.0)] {
            let mut w = zeros(&[3]);
            w.layers[0].bias[0] = bias;
            w.layers[1].weight[0] = 1.0;
            assert_eq!(dnn_forward(&w, &Gait::new(10.0, 10.0, 1.0, 0.0)).unwrap(), expected);
        }
    }

    #[test]
    fn shape_checks() {
        let mut w = DnnWeights::random(&[7, 5], 1);
        assert_eq!(w.widths(), vec![4, 7, 5, 1]);
        w.layers[1].bias.push(0.0);
        assert!(dnn_forward(&w, &Gait::new(1.0, 1.0, 1.0, 0.0)).is_err());
        assert!(DnnModel::new(w).is_err());
    }

    #[test]
    fn file_round_trip() {
        let w = DnnWeights::random(&[100, 100, 100], 9);
        let back = DnnWeights::from_file(&WeightFile::from_json(&w.to_file().to_json().unwrap()).unwrap()).unwrap();
        assert_eq!(w, back);
    }
}
