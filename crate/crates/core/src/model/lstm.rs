//! LSTM inference over stroke/pitch time histories.
//!
//! Each step consumes six features: the four z-scored static kinematics
//! followed by the z-scored stroke and pitch angles at that step. Gates use
//! the standard formulation
//!
//! ```text
//! i = σ(W_ii x + W_hi h + b_i)    f = σ(W_if x + W_hf h + b_f)
//! g = tanh(W_ig x + W_hg h + b_g) o = σ(W_io x + W_ho h + b_o)
//! c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
//! ```
//!
//! with zero initial state and a scalar linear projection of `h'` per step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weights::{Normalization, Tensor, WeightFile, WeightKind, FORMAT_VERSION};
use super::{mean_thrust_from_history, sigmoid, ForwardModel};
use crate::error::{config_err, Result};
use crate::kinematics::{generate_time_history, Gait, MotorLimits, TimeHistory, DEFAULT_SAMPLES_PER_CYCLE};

/// Input, forget, cell, and output gate suffixes in file tensor names.
pub const GATE_NAMES: [&str; 4] = ["i", "f", "g", "o"];

/// Features per step when driven by a gait and its time history.
pub const GAIT_INPUT_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct GateWeights {
    /// `hidden × input`, row-major.
    pub input: Vec<f64>,
    /// `hidden × hidden`, row-major.
    pub recurrent: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Raw LSTM parameters as stored in a weight file.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Indexed in [`GATE_NAMES`] order.
    pub gates: [GateWeights; 4],
    pub output_weight: Vec<f64>,
    pub output_bias: f64,
    pub normalization: Normalization,
}

impl LstmWeights {
    pub fn validate(&self) -> Result<()> {
        let (n, h) = (self.input_dim, self.hidden_dim);
        if n == 0 || h == 0 {
            return Err(config_err("LSTM dimensions must be positive"));
        }
        for (gate, name) in self.gates.iter().zip(GATE_NAMES) {
            if gate.input.len() != h * n || gate.recurrent.len() != h * h || gate.bias.len() != h {
                return Err(config_err(format!(
                    "LSTM gate {name}: shapes inconsistent with input {n}, hidden {h}"
                )));
            }
        }
        if self.output_weight.len() != h {
            return Err(config_err("LSTM output projection must have hidden_dim weights"));
        }
        self.normalization.validate(n)
    }

    pub fn from_file(file: &WeightFile) -> Result<Self> {
        file.check_header(WeightKind::Lstm)?;
        let n = file.input_dim;
        let h = file
            .hidden_dim
            .ok_or_else(|| config_err("LSTM weight file needs hidden_dim"))?;
        let gate = |name: &str| -> Result<GateWeights> {
            Ok(GateWeights {
                input: file.tensor(&format!("w_i{name}"), &[h, n])?,
                recurrent: file.tensor(&format!("w_h{name}"), &[h, h])?,
                bias: file.tensor(&format!("b_{name}"), &[h])?,
            })
        };
        let weights = Self {
            input_dim: n,
            hidden_dim: h,
            gates: [gate("i")?, gate("f")?, gate("g")?, gate("o")?],
            output_weight: file.tensor("w_out", &[1, h])?,
            output_bias: file.tensor("b_out", &[1])?[0],
            normalization: file.normalization.clone(),
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn to_file(&self) -> WeightFile {
        let (n, h) = (self.input_dim, self.hidden_dim);
        let mut tensors = std::collections::BTreeMap::new();
        for (gate, name) in self.gates.iter().zip(GATE_NAMES) {
            tensors.insert(format!("w_i{name}"), Tensor::new(vec![h, n], gate.input.clone()));
            tensors.insert(format!("w_h{name}"), Tensor::new(vec![h, h], gate.recurrent.clone()));
            tensors.insert(format!("b_{name}"), Tensor::new(vec![h], gate.bias.clone()));
        }
        tensors.insert("w_out".into(), Tensor::new(vec![1, h], self.output_weight.clone()));
        tensors.insert("b_out".into(), Tensor::new(vec![1], vec![self.output_bias]));
        WeightFile {
            format_version: FORMAT_VERSION,
            kind: WeightKind::Lstm,
            input_dim: n,
            hidden_dim: Some(h),
            layers: None,
            normalization: self.normalization.clone(),
            tensors,
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let gate = || GateWeights {
            input: vec![0.0; hidden_dim * input_dim],
            recurrent: vec![0.0; hidden_dim * hidden_dim],
            bias: vec![0.0; hidden_dim],
        };
        Self {
            input_dim,
            hidden_dim,
            gates: [gate(), gate(), gate(), gate()],
            output_weight: vec![0.0; hidden_dim],
            output_bias: 0.0,
            normalization: Normalization::identity(input_dim),
        }
    }

    /// Seeded weights drawn uniformly from `±1/sqrt(hidden_dim)`, with a
    /// normalization record spanning the default gait space.
    pub fn random(hidden_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1.0 / (hidden_dim as f64).sqrt();
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-k..k)).collect() };
        let n = GAIT_INPUT_DIM;
        let gates = std::array::from_fn(|_| GateWeights {
            input: draw(hidden_dim * n),
            recurrent: draw(hidden_dim * hidden_dim),
            bias: draw(hidden_dim),
        });
        let output_weight = draw(hidden_dim);
        let output_bias = draw(1)[0];
        Self {
            input_dim: n,
            hidden_dim,
            gates,
            output_weight,
            output_bias,
            normalization: Normalization {
                mean: vec![27.5, 27.5, 1.375, 0.03125, 0.0, 0.0],
                std: vec![18.0, 18.0, 0.43, 0.065, 20.0, 20.0],
            },
        }
    }
}

/// LSTM parameters packed for inference: one `4H × (I + H)` matrix with the
/// gate rows stacked in i, f, g, o order.
#[derive(Debug, Clone)]
pub struct LstmNetwork {
    input_dim: usize,
    hidden_dim: usize,
    packed: Vec<f64>,
    bias: Vec<f64>,
    output_weight: Vec<f64>,
    output_bias: f64,
    normalization: Normalization,
}

impl LstmNetwork {
    pub fn new(weights: &LstmWeights) -> Result<Self> {
        weights.validate()?;
        let (n, h) = (weights.input_dim, weights.hidden_dim);
        let cols = n + h;
        let mut packed = Vec::with_capacity(4 * h * cols);
        let mut bias = Vec::with_capacity(4 * h);
        for gate in &weights.gates {
            for unit in 0..h {
                packed.extend_from_slice(&gate.input[unit * n..(unit + 1) * n]);
                packed.extend_from_slice(&gate.recurrent[unit * h..(unit + 1) * h]);
            }
            bias.extend_from_slice(&gate.bias);
        }
        Ok(Self {
            input_dim: n,
            hidden_dim: h,
            packed,
            bias,
            output_weight: weights.output_weight.clone(),
            output_bias: weights.output_bias,
            normalization: weights.normalization.clone(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// Runs the recurrence over already-normalized feature rows.
    pub fn forward_features<'a, I>(&self, steps: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let (n, h) = (self.input_dim, self.hidden_dim);
        let cols = n + h;
        let mut xin = vec![0.0; cols];
        let mut z = vec![0.0; 4 * h];
        let mut cell = vec![0.0; h];
        let mut out = Vec::new();
        for x in steps {
            if x.len() != n {
                return Err(config_err(format!("LSTM step has {} features, expected {n}", x.len())));
            }
            xin[..n].copy_from_slice(x);
            for (zr, (row, b)) in z.iter_mut().zip(self.packed.chunks_exact(cols).zip(&self.bias)) {
                *zr = b + dot(row, &xin);
            }
            let hidden = &mut xin[n..];
            for j in 0..h {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h + j]);
                let g = z[2 * h + j].tanh();
                let o = sigmoid(z[3 * h + j]);
                cell[j] = f * cell[j] + i * g;
                hidden[j] = o * cell[j].tanh();
            }
            out.push(self.output_bias + dot(&self.output_weight, hidden));
        }
        Ok(out)
    }

    /// Thrust time history for a gait and its realized angle history.
    pub fn forward(&self, history: &TimeHistory, gait: &Gait) -> Result<Vec<f64>> {
        if self.input_dim != GAIT_INPUT_DIM {
            return Err(config_err(format!(
                "gait-driven LSTM needs input_dim {GAIT_INPUT_DIM}, weights have {}",
                self.input_dim
            )));
        }
        let nz = &self.normalization;
        let s = gait.to_array();
        let static_part: [f64; 4] = std::array::from_fn(|i| nz.apply(i, s[i]));
        let rows: Vec<[f64; GAIT_INPUT_DIM]> = history
            .points
            .iter()
            .map(|p| {
                [
                    static_part[0],
                    static_part[1],
                    static_part[2],
                    static_part[3],
                    nz.apply(4, p.stroke),
                    nz.apply(5, p.pitch),
                ]
            })
            .collect();
        self.forward_features(rows.iter().map(|r| r.as_slice()))
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Thrust time history from raw weights; one value per history sample.
pub fn lstm_forward(weights: &LstmWeights, history: &TimeHistory, gait: &Gait) -> Result<Vec<f64>> {
    LstmNetwork::new(weights)?.forward(history, gait)
}

/// Time-series forward model: motor time history, then LSTM, then mean.
#[derive(Debug, Clone)]
pub struct LstmModel {
    network: LstmNetwork,
    motor: MotorLimits,
    samples_per_cycle: usize,
}

impl LstmModel {
    pub fn new(weights: &LstmWeights, motor: MotorLimits, samples_per_cycle: usize) -> Result<Self> {
        let network = LstmNetwork::new(weights)?;
        if network.input_dim != GAIT_INPUT_DIM {
            return Err(config_err(format!(
                "gait-driven LSTM needs input_dim {GAIT_INPUT_DIM}, weights have {}",
                network.input_dim
            )));
        }
        Ok(Self {
            network,
            motor,
            samples_per_cycle,
        })
    }

    pub fn with_defaults(weights: &LstmWeights) -> Result<Self> {
        Self::new(weights, MotorLimits::default(), DEFAULT_SAMPLES_PER_CYCLE)
    }

    pub fn network(&self) -> &LstmNetwork {
        &self.network
    }
}

impl ForwardModel for LstmModel {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        let history = self.predict_time_history(gait).expect("LSTM always yields a history")?;
        mean_thrust_from_history(&history)
    }

    fn predict_time_history(&self, gait: &Gait) -> Option<Result<Vec<f64>>> {
        Some(
            generate_time_history(gait, &self.motor, self.samples_per_cycle)
                .and_then(|history| self.network.forward(&history, gait)),
        )
    }
}
