//! Independent reference implementations and fixtures shared by the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use fingait_core::kinematics::AngleSample;
use fingait_core::model::{DnnWeights, LstmWeights};
use fingait_core::{Gait, InverseRequest, KinematicSpace, LossWeights, TimeHistory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Step-by-step scalar LSTM recurrence over gait-driven inputs.
pub fn naive_lstm(w: &LstmWeights, history: &TimeHistory, gait: &Gait) -> Vec<f64> {
    let n = w.input_dim;
    let h = w.hidden_dim;
    let nz = &w.normalization;
    let statics = [
        gait.stroke_amplitude,
        gait.pitch_amplitude,
        gait.flap_frequency,
        gait.stroke_pitch_offset,
    ];
    let mut hidden = vec![0.0; h];
    let mut cell = vec![0.0; h];
    let mut out = Vec::new();
    for p in &history.points {
        let raw = [statics[0], statics[1], statics[2], statics[3], p.stroke, p.pitch];
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[k] = (raw[k] - nz.mean[k]) / nz.std[k];
        }
        let mut pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
        for (gate, slot) in pre.iter_mut().enumerate() {
            let gw = &w.gates[gate];
            for j in 0..h {
                let mut s = gw.bias[j];
                for k in 0..n {
                    s += gw.input[j * n + k] * x[k];
                }
                for k in 0..h {
                    s += gw.recurrent[j * h + k] * hidden[k];
                }
                slot[j] = s;
            }
        }
        let mut next = vec![0.0; h];
        for j in 0..h {
            let i = sig(pre[0][j]);
            let f = sig(pre[1][j]);
            let g = pre[2][j].tanh();
            let o = sig(pre[3][j]);
            cell[j] = f * cell[j] + i * g;
            next[j] = o * cell[j].tanh();
        }
        hidden = next;
        let mut y = w.output_bias;
        for j in 0..h {
            y += w.output_weight[j] * hidden[j];
        }
        out.push(y);
    }
    out
}

/// Nested-loop dense network with ReLU hidden layers and linear output.
pub fn naive_dnn(w: &DnnWeights, gait: &Gait) -> f64 {
    let g = gait.to_array();
    let mut act: Vec<f64> = (0..4)
        .map(|i| (g[i] - w.normalization.mean[i]) / w.normalization.std[i])
        .collect();
    for (l, layer) in w.layers.iter().enumerate() {
        let mut next = vec![0.0; layer.output_dim];
        for o in 0..layer.output_dim {
            let mut s = layer.bias[o];
            for i in 0..layer.input_dim {
                s += layer.weight[o * layer.input_dim + i] * act[i];
            }
            next[o] = if l + 1 == w.layers.len() { s } else { s.max(0.0) };
        }
        act = next;
    }
    act[0]
}

/// Feasible gait drawn uniformly from the box by rejection.
pub fn random_feasible_gait<R: Rng>(rng: &mut R, space: &KinematicSpace) -> Gait {
    let lo = space.lower_bounds.to_array();
    let hi = space.upper_bounds.to_array();
    loop {
        let g = Gait::from_array(std::array::from_fn(|i| rng.random_range(lo[i]..=hi[i])));
        if space.is_feasible(&g) {
            return g;
        }
    }
}

pub fn random_history<R: Rng>(rng: &mut R, len: usize) -> TimeHistory {
    TimeHistory {
        points: (0..len)
            .map(|_| AngleSample {
                stroke: rng.random_range(-55.0..55.0),
                pitch: rng.random_range(-55.0..55.0),
            })
            .collect(),
    }
}

/// Seeded request against the default space: feasible current gait, target
/// in the protocol range, and one of the benchmark weight settings.
pub fn random_request(seed: u64) -> InverseRequest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = KinematicSpace::default();
    let current_gait = random_feasible_gait(&mut rng, &space);
    let wt = [0.9, 0.95, 1.0][rng.random_range(0..3)];
    InverseRequest {
        target_thrust: rng.random_range(0.2..1.2),
        current_gait,
        weights: LossWeights::thrust_tradeoff(wt).unwrap(),
    }
}

/// HJPS trap at `w = (0.9, 0.1)` on the default surrogate and space.
///
/// The target sits about 0.105 N above the current thrust. Every single-axis
/// mesh move costs more kinematic loss than it saves in thrust loss, but the
/// composite move along stroke, pitch, and frequency together pays off.
pub fn trap_request() -> InverseRequest {
    InverseRequest {
        target_thrust: 0.4,
        current_gait: Gait::new(20.0, 10.0, 0.75, 0.0),
        weights: LossWeights::new(0.9, 0.1, 0.0).unwrap(),
    }
}

/// Mesh sizes visited by the default pattern-search schedule.
pub fn default_meshes() -> Vec<f64> {
    let cfg = fingait_core::SearchConfig::default();
    let mut out = Vec::new();
    let mut m = cfg.mesh_size;
    while m >= cfg.precision {
        out.push(m);
        m /= cfg.mesh_divider;
    }
    out
}
