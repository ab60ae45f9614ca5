//! Gait-to-thrust forward models.
//!
//! Every model implements [`ForwardModel`]. Models are immutable after
//! construction, so a single instance can be shared across threads.

mod dnn;
mod lstm;
mod synthetic;
mod weights;

pub use dnn::{dnn_forward, DenseLayer, DnnModel, DnnWeights};
pub use lstm::{lstm_forward, GateWeights, LstmModel, LstmNetwork, LstmWeights, GAIT_INPUT_DIM, GATE_NAMES};
pub use synthetic::SyntheticSurrogate;
pub use weights::{load_weight_file, LoadedWeights, Normalization, Tensor, WeightFile, WeightKind, FORMAT_VERSION};

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::kinematics::Gait;

/// Maps a gait to the mean thrust it produces over one flapping cycle.
pub trait ForwardModel: Send + Sync {
    /// Predicted mean thrust in newtons.
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64>;

    /// Predicted thrust time history, for models that produce one.
    fn predict_time_history(&self, _gait: &Gait) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<M: ForwardModel + ?Sized> ForwardModel for &M {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        (**self).predict_mean_thrust(gait)
    }

    fn predict_time_history(&self, gait: &Gait) -> Option<Result<Vec<f64>>> {
        (**self).predict_time_history(gait)
    }
}

impl<M: ForwardModel + ?Sized> ForwardModel for Box<M> {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        (**self).predict_mean_thrust(gait)
    }

    fn predict_time_history(&self, gait: &Gait) -> Option<Result<Vec<f64>>> {
        (**self).predict_time_history(gait)
    }
}

impl<M: ForwardModel + ?Sized> ForwardModel for Arc<M> {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        (**self).predict_mean_thrust(gait)
    }

    fn predict_time_history(&self, gait: &Gait) -> Option<Result<Vec<f64>>> {
        (**self).predict_time_history(gait)
    }
}

/// Arithmetic mean of a thrust time history.
pub fn mean_thrust_from_history(history: &[f64]) -> Result<f64> {
    if history.is_empty() {
        return Err(invalid("cannot average an empty thrust history"));
    }
    Ok(history.iter().sum::<f64>() / history.len() as f64)
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
