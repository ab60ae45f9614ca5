//! Negative-thrust gaits by mirror symmetry.
//!
//! Flipping the signs of stroke amplitude, pitch amplitude, and stroke-pitch
//! offset is assumed to negate the thrust. [`Mirrored`] wraps a model trained
//! on positive-thrust gaits and answers for the whole mirrored space.

use crate::error::Result;
use crate::kinematics::Gait;
use crate::model::ForwardModel;

/// Negates stroke amplitude, pitch amplitude, and stroke-pitch offset.
pub fn mirror_gait(gait: &Gait) -> Gait {
    Gait::new(
        -gait.stroke_amplitude,
        -gait.pitch_amplitude,
        gait.flap_frequency,
        -gait.stroke_pitch_offset,
    )
}

/// Symmetry-wrapped forward model.
///
/// Gaits whose stroke amplitude has a negative sign bit (including `-0.0`)
/// are answered as `-inner(mirror(g))`, so `model(mirror(g)) = -model(g)`
/// holds exactly for every gait.
#[derive(Debug, Clone)]
pub struct Mirrored<M> {
    inner: M,
}

impl<M: ForwardModel> Mirrored<M> {
    pub fn new(inner: M) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: ForwardModel> ForwardModel for Mirrored<M> {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        if gait.stroke_amplitude.is_sign_negative() {
            Ok(-self.inner.predict_mean_thrust(&mirror_gait(gait))?)
        } else {
            self.inner.predict_mean_thrust(gait)
        }
    }

    fn predict_time_history(&self, gait: &Gait) -> Option<Result<Vec<f64>>> {
        if gait.stroke_amplitude.is_sign_negative() {
            self.inner
                .predict_time_history(&mirror_gait(gait))
                .map(|r| r.map(|h| h.into_iter().map(|t| -t).collect()))
        } else {
            self.inner.predict_time_history(gait)
        }
    }
}
