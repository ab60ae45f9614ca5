//! Analytic stand-in for a trained gait-to-thrust network.
//!
//! Version `synthetic-v1`:
//!
//! ```text
//! s = A_s / 55,  p = A_p / 55,  σ = sgn(s)
//! T = K · f · (s · (0.55 + 0.45 · |p|) · (1 − 8 · (σφ − 0.05)²) + 0.1 · p)
//! ```
//!
//! with `K = 1.068` N/Hz, stroke amplitude `A_s` and pitch amplitude `A_p` in
//! degrees, flap frequency `f` in Hz and stroke-pitch offset `φ`. Thrust is
//! zero without flapping, linear in stroke and frequency, and peaks at an
//! offset of 0.05 cycles. Pure pitching gives a small thrust of its own.
//!
//! The expression is odd in `(A_s, A_p, φ)`, so the mirror-extended space sees
//! one smooth surface through zero stroke. Every feasible gait with nonzero
//! frequency has a stroke slope of at least `0.06` N per unit of normalized
//! stroke, which keeps pattern searches from stalling on flat ground. Over the
//! attainable part of the default space the output spans `[0, ~1.3995]` N,
//! with the maximum at `(55°, 38.6°, 1.4 Hz, 0.05)`.

use super::ForwardModel;
use crate::error::Result;
use crate::kinematics::Gait;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSurrogate {
    pub gain: f64,
    pub frequency_exponent: f64,
    pub reference_amplitude: f64,
    pub pitch_share: f64,
    /// Thrust from pitching alone, relative to `gain`.
    pub pitch_thrust: f64,
    pub best_offset: f64,
    pub offset_curvature: f64,
}

impl SyntheticSurrogate {
    pub const VERSION: &'static str = "synthetic-v1";

    pub fn thrust(&self, gait: &Gait) -> f64 {
        let stroke = gait.stroke_amplitude / self.reference_amplitude;
        let pitch = gait.pitch_amplitude / self.reference_amplitude;
        let f = gait.flap_frequency;
        let d = gait.stroke_pitch_offset * stroke.signum() - self.best_offset;
        let offset = 1.0 - self.offset_curvature * d * d;
        let coupled = stroke * ((1.0 - self.pitch_share) + self.pitch_share * pitch.abs()) * offset;
        self.gain * f.powf(self.frequency_exponent) * (coupled + self.pitch_thrust * pitch)
    }
}

impl Default for SyntheticSurrogate {
    fn default() -> Self {
        Self {
            gain: 1.068,
            frequency_exponent: 1.0,
            reference_amplitude: 55.0,
            pitch_share: 0.45,
            pitch_thrust: 0.1,
            best_offset: 0.05,
            offset_curvature: 8.0,
        }
    }
}

impl ForwardModel for SyntheticSurrogate {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        Ok(self.thrust(gait))
    }
}
