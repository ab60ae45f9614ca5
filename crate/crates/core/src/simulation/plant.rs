//! One-dimensional rigid-body surge dynamics: `m·x″ = T − c_d·v·|v|`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Integration substep upper bound, seconds.
pub const MAX_SUBSTEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantState {
    /// Meters.
    pub position: f64,
    /// Meters per second.
    pub velocity: f64,
    /// Kilograms.
    pub mass: f64,
    /// N·s²/m².
    pub drag_coefficient: f64,
}

impl Default for PlantState {
    fn default() -> Self {
        Self {
            position: 0.0,
            velocity: 0.0,
            mass: 10.0,
            drag_coefficient: 8.0,
        }
    }
}

impl PlantState {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.drag_coefficient >= 0.0 && self.drag_coefficient.is_finite()) {
            return Err(invalid("drag coefficient must be non-negative"));
        }
        if !(self.position.is_finite() && self.velocity.is_finite()) {
            return Err(invalid("plant state must be finite"));
        }
        Ok(())
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity * self.velocity
    }

    /// Speed at which drag balances `thrust`.
    pub fn terminal_velocity(&self, thrust: f64) -> f64 {
        (thrust.abs() / self.drag_coefficient).sqrt().copysign(thrust)
    }
}

/// Advances the plant by `dt` seconds under constant `thrust`.
///
/// Fixed substeps of at most [`MAX_SUBSTEP`]. Velocity treats drag linearly
/// implicitly, `v' = (v + T·h/m) / (1 + c_d·|v|·h/m)`, which keeps the decay
/// monotone and has the exact terminal velocity as its fixed point; position
/// uses the trapezoidal average of the old and new velocity, exact under
/// constant acceleration.
pub fn plant_step(state: &PlantState, thrust: f64, dt: f64) -> Result<PlantState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let n = (dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut s = *state;
    let k = s.drag_coefficient * h / s.mass;
    for _ in 0..n {
        let v = (s.velocity + thrust * h / s.mass) / (1.0 + k * s.velocity.abs());
        s.position += 0.5 * (s.velocity + v) * h;
        s.velocity = v;
    }
    Ok(s)
}
