//! Position PID controller producing a thrust request.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Newtons.
    pub output_min: f64,
    /// Newtons.
    pub output_max: f64,
    /// Bound on the accumulated error integral, meter-seconds.
    pub integral_limit: f64,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self {
            kp: 2.0,
            ki: 0.005,
            kd: 5.0,
            output_min: -1.2,
            output_max: 1.2,
            integral_limit: 5.0,
        }
    }
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        let gains = [self.kp, self.ki, self.kd];
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("PID gains must be non-negative"));
        }
        if !(self.output_min < self.output_max) {
            return Err(invalid("PID output limits must be ordered"));
        }
        if !(self.integral_limit >= 0.0) {
            return Err(invalid("PID integral limit must be non-negative"));
        }
        Ok(())
    }
}

/// Controller memory between steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    pub previous_measurement: Option<f64>,
}

/// One controller update.
///
/// The derivative acts on the measurement (no kick on setpoint changes) and
/// is zero on the first call. The integral is clamped to `±integral_limit`.
pub fn pid_step(config: &PidConfig, state: &mut PidState, setpoint: f64, measurement: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let error = setpoint - measurement;
    state.integral = (state.integral + error * dt).clamp(-config.integral_limit, config.integral_limit);
    let derivative = match state.previous_measurement {
        Some(prev) => -(measurement - prev) / dt,
        None => 0.0,
    };
    state.previous_measurement = Some(measurement);
    let u = config.kp * error + config.ki * state.integral + config.kd * derivative;
    Ok(u.clamp(config.output_min, config.output_max))
}
