//! Gait parameter space, normalization, attainability, and motor time histories.
//!
//! A [`Gait`] is the set of four static fin kinematics applied for one
//! flapping cycle. The [`KinematicSpace`] bounds those kinematics and defines
//! the normalized coordinates used by every solver: coordinate `i` is the raw
//! value divided by its equivalent step size, so Euclidean distance in the
//! normalized space is the kinematic smoothness loss.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Number of static kinematics in a gait.
pub const NUM_KINEMATICS: usize = 4;

/// Motor setpoints commanded per flapping cycle.
pub const SETPOINTS_PER_CYCLE: usize = 16;

/// Samples per cycle fed to the time-series forward model.
pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 50;

/// A point in normalized kinematic space.
pub type Normalized = [f64; NUM_KINEMATICS];

/// Static kinematics for one flapping cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gait {
    /// Degrees.
    pub stroke_amplitude: f64,
    /// Degrees.
    pub pitch_amplitude: f64,
    /// Hertz.
    pub flap_frequency: f64,
    /// Phase of the pitch cycle relative to the stroke cycle, as a fraction of one cycle.
    pub stroke_pitch_offset: f64,
}

impl Gait {
    pub const fn new(stroke: f64, pitch: f64, frequency: f64, offset: f64) -> Self {
        Self {
            stroke_amplitude: stroke,
            pitch_amplitude: pitch,
            flap_frequency: frequency,
            stroke_pitch_offset: offset,
        }
    }

    pub const fn to_array(self) -> [f64; NUM_KINEMATICS] {
        [
            self.stroke_amplitude,
            self.pitch_amplitude,
            self.flap_frequency,
            self.stroke_pitch_offset,
        ]
    }

    pub const fn from_array(v: [f64; NUM_KINEMATICS]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Duration of one flapping cycle in seconds.
    pub fn cycle_duration(&self) -> f64 {
        1.0 / self.flap_frequency
    }
}

impl std::fmt::Display for Gait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(stroke {:.3}°, pitch {:.3}°, {:.4} Hz, offset {:.5})",
            self.stroke_amplitude, self.pitch_amplitude, self.flap_frequency, self.stroke_pitch_offset
        )
    }
}

/// Frequency-dependent amplitude limits of the fin motors.
///
/// A gait is attainable when `|stroke| <= stroke_intercept - stroke_slope * ff`
/// and `|pitch| <= pitch_intercept - pitch_slope * ff`. Amplitudes are taken
/// by magnitude so mirrored (negative-thrust) gaits share the limits of their
/// positive counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attainability {
    pub stroke_intercept: f64,
    pub stroke_slope: f64,
    pub pitch_intercept: f64,
    pub pitch_slope: f64,
}

impl Default for Attainability {
    fn default() -> Self {
        Self {
            stroke_intercept: 97.0,
            stroke_slope: 30.0,
            pitch_intercept: 75.0,
            pitch_slope: 26.0,
        }
    }
}

impl Attainability {
    pub fn max_stroke(&self, frequency: f64) -> f64 {
        self.stroke_intercept - self.stroke_slope * frequency
    }

    pub fn max_pitch(&self, frequency: f64) -> f64 {
        self.pitch_intercept - self.pitch_slope * frequency
    }

    pub fn allows(&self, gait: &Gait) -> bool {
        let ff = gait.flap_frequency;
        gait.stroke_amplitude.abs() <= self.max_stroke(ff) && gait.pitch_amplitude.abs() <= self.max_pitch(ff)
    }
}

/// Whether the motors can realize `gait` under the default amplitude limits.
pub fn is_attainable(gait: &Gait) -> bool {
    Attainability::default().allows(gait)
}

/// Bounds, equivalent step sizes, and attainability constraints of the gait space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicSpace {
    pub lower_bounds: Gait,
    pub upper_bounds: Gait,
    /// Equivalent step size per kinematic; one step in any kinematic costs one
    /// unit of kinematic loss.
    pub step_sizes: Gait,
    /// `None` disables the amplitude-frequency constraints.
    pub attainability: Option<Attainability>,
}

impl Default for KinematicSpace {
    fn default() -> Self {
        Self {
            lower_bounds: Gait::new(0.0, 0.0, 0.75, -0.0625),
            upper_bounds: Gait::new(55.0, 55.0, 2.0, 0.125),
            step_sizes: Gait::new(10.0, 10.0, 0.25, 0.0625),
            attainability: Some(Attainability::default()),
        }
    }
}

impl KinematicSpace {
    /// Checks the bound ordering and step-size positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let lo = self.lower_bounds.to_array();
        let hi = self.upper_bounds.to_array();
        let s = self.step_sizes.to_array();
        for i in 0..NUM_KINEMATICS {
            if !(lo[i].is_finite() && hi[i].is_finite()) || lo[i] > hi[i] {
                return Err(invalid(format!(
                    "kinematic {i}: bounds [{}, {}] are not ordered",
                    lo[i], hi[i]
                )));
            }
            if !(s[i].is_finite() && s[i] > 0.0) {
                return Err(invalid(format!("kinematic {i}: step size {} must be positive", s[i])));
            }
        }
        Ok(())
    }

    /// The space extended through the origin by the mirror symmetry
    /// `(stroke, pitch, offset) -> (-stroke, -pitch, -offset)`.
    pub fn mirrored(&self) -> Self {
        let lo = self.lower_bounds;
        let hi = self.upper_bounds;
        let mut out = self.clone();
        out.lower_bounds = Gait::new(
            lo.stroke_amplitude.min(-hi.stroke_amplitude),
            lo.pitch_amplitude.min(-hi.pitch_amplitude),
            lo.flap_frequency,
            lo.stroke_pitch_offset.min(-hi.stroke_pitch_offset),
        );
        out.upper_bounds = Gait::new(
            hi.stroke_amplitude.max(-lo.stroke_amplitude),
            hi.pitch_amplitude.max(-lo.pitch_amplitude),
            hi.flap_frequency,
            hi.stroke_pitch_offset.max(-lo.stroke_pitch_offset),
        );
        out
    }

    pub fn contains(&self, gait: &Gait) -> bool {
        let g = gait.to_array();
        let lo = self.lower_bounds.to_array();
        let hi = self.upper_bounds.to_array();
        (0..NUM_KINEMATICS).all(|i| g[i] >= lo[i] && g[i] <= hi[i])
    }

    /// Within bounds and, when constrained, attainable.
    pub fn is_feasible(&self, gait: &Gait) -> bool {
        self.contains(gait) && self.attainability.is_none_or(|a| a.allows(gait))
    }

    pub fn normalize(&self, gait: &Gait) -> Normalized {
        normalize(gait, self)
    }

    pub fn denormalize(&self, z: &Normalized) -> Gait {
        let s = self.step_sizes.to_array();
        Gait::from_array(std::array::from_fn(|i| z[i] * s[i]))
    }
}

/// Divides each kinematic by its equivalent step size.
pub fn normalize(gait: &Gait, space: &KinematicSpace) -> Normalized {
    let g = gait.to_array();
    let s = space.step_sizes.to_array();
    std::array::from_fn(|i| g[i] / s[i])
}

pub(crate) fn distance(a: &Normalized, b: &Normalized) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Velocity and acceleration limits of the stroke and pitch motors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorLimits {
    /// Degrees per second.
    pub max_velocity: f64,
    /// Degrees per second squared.
    pub max_acceleration: f64,
}

impl Default for MotorLimits {
    fn default() -> Self {
        Self {
            max_velocity: 400.0,
            max_acceleration: 4000.0,
        }
    }
}

/// One sample of the realized fin angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub stroke: f64,
    pub pitch: f64,
}

/// Realized stroke and pitch angles over one steady flapping cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeHistory {
    pub points: Vec<AngleSample>,
}

impl TimeHistory {
    pub fn samples_per_cycle(&self) -> usize {
        self.points.len()
    }

    pub fn peak_stroke(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.stroke.abs()))
    }

    pub fn peak_pitch(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.pitch.abs()))
    }
}

/// Commanded stroke and pitch setpoints for one cycle.
///
/// Stroke follows `A_s sin(2πk/16)`. Pitch is a square wave at ±`A_p`,
/// positive during the first half of its cycle and delayed by the
/// stroke-pitch offset.
pub fn commanded_setpoints(gait: &Gait) -> [[f64; 2]; SETPOINTS_PER_CYCLE] {
    std::array::from_fn(|k| {
        let phase = k as f64 / SETPOINTS_PER_CYCLE as f64;
        let stroke = gait.stroke_amplitude * (std::f64::consts::TAU * phase).sin();
        let pitch_phase = (phase - gait.stroke_pitch_offset).rem_euclid(1.0);
        let pitch = if pitch_phase < 0.5 {
            gait.pitch_amplitude
        } else {
            -gait.pitch_amplitude
        };
        [stroke, pitch]
    })
}

/// Fine integration grid: substeps per setpoint such that every output
/// sample lands on a grid point and each setpoint hold has at least 200 steps.
fn substeps_per_setpoint(samples_per_cycle: usize) -> usize {
    let l = lcm(SETPOINTS_PER_CYCLE, samples_per_cycle) / SETPOINTS_PER_CYCLE;
    l * 200usize.div_ceil(l)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Realized angles on the fine grid over `cycles` cycles, starting at rest at
/// zero. Returned vector has `cycles * 16 * substeps + 1` entries.
pub(crate) fn realized_trajectory(
    gait: &Gait,
    motor: &MotorLimits,
    substeps: usize,
    cycles: usize,
) -> Vec<AngleSample> {
    let setpoints = commanded_setpoints(gait);
    let hold = gait.cycle_duration() / SETPOINTS_PER_CYCLE as f64;
    let dt = hold / substeps as f64;
    let mut stroke = Axis::default();
    let mut pitch = Axis::default();
    let (s_lo, s_hi) = span(setpoints.iter().map(|s| s[0]));
    let (p_lo, p_hi) = span(setpoints.iter().map(|s| s[1]));

    let steps = cycles * SETPOINTS_PER_CYCLE * substeps;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(AngleSample {
        stroke: 0.0,
        pitch: 0.0,
    });
    for step in 0..steps {
        let k = (step / substeps) % SETPOINTS_PER_CYCLE;
        stroke.advance(setpoints[k][0], motor, dt, s_lo, s_hi);
        pitch.advance(setpoints[k][1], motor, dt, p_lo, p_hi);
        out.push(AngleSample {
            stroke: stroke.position,
            pitch: pitch.position,
        });
    }
    out
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((0.0, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Default, Clone, Copy)]
struct Axis {
    position: f64,
    velocity: f64,
}

impl Axis {
    /// One step of a time-optimal trapezoidal tracker: cruise toward the
    /// setpoint at no more than the velocity that still allows stopping on
    /// it, changing velocity by at most `a_max * dt`.
    ///
    /// The stopping speed solves `v²/2a + v·dt/2 = |err|`, the distance
    /// covered while braking in whole steps of `dt`.
    fn advance(&mut self, target: f64, motor: &MotorLimits, dt: f64, lo: f64, hi: f64) {
        let err = target - self.position;
        let adt = motor.max_acceleration * dt;
        let brake = (0.25 * adt * adt + 2.0 * motor.max_acceleration * err.abs()).sqrt() - 0.5 * adt;
        let cap = motor.max_velocity.min(brake).min(err.abs() / dt);
        let desired = cap.copysign(err);
        let dv = motor.max_acceleration * dt;
        let v = desired.clamp(self.velocity - dv, self.velocity + dv);
        let mut x = self.position + v * dt;
        let mut v = v;
        // Mechanical travel never leaves the commanded envelope.
        if x > hi || x < lo {
            x = x.clamp(lo, hi);
            v = 0.0;
        }
        self.position = x;
        self.velocity = v;
    }
}

/// Generates the realized stroke and pitch angles for one steady cycle.
///
/// Two cycles are simulated from rest and the second is resampled to
/// `samples_per_cycle` evenly spaced points.
pub fn generate_time_history(gait: &Gait, motor: &MotorLimits, samples_per_cycle: usize) -> Result<TimeHistory> {
    if !(gait.flap_frequency.is_finite() && gait.flap_frequency > 0.0) {
        return Err(invalid(format!(
            "flap frequency must be positive, got {}",
            gait.flap_frequency
        )));
    }
    if !gait.is_finite() {
        return Err(invalid("gait has non-finite kinematics"));
    }
    if samples_per_cycle < SETPOINTS_PER_CYCLE {
        return Err(invalid(format!(
            "samples_per_cycle must be at least {SETPOINTS_PER_CYCLE}, got {samples_per_cycle}"
        )));
    }
    if !(motor.max_velocity > 0.0 && motor.max_acceleration > 0.0) {
        return Err(invalid("motor limits must be positive"));
    }
    let substeps = substeps_per_setpoint(samples_per_cycle);
    let fine = realized_trajectory(gait, motor, substeps, 2);
    let per_cycle = SETPOINTS_PER_CYCLE * substeps;
    let stride = per_cycle / samples_per_cycle;
    let points = (0..samples_per_cycle).map(|i| fine[per_cycle + i * stride]).collect();
    Ok(TimeHistory { points })
}
