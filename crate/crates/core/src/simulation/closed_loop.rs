//! PID-driven closed-loop runs with the inverse model in the loop.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pid::{pid_step, PidConfig, PidState};
use super::plant::{plant_step, PlantState};
use super::symmetry::Mirrored;
use crate::error::{invalid, Result};
use crate::kinematics::{Gait, KinematicSpace};
use crate::loss::{LossBreakdown, LossWeights};
use crate::model::ForwardModel;
use crate::search::{propose_gait, InverseRequest, Method, SearchConfig};

pub const TARGETS_PER_RUN: usize = 100;
pub const CYCLES_PER_TARGET: usize = 15;
/// Meters.
pub const TARGET_RANGE: (f64, f64) = (0.0, 10.0);

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "cycle",
    "target_position",
    "position",
    "thrust_request",
    "realized_thrust",
    "stroke_amp",
    "pitch_amp",
    "flap_freq",
    "offset",
    "L_t",
    "L_k",
    "L_total",
    "solver_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedLoopConfig {
    pub cycles_per_target: usize,
    pub initial_gait: Gait,
    pub plant: PlantState,
    pub pid: PidConfig,
    pub weights: LossWeights,
    pub search: SearchConfig,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            cycles_per_target: CYCLES_PER_TARGET,
            initial_gait: Gait::new(0.0, 0.0, 1.0, 0.0),
            plant: PlantState::default(),
            pid: PidConfig::default(),
            weights: LossWeights {
                thrust: 0.95,
                kinematic: 0.05,
                efficiency: 0.0,
            },
            search: SearchConfig::default(),
        }
    }
}

impl ClosedLoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles_per_target == 0 {
            return Err(invalid("at least one cycle per target is required"));
        }
        self.plant.validate()?;
        self.pid.validate()?;
        self.weights.validate()?;
        self.search.validate()
    }
}

/// One flapping cycle of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Zero-based over the whole run.
    pub cycle: usize,
    pub target_index: usize,
    pub target_position: f64,
    /// Position at the end of the cycle.
    pub position: f64,
    pub thrust_request: f64,
    pub realized_thrust: f64,
    pub gait: Gait,
    pub loss: LossBreakdown,
    pub solver_ms: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub cycles: Vec<CycleRecord>,
    /// Position when each target was issued.
    pub segment_start: Vec<f64>,
}

impl Trajectory {
    /// Absolute position error at the last cycle of each target.
    pub fn final_errors(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.segment_start.len());
        for (i, rec) in self.cycles.iter().enumerate() {
            let last = self
                .cycles
                .get(i + 1)
                .is_none_or(|n| n.target_index != rec.target_index);
            if last {
                out.push((rec.target_position - rec.position).abs());
            }
        }
        out
    }

    /// Distance each target asked the vehicle to travel.
    pub fn step_sizes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segment_start.len());
        let mut seen = usize::MAX;
        for rec in &self.cycles {
            if rec.target_index != seen {
                seen = rec.target_index;
                out.push((rec.target_position - self.segment_start[seen]).abs());
            }
        }
        out
    }

    /// Writes the per-cycle CSV log.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRAJECTORY_HEADER)?;
        for r in &self.cycles {
            w.write_record([
                r.cycle.to_string(),
                r.target_position.to_string(),
                r.position.to_string(),
                r.thrust_request.to_string(),
                r.realized_thrust.to_string(),
                r.gait.stroke_amplitude.to_string(),
                r.gait.pitch_amplitude.to_string(),
                r.gait.flap_frequency.to_string(),
                r.gait.stroke_pitch_offset.to_string(),
                r.loss.thrust_loss.to_string(),
                r.loss.kinematic_loss.to_string(),
                r.loss.total.to_string(),
                format!("{:.6}", r.solver_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// `count` i.i.d. uniform targets in [0, 10] m.
pub fn generate_targets(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rng.random_range(TARGET_RANGE.0..=TARGET_RANGE.1))
        .collect()
}

/// Drives the plant through each target position for a fixed number of cycles.
///
/// Per cycle: the PID turns the position error into a thrust request, the
/// inverse model picks a gait for it, the mirror-wrapped forward model gives
/// the realized thrust, and the plant integrates for one period of the chosen
/// gait. `space` is the positive-thrust space; the loop searches its mirror
/// image so negative requests can be met. The PID time step is the duration
/// of the previous cycle. Each cycle's search seed is derived from
/// `cfg.search.rng_seed` and the cycle index.
pub fn run_closed_loop(
    targets: &[f64],
    method: Method,
    cfg: &ClosedLoopConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
) -> Result<Trajectory> {
    cfg.validate()?;
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(invalid("target positions must be finite"));
    }
    let space = space.mirrored();
    space.validate()?;
    let model = Mirrored::new(model);

    let mut plant = cfg.plant;
    let mut pid = PidState::default();
    let mut gait = cfg.initial_gait;
    let mut dt = gait.cycle_duration();
    let mut out = Trajectory {
        cycles: Vec::with_capacity(targets.len() * cfg.cycles_per_target),
        segment_start: Vec::with_capacity(targets.len()),
    };
    for (target_index, &target) in targets.iter().enumerate() {
        out.segment_start.push(plant.position);
        for _ in 0..cfg.cycles_per_target {
            let cycle = out.cycles.len();
            let thrust_request = pid_step(&cfg.pid, &mut pid, target, plant.position, dt)?;
            let request = InverseRequest {
                target_thrust: thrust_request,
                current_gait: gait,
                weights: cfg.weights,
            };
            let search = cfg.search.for_request(0, cycle as u64);
            let result = propose_gait(&request, method, &search, &model, &space)?;
            gait = result.proposed_gait;
            let realized_thrust = model.predict_mean_thrust(&gait)?;
            dt = gait.cycle_duration();
            plant = plant_step(&plant, realized_thrust, dt)?;
            out.cycles.push(CycleRecord {
                cycle,
                target_index,
                target_position: target,
                position: plant.position,
                thrust_request,
                realized_thrust,
                gait,
                loss: result.loss,
                solver_ms: result.wall_time * 1e3,
                evaluations: result.evaluations,
                budget_exhausted: result.budget_exhausted,
            });
        }
    }
    Ok(out)
}
