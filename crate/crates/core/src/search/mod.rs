//! Inverse solvers: pick the next gait for a target thrust.
//!
//! All three solvers work in normalized kinematic space anchored at the
//! current gait, treat infeasible points (out of bounds or unattainable) as
//! infinitely bad without evaluating the model, and only ever accept strict
//! loss improvements. The current gait is always a candidate, so no solver
//! returns a gait worse than the one it started from.

mod monte_carlo;
mod pattern;

pub use monte_carlo::{monte_carlo_step, search_radius};
pub use pattern::{gps_step, hjps_step};

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, invalid, Error, Result};
use crate::kinematics::{Gait, KinematicSpace, Normalized};
use crate::loss::{kinematic_loss, thrust_loss, LossBreakdown, LossWeights};
use crate::model::ForwardModel;

/// One gait request: reach `target_thrust` starting from `current_gait`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseRequest {
    pub target_thrust: f64,
    pub current_gait: Gait,
    pub weights: LossWeights,
}

impl InverseRequest {
    pub fn validate(&self, space: &KinematicSpace) -> Result<()> {
        if !self.target_thrust.is_finite() {
            return Err(invalid(format!("target thrust {} is not finite", self.target_thrust)));
        }
        self.weights.validate()?;
        if !self.current_gait.is_finite() || !space.is_feasible(&self.current_gait) {
            return Err(invalid(format!(
                "current gait {} is outside the feasible space",
                self.current_gait
            )));
        }
        Ok(())
    }
}

/// Solver parameters. Distances are in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Accepted Monte Carlo samples per request.
    pub mc_samples: usize,
    /// Smallest Monte Carlo ball radius, used when the thrust gap is near zero.
    pub mc_radius_floor: f64,
    /// Total Monte Carlo draws allowed, including rejected infeasible ones.
    pub mc_max_draws: usize,
    /// Initial pattern-search mesh size.
    pub mesh_size: f64,
    pub mesh_divider: f64,
    /// Pattern searches stop once the mesh shrinks below this.
    pub precision: f64,
    /// Maximum forward-model evaluations per request.
    pub evaluation_budget: usize,
    /// Hard cap on pattern-search iterations.
    pub max_iterations: usize,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            mc_samples: 50,
            mc_radius_floor: 0.05,
            mc_max_draws: 5000,
            mesh_size: 3.0,
            mesh_divider: 2.0,
            precision: 0.375,
            evaluation_budget: 5000,
            max_iterations: 10_000,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.precision > 0.0) {
            return Err(config_err("precision must be positive"));
        }
        if !(self.mesh_size >= self.precision) || !self.mesh_size.is_finite() {
            return Err(config_err("mesh size must be finite and at least the precision"));
        }
        if !(self.mesh_divider > 1.0) || !self.mesh_divider.is_finite() {
            return Err(config_err("mesh divider must exceed 1"));
        }
        if self.mc_samples == 0 {
            return Err(config_err("Monte Carlo needs at least one sample"));
        }
        if !(self.mc_radius_floor > 0.0) || !self.mc_radius_floor.is_finite() {
            return Err(config_err("Monte Carlo radius floor must be positive"));
        }
        if self.evaluation_budget == 0 || self.max_iterations == 0 {
            return Err(config_err("evaluation budget and iteration cap must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Copy seeded for one request of a stream, so paired runs across methods
    /// and weights see the same random numbers for the same request.
    pub fn for_request(&self, stream: u64, index: u64) -> Self {
        self.with_seed(mix_seed(mix_seed(self.rng_seed, stream), index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Hjps,
    Gps,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mc, Method::Hjps, Method::Gps];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Hjps => "hjps",
            Method::Gps => "gps",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" | "monte-carlo" | "montecarlo" => Ok(Method::Mc),
            "hjps" | "hooke-jeeves" => Ok(Method::Hjps),
            "gps" => Ok(Method::Gps),
            other => Err(config_err(format!(
                "unknown method {other:?} (expected mc, hjps or gps)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub proposed_gait: Gait,
    pub loss: LossBreakdown,
    /// Model prediction for `proposed_gait`, newtons.
    pub predicted_thrust: f64,
    /// Forward-model evaluations, including the current gait.
    pub evaluations: usize,
    /// Seconds.
    pub wall_time: f64,
    /// The evaluation budget ran out; the result is the best gait seen so far.
    pub budget_exhausted: bool,
}

impl SearchResult {
    /// Equality of everything except the wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.proposed_gait == other.proposed_gait
            && self.loss == other.loss
            && self.predicted_thrust == other.predicted_thrust
            && self.evaluations == other.evaluations
            && self.budget_exhausted == other.budget_exhausted
    }
}

/// Runs the chosen solver and stamps its wall time.
pub fn propose_gait(
    request: &InverseRequest,
    method: Method,
    config: &SearchConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
) -> Result<SearchResult> {
    let start = Instant::now();
    let mut result = match method {
        Method::Mc => monte_carlo_step(request, config, model, space),
        Method::Hjps => hjps_step(request, config, model, space),
        Method::Gps => gps_step(request, config, model, space),
    }?;
    result.wall_time = start.elapsed().as_secs_f64();
    Ok(result)
}

/// SplitMix64 finalizer over `seed ^ value`.
pub fn mix_seed(seed: u64, value: u64) -> u64 {
    let mut z = (seed ^ value.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A scored point of the search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub z: Normalized,
    pub gait: Gait,
    pub loss: LossBreakdown,
    pub predicted: f64,
}

/// Why a solver stopped early.
pub(crate) enum Halt {
    Budget,
    Model(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Model(e)
    }
}

/// Scores points for one request, counting model evaluations against the
/// budget and remembering the best candidate seen.
pub(crate) struct Evaluator<'a> {
    request: &'a InverseRequest,
    model: &'a dyn ForwardModel,
    space: &'a KinematicSpace,
    budget: usize,
    evaluations: usize,
    best: Candidate,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        request: &'a InverseRequest,
        config: &SearchConfig,
        model: &'a dyn ForwardModel,
        space: &'a KinematicSpace,
    ) -> Result<Self> {
        config.validate()?;
        space.validate()?;
        request.validate(space)?;
        let gait = request.current_gait;
        let (loss, predicted) = score(request, model, space, &gait)?;
        Ok(Self {
            request,
            model,
            space,
            budget: config.evaluation_budget,
            evaluations: 1,
            best: Candidate {
                z: space.normalize(&gait),
                gait,
                loss,
                predicted,
            },
        })
    }

    pub fn incumbent(&self) -> Candidate {
        self.best
    }

    pub fn space(&self) -> &KinematicSpace {
        self.space
    }

    /// Total loss at `z`, or `None` when the point is infeasible.
    pub fn eval(&mut self, z: &Normalized) -> Result<Option<f64>, Halt> {
        let gait = self.space.denormalize(z);
        if !self.space.is_feasible(&gait) {
            return Ok(None);
        }
        if self.evaluations >= self.budget {
            return Err(Halt::Budget);
        }
        self.evaluations += 1;
        let (loss, predicted) = score(self.request, self.model, self.space, &gait)?;
        if loss.total < self.best.loss.total {
            self.best = Candidate {
                z: *z,
                gait,
                loss,
                predicted,
            };
        }
        Ok(Some(loss.total))
    }

    /// Converts the solver outcome into a result holding the best candidate.
    pub fn finish(self, outcome: Result<(), Halt>, start: Instant) -> Result<SearchResult> {
        let budget_exhausted = match outcome {
            Ok(()) => false,
            Err(Halt::Budget) => true,
            Err(Halt::Model(e)) => return Err(e),
        };
        Ok(SearchResult {
            proposed_gait: self.best.gait,
            loss: self.best.loss,
            predicted_thrust: self.best.predicted,
            evaluations: self.evaluations,
            wall_time: start.elapsed().as_secs_f64(),
            budget_exhausted,
        })
    }
}

fn score(
    request: &InverseRequest,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
    gait: &Gait,
) -> Result<(LossBreakdown, f64)> {
    // Same arithmetic as `total_loss`, keeping the signed prediction.
    let predicted = model.predict_mean_thrust(gait)?;
    let loss = LossBreakdown::combine(
        &request.weights,
        thrust_loss(request.target_thrust, predicted),
        kinematic_loss(&request.current_gait, gait, space),
        0.0,
    );
    Ok((loss, predicted))
}
