//! Monte Carlo sampling in a ball around the current gait.
//!
//! The ball radius scales with the thrust gap: `a = d_t / 10` normalized
//! units, where `d_t` is the absolute difference between the current gait's
//! predicted thrust and the target, floored at `mc_radius_floor`. Points are
//! drawn uniformly from the open ball (Gaussian direction, radius
//! `a · U^(1/4)`); infeasible draws are rejected and redrawn until
//! `mc_samples` points are accepted or `mc_max_draws` is spent.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Evaluator, Halt, InverseRequest, SearchConfig, SearchResult};
use crate::error::Result;
use crate::kinematics::{KinematicSpace, Normalized, NUM_KINEMATICS};
use crate::model::ForwardModel;

/// Ball radius in normalized units for a given thrust gap.
pub fn search_radius(thrust_gap: f64, floor: f64) -> f64 {
    (thrust_gap / 10.0).max(floor)
}

pub fn monte_carlo_step(
    request: &InverseRequest,
    config: &SearchConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
) -> Result<SearchResult> {
    let start = Instant::now();
    let mut ev = Evaluator::new(request, config, model, space)?;
    let outcome = sample(&mut ev, config);
    ev.finish(outcome, start)
}

fn sample(ev: &mut Evaluator<'_>, config: &SearchConfig) -> Result<(), Halt> {
    let incumbent = ev.incumbent();
    let center = incumbent.z;
    let radius = search_radius(incumbent.loss.thrust_loss, config.mc_radius_floor);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut accepted = 0;
    let mut draws = 0;
    while accepted < config.mc_samples && draws < config.mc_max_draws {
        draws += 1;
        let z = draw_in_ball(&mut rng, &center, radius);
        if !ev.space().is_feasible(&ev.space().denormalize(&z)) {
            continue;
        }
        accepted += 1;
        ev.eval(&z)?;
    }
    Ok(())
}

/// Uniform draw from the open ball of `radius` around `center`.
pub(crate) fn draw_in_ball<R: Rng>(rng: &mut R, center: &Normalized, radius: f64) -> Normalized {
    loop {
        let dir: [f64; NUM_KINEMATICS] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / NUM_KINEMATICS as f64);
        return std::array::from_fn(|i| center[i] + r * dir[i] / norm);
    }
}
