//! Fixed workloads shared by the benchmarks.

use fingait_core::simulation::generate_synthetic_requests;
use fingait_core::{Gait, InverseRequest, LossWeights};

/// The first requests of a seeded synthetic set, each starting from the
/// default sweep gait, with `w = (0.95, 0.05, 0)`.
pub fn request_workload(count: usize, max_step: f64, seed: u64) -> Vec<InverseRequest> {
    let set = generate_synthetic_requests(max_step, seed).expect("valid max step");
    let weights = LossWeights::thrust_tradeoff(0.95).expect("valid weight");
    set.requests
        .iter()
        .take(count)
        .map(|&target_thrust| InverseRequest {
            target_thrust,
            current_gait: Gait::new(25.0, 25.0, 1.0, 0.0),
            weights,
        })
        .collect()
}
