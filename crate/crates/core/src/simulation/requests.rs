//! Synthetic thrust-request sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const SYNTHETIC_REQUESTS: usize = 100;
pub const REQUEST_MIN: f64 = 0.2;
pub const REQUEST_MAX: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { max_step: f64 },
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustRequestSet {
    /// Newtons, in request order.
    pub requests: Vec<f64>,
    pub provenance: Provenance,
}

/// 100 requests in `[0.2, 1.2]` N whose adjacent differences are at most `max_step`.
///
/// The first request is uniform over the range; each next one adds a
/// uniform step in `[-max_step, max_step]` and reflects off the range ends.
pub fn generate_synthetic_requests(max_step: f64, seed: u64) -> Result<ThrustRequestSet> {
    if !(max_step > 0.0 && max_step <= REQUEST_MAX - REQUEST_MIN) {
        return Err(invalid(format!("max step must lie in (0, 1] N, got {max_step}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: f64 = rng.random_range(REQUEST_MIN..=REQUEST_MAX);
    let mut requests = Vec::with_capacity(SYNTHETIC_REQUESTS);
    requests.push(current);
    while requests.len() < SYNTHETIC_REQUESTS {
        let step: f64 = rng.random_range(-max_step..=max_step);
        current = reflect(current + step);
        requests.push(current);
    }
    Ok(ThrustRequestSet {
        requests,
        provenance: Provenance::Synthetic { max_step },
    })
}

fn reflect(x: f64) -> f64 {
    if x > REQUEST_MAX {
        (2.0 * REQUEST_MAX - x).max(REQUEST_MIN)
    } else if x < REQUEST_MIN {
        (2.0 * REQUEST_MIN - x).min(REQUEST_MAX)
    } else {
        x
    }
}
