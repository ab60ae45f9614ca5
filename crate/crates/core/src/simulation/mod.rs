//! Closed-loop context: plant, controller, request streams, and thrust symmetry.

mod closed_loop;
mod pid;
mod plant;
mod requests;
mod symmetry;

pub use closed_loop::{
    generate_targets, run_closed_loop, ClosedLoopConfig, CycleRecord, Trajectory, CYCLES_PER_TARGET, TARGETS_PER_RUN,
    TARGET_RANGE, TRAJECTORY_HEADER,
};
pub use pid::{pid_step, PidConfig, PidState};
pub use plant::{plant_step, PlantState, MAX_SUBSTEP};
pub use requests::{
    generate_synthetic_requests, Provenance, ThrustRequestSet, REQUEST_MAX, REQUEST_MIN, SYNTHETIC_REQUESTS,
};
pub use symmetry::{mirror_gait, Mirrored};
