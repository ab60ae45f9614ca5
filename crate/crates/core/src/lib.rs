//! Search-based inverse gait model for flapping-fin underwater vehicles.
//!
//! Given a target thrust, the current gait, and loss weights, the solvers in
//! [`search`] pick the next gait by minimizing a weighted sum of thrust error
//! and kinematic change, scored through a pluggable [`ForwardModel`].

pub mod error;
pub mod experiment;
pub mod kinematics;
pub mod loss;
pub mod model;
pub mod search;
pub mod simulation;

pub use error::{Error, Result};
pub use kinematics::{generate_time_history, normalize, Gait, KinematicSpace, MotorLimits, TimeHistory};
pub use loss::{total_loss, LossBreakdown, LossWeights, OperatingPoint};
pub use model::{ForwardModel, SyntheticSurrogate};
pub use search::{propose_gait, InverseRequest, Method, SearchConfig, SearchResult};
pub use simulation::{mirror_gait, pid_step, plant_step, PidConfig, PlantState, ThrustRequestSet};
