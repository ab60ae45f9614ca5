//! Multi-objective gait loss: `L = w_t·L_t + w_k·L_k + w_e·L_e`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kinematics::{distance, Gait, KinematicSpace};
use crate::model::ForwardModel;

/// Relative importance of thrust accuracy, kinematic smoothness, and efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub thrust: f64,
    pub kinematic: f64,
    #[serde(default)]
    pub efficiency: f64,
}

impl LossWeights {
    pub fn new(thrust: f64, kinematic: f64, efficiency: f64) -> Result<Self> {
        let w = Self {
            thrust,
            kinematic,
            efficiency,
        };
        w.validate()?;
        Ok(w)
    }

    /// `w_t` with `w_k = 1 − w_t` and no efficiency term.
    pub fn thrust_tradeoff(thrust: f64) -> Result<Self> {
        Self::new(thrust, 1.0 - thrust, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.thrust, self.kinematic, self.efficiency];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid(format!("loss weights must be non-negative, got {all:?}")));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(invalid("at least one loss weight must be positive"));
        }
        Ok(())
    }
}

/// Individual loss terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Newtons.
    pub thrust_loss: f64,
    /// Normalized-space distance.
    pub kinematic_loss: f64,
    /// Negative propulsive efficiency; zero when no operating point is known.
    pub efficiency_loss: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn combine(weights: &LossWeights, thrust_loss: f64, kinematic_loss: f64, efficiency_loss: f64) -> Self {
        Self {
            thrust_loss,
            kinematic_loss,
            efficiency_loss,
            total: weights.thrust * thrust_loss
                + weights.kinematic * kinematic_loss
                + weights.efficiency * efficiency_loss,
        }
    }
}

pub fn thrust_loss(target: f64, predicted: f64) -> f64 {
    (target - predicted).abs()
}

/// Euclidean distance between two gaits in normalized space.
pub fn kinematic_loss(current: &Gait, proposed: &Gait, space: &KinematicSpace) -> f64 {
    distance(&space.normalize(current), &space.normalize(proposed))
}

/// `−η` with `η = thrust · velocity / power`, so higher efficiency lowers the loss.
pub fn efficiency_loss(thrust: f64, velocity: f64, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(invalid(format!("power must be positive, got {power}")));
    }
    Ok(-(thrust * velocity / power))
}

/// Vehicle speed and fin power draw, when known, for the efficiency term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub velocity: f64,
    pub power: f64,
}

/// Evaluates the model once and returns every loss term for `proposed`.
pub fn total_loss(
    target: f64,
    current: &Gait,
    proposed: &Gait,
    weights: &LossWeights,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
    operating_point: Option<OperatingPoint>,
) -> Result<LossBreakdown> {
    let predicted = model.predict_mean_thrust(proposed)?;
    let efficiency = match operating_point {
        Some(op) => efficiency_loss(predicted, op.velocity, op.power)?,
        None => 0.0,
    };
    Ok(LossBreakdown::combine(
        weights,
        thrust_loss(target, predicted),
        kinematic_loss(current, proposed, space),
        efficiency,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SyntheticSurrogate;
    use proptest::prelude::*;

    struct Constant(f64);

    impl ForwardModel for Constant {
        fn predict_mean_thrust(&self, _: &Gait) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn gait() -> impl Strategy<Value = Gait> {
        (0.0..55.0, 0.0..55.0, 0.75..2.0, -0.0625..0.125).prop_map(|(a, b, c, d)| Gait::new(a, b, c, d))
    }

    #[test]
    fn thrust_loss_examples() {
        assert_eq!(thrust_loss(1.0, 1.0), 0.0);
        assert!((thrust_loss(1.0, 0.8) - 0.2).abs() < 1e-15);
        assert_eq!(thrust_loss(-0.5, 0.5), 1.0);
    }

    #[test]
    fn kinematic_loss_examples() {
        let space = KinematicSpace::default();
        let g = Gait::new(25.0, 32.0, 1.25, 0.0);
        assert_eq!(kinematic_loss(&g, &g, &space), 0.0);
        assert_eq!(kinematic_loss(&g, &Gait::new(35.0, 32.0, 1.25, 0.0), &space), 1.0);
        assert_eq!(kinematic_loss(&g, &Gait::new(25.0, 32.0, 1.5, 0.0), &space), 1.0);
        let two = kinematic_loss(&g, &Gait::new(25.0, 42.0, 1.25, 0.0625), &space);
        assert!((two - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency_loss(1.0, 1.0, 2.0).unwrap(), -0.5);
        assert_eq!(efficiency_loss(0.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(efficiency_loss(1.0, 1.0, 0.0).is_err());
        assert!(efficiency_loss(1.0, 1.0, -3.0).is_err());
        let w = LossWeights::new(0.9, 0.1, 0.0).unwrap();
        let b = LossBreakdown::combine(&w, 0.1, 2.0, efficiency_loss(1.0, 1.0, 2.0).unwrap());
        assert_eq!(b.total, 0.9 * 0.1 + 0.1 * 2.0);
    }

    #[test]
    fn total_loss_examples() {
        let space = KinematicSpace::default();
        let g = Gait::new(25.0, 32.0, 1.25, 0.0);
        for w in [(1.0, 0.0, 0.0), (0.3, 0.7, 0.0), (0.2, 0.2, 0.6)] {
            let w = LossWeights::new(w.0, w.1, w.2).unwrap();
            let b = total_loss(0.6, &g, &g, &w, &Constant(0.6), &space, None).unwrap();
            assert_eq!(b.total, 0.0);
        }

        let proposed = Gait::new(40.0, 32.0, 1.25, 0.0);
        let w = LossWeights::new(1.0, 0.0, 0.0).unwrap();
        let b = total_loss(1.0, &g, &proposed, &w, &Constant(0.7), &space, None).unwrap();
        assert_eq!(b.total, b.thrust_loss);

        let w = LossWeights::new(0.9, 0.1, 0.0).unwrap();
        let b = LossBreakdown::combine(&w, 0.1, 2.0, 0.0);
        assert!((b.total - 0.29).abs() < 1e-15);

        let op = OperatingPoint {
            velocity: 1.0,
            power: 2.0,
        };
        let w = LossWeights::new(0.9, 0.1, 0.0).unwrap();
        let b = total_loss(1.0, &g, &g, &w, &Constant(1.0), &space, Some(op)).unwrap();
        assert_eq!(b.efficiency_loss, -0.5);
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn weights_validation() {
        assert!(LossWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(LossWeights::new(-0.1, 1.0, 0.0).is_err());
        assert!(LossWeights::new(f64::NAN, 1.0, 0.0).is_err());
        let w = LossWeights::thrust_tradeoff(0.95).unwrap();
        assert!((w.kinematic - 0.05).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn kinematic_loss_is_a_metric(a in gait(), b in gait(), c in gait()) {
            let s = KinematicSpace::default();
            let ab = kinematic_loss(&a, &b, &s);
            prop_assert_eq!(ab, kinematic_loss(&b, &a, &s));
            prop_assert!(ab <= kinematic_loss(&a, &c, &s) + kinematic_loss(&c, &b, &s) + 1e-12);
        }

        #[test]
        fn doubling_steps_halves_kinematic_loss(a in gait(), b in gait()) {
            let s = KinematicSpace::default();
            let mut s2 = s.clone();
            s2.step_sizes = Gait::from_array(s.step_sizes.to_array().map(|v| 2.0 * v));
            let l = kinematic_loss(&a, &b, &s);
            prop_assert!((kinematic_loss(&a, &b, &s2) - 0.5 * l).abs() <= 1e-12 * l.max(1.0));
        }

        #[test]
        fn total_is_linear_in_weights(a in gait(), b in gait(), t in 0.2..1.2f64, wt in 0.0..1.0f64, wk in 0.0..1.0f64) {
            let s = KinematicSpace::default();
            let model = SyntheticSurrogate::default();
            let unit = |w: (f64, f64)| {
                LossWeights { thrust: w.0, kinematic: w.1, efficiency: 0.0 }
            };
            let lt = total_loss(t, &a, &b, &unit((1.0, 0.0)), &model, &s, None).unwrap().total;
            let lk = total_loss(t, &a, &b, &unit((0.0, 1.0)), &model, &s, None).unwrap().total;
            let both = total_loss(t, &a, &b, &unit((wt, wk)), &model, &s, None).unwrap().total;
            prop_assert!((both - (wt * lt + wk * lk)).abs() <= 1e-12);
        }
    }
}
