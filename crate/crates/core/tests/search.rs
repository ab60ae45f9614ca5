mod common;

use std::sync::Mutex;

use common::{default_meshes, random_request, trap_request};
use fingait_core::search::{gps_step, hjps_step, monte_carlo_step, search_radius};
use fingait_core::{
    propose_gait, ForwardModel, Gait, InverseRequest, KinematicSpace, LossWeights, Method, Result, SearchConfig,
    SyntheticSurrogate,
};
use proptest::prelude::*;

/// Records every gait it is asked about.
struct Recording<M> {
    inner: M,
    calls: Mutex<Vec<Gait>>,
}

impl<M> Recording<M> {
    fn new(inner: M) -> Self {
        Self {
            inner,
            calls: Mutex::new(Vec::new()),
        }
    }

    fn calls(&self) -> Vec<Gait> {
        self.calls.lock().unwrap().clone()
    }
}

impl<M: ForwardModel> ForwardModel for Recording<M> {
    fn predict_mean_thrust(&self, gait: &Gait) -> Result<f64> {
        self.calls.lock().unwrap().push(*gait);
        self.inner.predict_mean_thrust(gait)
    }
}

/// `|stroke / 10 − 3.7|`: a V in normalized stroke, flat along every other axis.
struct Vee;

impl ForwardModel for Vee {
    fn predict_mean_thrust(&self, g: &Gait) -> Result<f64> {
        Ok((g.stroke_amplitude / 10.0 - 3.7).abs())
    }
}

#[test]
fn hjps_follows_the_hand_trace() {
    // Target 0 with w = (1, 0, 0): the loss is the V itself, minimum at
    // stroke 37°. Starting from stroke 0 at 1 Hz, mesh 3 → 1.5 → 0.75 → 0.375:
    //   mesh 3:    stroke +3 (30°) improves 3.7 → 0.7; the other axes tie or
    //              leave the box; the pattern step to 60° leaves the box.
    //   mesh 3:    poll fails (60° infeasible, 0° worse), mesh halves.
    //   mesh 1.5:  45° and 15° are both worse, mesh halves.
    //   mesh 0.75: 37.5° improves to 0.05; pattern step to 45° fails.
    //   mesh 0.75: poll fails, mesh halves.
    //   mesh .375: 41.25° and 33.75° are worse, mesh drops below precision.
    let model = Recording::new(Vee);
    let request = InverseRequest {
        target_thrust: 0.0,
        current_gait: Gait::new(0.0, 0.0, 1.0, 0.0),
        weights: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
    };
    let r = hjps_step(&request, &SearchConfig::default(), &model, &KinematicSpace::default()).unwrap();
    let g = Gait::new;
    let expected = vec![
        g(0.0, 0.0, 1.0, 0.0),
        // mesh 3
        g(30.0, 0.0, 1.0, 0.0),
        g(30.0, 30.0, 1.0, 0.0),
        g(30.0, 0.0, 1.75, 0.0),
        g(0.0, 0.0, 1.0, 0.0),
        g(30.0, 30.0, 1.0, 0.0),
        g(30.0, 0.0, 1.75, 0.0),
        // mesh 1.5
        g(45.0, 0.0, 1.0, 0.0),
        g(15.0, 0.0, 1.0, 0.0),
        g(30.0, 15.0, 1.0, 0.0),
        g(30.0, 0.0, 1.375, 0.0),
        g(30.0, 0.0, 1.0, 0.09375),
        // mesh 0.75
        g(37.5, 0.0, 1.0, 0.0),
        g(37.5, 7.5, 1.0, 0.0),
        g(37.5, 0.0, 1.1875, 0.0),
        g(37.5, 0.0, 0.8125, 0.0),
        g(37.5, 0.0, 1.0, 0.046875),
        g(37.5, 0.0, 1.0, -0.046875),
        g(45.0, 0.0, 1.0, 0.0),
        g(45.0, 0.0, 1.0, 0.0),
        g(30.0, 0.0, 1.0, 0.0),
        g(37.5, 7.5, 1.0, 0.0),
        g(37.5, 0.0, 1.1875, 0.0),
        g(37.5, 0.0, 0.8125, 0.0),
        g(37.5, 0.0, 1.0, 0.046875),
        g(37.5, 0.0, 1.0, -0.046875),
        // mesh 0.375
        g(41.25, 0.0, 1.0, 0.0),
        g(33.75, 0.0, 1.0, 0.0),
        g(37.5, 3.75, 1.0, 0.0),
        g(37.5, 0.0, 1.09375, 0.0),
        g(37.5, 0.0, 0.90625, 0.0),
        g(37.5, 0.0, 1.0, 0.0234375),
        g(37.5, 0.0, 1.0, -0.0234375),
    ];
    assert_eq!(model.calls(), expected);
    assert_eq!(r.proposed_gait, g(37.5, 0.0, 1.0, 0.0));
    assert!((r.loss.total - 0.05).abs() < 1e-12);
    assert_eq!(r.evaluations, expected.len());
    assert!(!r.budget_exhausted);
}

/// `−‖z − z*‖²` in normalized units, so target 0 gives a convex quadratic loss.
struct Bowl(Gait);

impl ForwardModel for Bowl {
    fn predict_mean_thrust(&self, g: &Gait) -> Result<f64> {
        let space = KinematicSpace::default();
        let a = space.normalize(g);
        let b = space.normalize(&self.0);
        Ok(-a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
    }
}

#[test]
fn pattern_searches_converge_on_a_convex_bowl() {
    let cfg = SearchConfig::default();
    let space = KinematicSpace::default();
    let centre = Gait::new(33.0, 21.0, 1.1, 0.04);
    let model = Bowl(centre);
    let request = InverseRequest {
        target_thrust: 0.0,
        current_gait: Gait::new(5.0, 45.0, 0.8, -0.05),
        weights: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
    };
    // Grid-scan oracle at half the precision around the feasible box.
    let h = cfg.precision / 2.0;
    let lo = space.normalize(&space.lower_bounds);
    let hi = space.normalize(&space.upper_bounds);
    let mut best = (f64::INFINITY, [0.0; 4]);
    let n = |i: usize| ((hi[i] - lo[i]) / h).floor() as usize;
    for a in 0..=n(0) {
        for b in 0..=n(1) {
            for c in 0..=n(2) {
                for d in 0..=n(3) {
                    let z = [
                        lo[0] + a as f64 * h,
                        lo[1] + b as f64 * h,
                        lo[2] + c as f64 * h,
                        lo[3] + d as f64 * h,
                    ];
                    let g = space.denormalize(&z);
                    if space.is_feasible(&g) {
                        let l = -model.predict_mean_thrust(&g).unwrap();
                        if l < best.0 {
                            best = (l, z);
                        }
                    }
                }
            }
        }
    }
    for step in [hjps_step, gps_step] {
        let r = step(&request, &cfg, &model, &space).unwrap();
        let z = space.normalize(&r.proposed_gait);
        let dist = z
            .iter()
            .zip(&best.1)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(
            dist <= cfg.precision,
            "{} is {dist} from the grid minimizer",
            r.proposed_gait
        );
    }
}

#[test]
fn trap_poll_enumeration() {
    let request = trap_request();
    let model = SyntheticSurrogate::default();
    let space = KinematicSpace::default();
    let z0 = space.normalize(&request.current_gait);
    let loss = |g: &Gait| {
        fingait_core::total_loss(
            request.target_thrust,
            &request.current_gait,
            g,
            &request.weights,
            &model,
            &space,
            None,
        )
        .unwrap()
        .total
    };
    let f0 = loss(&request.current_gait);
    let mut composite_wins = false;
    for mesh in default_meshes() {
        let mut per_axis = [(f64::INFINITY, 0.0); 4];
        for axis in 0..4 {
            for sign in [1.0, -1.0] {
                let mut z = z0;
                z[axis] += sign * mesh;
                let g = space.denormalize(&z);
                let f = if space.is_feasible(&g) { loss(&g) } else { f64::INFINITY };
                assert!(f >= f0, "mesh {mesh} axis {axis} sign {sign}: {f} < {f0}");
                if f < per_axis[axis].0 || (f == per_axis[axis].0 && sign > 0.0) {
                    per_axis[axis] = (f, sign);
                }
            }
        }
        // The all-axes composite of the cheapest directions, or any prefix of
        // the sorted list down to two axes.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| per_axis[a].0.total_cmp(&per_axis[b].0));
        for count in (2..=4).rev() {
            let mut z = z0;
            for &axis in &order[..count] {
                z[axis] += per_axis[axis].1 * mesh;
            }
            let g = space.denormalize(&z);
            if space.is_feasible(&g) && loss(&g) < f0 {
                composite_wins = true;
            }
        }
    }
    assert!(composite_wins);
}

#[test]
fn trap_holds_hjps_and_gps_escapes() {
    let request = trap_request();
    let model = SyntheticSurrogate::default();
    let space = KinematicSpace::default();
    let cfg = SearchConfig::default();
    let h = hjps_step(&request, &cfg, &model, &space).unwrap();
    let g = gps_step(&request, &cfg, &model, &space).unwrap();
    assert_eq!(h.proposed_gait, request.current_gait);
    assert!(g.loss.total < h.loss.total);
    assert!(space.is_feasible(&g.proposed_gait));
}

#[test]
fn gps_retraces_hjps_when_composites_fail() {
    // On the V, composite moves only add flat or worsening axes, so GPS visits
    // the HJPS points in order, with its extra probes in between.
    let request = InverseRequest {
        target_thrust: 0.0,
        current_gait: Gait::new(0.0, 0.0, 1.0, 0.0),
        weights: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
    };
    let cfg = SearchConfig::default();
    let space = KinematicSpace::default();
    let a = Recording::new(Vee);
    let b = Recording::new(Vee);
    let h = hjps_step(&request, &cfg, &a, &space).unwrap();
    let g = gps_step(&request, &cfg, &b, &space).unwrap();
    assert!(is_subsequence(&a.calls(), &b.calls()));
    assert!(b.calls().len() > a.calls().len());
    assert_eq!(h.proposed_gait, g.proposed_gait);
    assert_eq!(h.loss, g.loss);
}

fn is_subsequence(short: &[Gait], long: &[Gait]) -> bool {
    let mut it = long.iter();
    short.iter().all(|g| it.any(|h| h == g))
}

#[test]
fn gps_beats_hjps_on_pure_thrust() {
    // Per instance GPS can only be worse once a composite move has sent it
    // down a different path; while it shadows HJPS it keeps every HJPS point.
    let space = KinematicSpace::default();
    let (mut sum_h, mut sum_g, mut shadowed) = (0.0, 0.0, 0);
    for seed in 0..300 {
        let mut request = random_request(seed);
        request.weights = LossWeights::new(1.0, 0.0, 0.0).unwrap();
        let cfg = SearchConfig::default().with_seed(seed);
        let a = Recording::new(SyntheticSurrogate::default());
        let b = Recording::new(SyntheticSurrogate::default());
        let h = hjps_step(&request, &cfg, &a, &space).unwrap();
        let g = gps_step(&request, &cfg, &b, &space).unwrap();
        if is_subsequence(&a.calls(), &b.calls()) {
            shadowed += 1;
            assert!(g.loss.total <= h.loss.total, "seed {seed}");
        }
        sum_h += h.loss.total;
        sum_g += g.loss.total;
    }
    assert!(shadowed > 0);
    assert!(
        sum_g <= sum_h,
        "gps mean {} > hjps mean {}",
        sum_g / 300.0,
        sum_h / 300.0
    );
}

#[test]
fn dispatch_matches_direct_calls() {
    let model = SyntheticSurrogate::default();
    let space = KinematicSpace::default();
    let request = random_request(11);
    let cfg = SearchConfig::default().with_seed(5);
    let direct = [
        monte_carlo_step(&request, &cfg, &model, &space).unwrap(),
        hjps_step(&request, &cfg, &model, &space).unwrap(),
        gps_step(&request, &cfg, &model, &space).unwrap(),
    ];
    for (method, d) in Method::ALL.into_iter().zip(direct) {
        let r = propose_gait(&request, method, &cfg, &model, &space).unwrap();
        assert!(r.same_outcome(&d), "{method}");
        assert!(r.wall_time > 0.0);
    }
}

#[test]
fn budget_exhaustion_returns_best_so_far() {
    let model = SyntheticSurrogate::default();
    let space = KinematicSpace::default();
    let request = InverseRequest {
        target_thrust: 1.1,
        current_gait: Gait::new(10.0, 10.0, 1.0, 0.0),
        weights: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
    };
    for method in Method::ALL {
        let cfg = SearchConfig {
            evaluation_budget: 4,
            ..SearchConfig::default()
        };
        let r = propose_gait(&request, method, &cfg, &model, &space).unwrap();
        assert!(r.budget_exhausted, "{method}");
        assert_eq!(r.evaluations, 4);
        assert!(
            r.loss.total < (1.1 - model.thrust(&request.current_gait)).abs(),
            "{method}"
        );
        let full = propose_gait(&request, method, &SearchConfig::default(), &model, &space).unwrap();
        assert!(!full.budget_exhausted);
    }
}

#[test]
fn monte_carlo_on_target_stays_put() {
    let model = SyntheticSurrogate::default();
    let space = KinematicSpace::default();
    let g = Gait::new(30.0, 20.0, 1.25, 0.05);
    let request = InverseRequest {
        target_thrust: model.thrust(&g),
        current_gait: g,
        weights: LossWeights::new(0.9, 0.1, 0.0).unwrap(),
    };
    let r = monte_carlo_step(&request, &SearchConfig::default(), &model, &space).unwrap();
    assert_eq!(r.proposed_gait, g);
    assert_eq!(r.loss.total, 0.0);
    assert_eq!(search_radius(0.0, 0.05), 0.05);
}

#[test]
fn monte_carlo_samples_stay_inside_the_ball() {
    let model = Recording::new(SyntheticSurrogate::default());
    let space = KinematicSpace::default();
    let g = Gait::new(30.0, 20.0, 1.25, 0.0);
    let request = InverseRequest {
        target_thrust: 1.2,
        current_gait: g,
        weights: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
    };
    let gap = (1.2 - SyntheticSurrogate::default().thrust(&g)).abs();
    let cfg = SearchConfig::default();
    let r = monte_carlo_step(&request, &cfg, &model, &space).unwrap();
    let calls = model.calls();
    assert_eq!(calls.len(), cfg.mc_samples + 1);
    assert_eq!(r.evaluations, calls.len());
    let radius = search_radius(gap, cfg.mc_radius_floor);
    for c in &calls[1..] {
        assert!(fingait_core::loss::kinematic_loss(&g, c, &space) < radius);
        assert!(space.is_feasible(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvers_never_worsen_and_stay_feasible(seed in 0u64..1_000_000) {
        let model = SyntheticSurrogate::default();
        let space = KinematicSpace::default();
        let request = random_request(seed);
        let start = fingait_core::total_loss(request.target_thrust, &request.current_gait, &request.current_gait, &request.weights, &model, &space, None).unwrap();
        for method in Method::ALL {
            let cfg = SearchConfig::default().with_seed(seed);
            let r = propose_gait(&request, method, &cfg, &model, &space).unwrap();
            prop_assert!(r.loss.total <= start.total);
            prop_assert!(space.is_feasible(&r.proposed_gait));
            let again = propose_gait(&request, method, &cfg, &model, &space).unwrap();
            prop_assert!(r.same_outcome(&again));
        }
    }
}
