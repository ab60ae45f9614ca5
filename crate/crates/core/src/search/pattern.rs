//! Hooke-Jeeves pattern search and its search-upon-poll-failure extension.
//!
//! Both solvers share the same outer loop over a mesh anchored at the current
//! gait:
//!
//! 1. Poll: for each axis in turn, try `+mesh` then `-mesh` from the running
//!    base, keeping any strict improvement.
//! 2. On a successful poll, keep stepping along the poll displacement
//!    `x_new - x_prev` while the loss keeps dropping.
//! 3. On a failed poll, the extended solver builds a composite direction from
//!    the cheapest direction per axis and tries it before giving up (see
//!    [`composite_search`]). Otherwise the mesh is divided by the divider.
//!
//! The loop ends once the mesh is smaller than the precision.

use std::time::Instant;

use super::{Evaluator, Halt, InverseRequest, SearchConfig, SearchResult};
use crate::error::Result;
use crate::kinematics::{KinematicSpace, Normalized, NUM_KINEMATICS};
use crate::model::ForwardModel;

/// Classic Hooke-Jeeves pattern search.
pub fn hjps_step(
    request: &InverseRequest,
    config: &SearchConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
) -> Result<SearchResult> {
    run(request, config, model, space, false)
}

/// Hooke-Jeeves with a composite multi-axis search after every failed poll.
pub fn gps_step(
    request: &InverseRequest,
    config: &SearchConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
) -> Result<SearchResult> {
    run(request, config, model, space, true)
}

fn run(
    request: &InverseRequest,
    config: &SearchConfig,
    model: &dyn ForwardModel,
    space: &KinematicSpace,
    composite: bool,
) -> Result<SearchResult> {
    let start = Instant::now();
    let mut ev = Evaluator::new(request, config, model, space)?;
    let outcome = pattern_search(&mut ev, config, composite);
    ev.finish(outcome, start)
}

/// Per-axis poll losses around an unchanged base; `INFINITY` marks infeasible.
type PollRecord = [[f64; 2]; NUM_KINEMATICS];

enum Poll {
    Improved(Normalized, f64),
    Failed(PollRecord),
}

fn pattern_search(ev: &mut Evaluator<'_>, config: &SearchConfig, composite: bool) -> Result<(), Halt> {
    let start = ev.incumbent();
    let mut x = start.z;
    let mut fx = start.loss.total;
    let mut mesh = config.mesh_size;
    let mut iterations = 0;
    while mesh >= config.precision {
        iterations += 1;
        if iterations > config.max_iterations {
            break;
        }
        match poll(ev, &x, fx, mesh)? {
            Poll::Improved(y, fy) => {
                let direction = sub(&y, &x);
                x = y;
                fx = fy;
                advance_while_improving(ev, &mut x, &mut fx, &direction)?;
            }
            Poll::Failed(record) => {
                if composite && composite_search(ev, &mut x, &mut fx, &record, mesh)? {
                    continue;
                }
                mesh /= config.mesh_divider;
            }
        }
    }
    Ok(())
}

/// Exploratory moves along the standard basis at the given mesh size.
fn poll(ev: &mut Evaluator<'_>, x: &Normalized, fx: f64, mesh: f64) -> Result<Poll, Halt> {
    let mut base = *x;
    let mut fbase = fx;
    let mut improved = false;
    let mut record = [[f64::INFINITY; 2]; NUM_KINEMATICS];
    for axis in 0..NUM_KINEMATICS {
        for (side, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut y = base;
            y[axis] += sign * mesh;
            let fy = ev.eval(&y)?.unwrap_or(f64::INFINITY);
            record[axis][side] = fy;
            if fy < fbase {
                base = y;
                fbase = fy;
                improved = true;
                break;
            }
        }
    }
    Ok(if improved {
        Poll::Improved(base, fbase)
    } else {
        Poll::Failed(record)
    })
}

/// Steps `x` along `direction` for as long as each step strictly improves.
/// Returns whether any step was taken.
fn advance_while_improving(
    ev: &mut Evaluator<'_>,
    x: &mut Normalized,
    fx: &mut f64,
    direction: &Normalized,
) -> Result<bool, Halt> {
    let mut moved = false;
    loop {
        let y = add(x, direction);
        match ev.eval(&y)? {
            Some(fy) if fy < *fx => {
                *x = y;
                *fx = fy;
                moved = true;
            }
            _ => return Ok(moved),
        }
    }
}

/// Search upon poll failure.
///
/// For each axis keep the poll direction with the smaller loss increase,
/// sort axes by that increase, and step along the sum of all of them while
/// the loss improves. If the sum fails outright, drop the axis with the
/// largest increase and retry, down to two axes (single axes were already
/// covered by the poll). Returns whether the incumbent moved.
fn composite_search(
    ev: &mut Evaluator<'_>,
    x: &mut Normalized,
    fx: &mut f64,
    record: &PollRecord,
    mesh: f64,
) -> Result<bool, Halt> {
    let mut moves: Vec<(f64, usize, f64)> = (0..NUM_KINEMATICS)
        .map(|axis| {
            let [plus, minus] = record[axis];
            if minus < plus {
                (minus - *fx, axis, -mesh)
            } else {
                (plus - *fx, axis, mesh)
            }
        })
        .collect();
    moves.sort_by(|a, b| a.0.total_cmp(&b.0));

    for count in (2..=NUM_KINEMATICS).rev() {
        let mut v = [0.0; NUM_KINEMATICS];
        for &(_, axis, step) in &moves[..count] {
            v[axis] = step;
        }
        if advance_while_improving(ev, x, fx, &v)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn add(a: &Normalized, b: &Normalized) -> Normalized {
    std::array::from_fn(|i| a[i] + b[i])
}

fn sub(a: &Normalized, b: &Normalized) -> Normalized {
    std::array::from_fn(|i| a[i] - b[i])
}
