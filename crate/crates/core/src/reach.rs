//! Friction-coupled reaching driven by motor units, and the grid search over
//! contraction durations that traces the achievable (distance, time) pairs.
//!
//! A unit point mass starts at rest at `x = 0`. Every actuator is recruited
//! at `t = 0` and released after its planned duration. The mass accelerates
//! under the summed muscle force minus Coulomb friction:
//!
//! * at rest it stays at rest until the muscle force exceeds `h_s`;
//! * while moving, friction `h_k` opposes the velocity;
//! * it stops for good once the velocity returns to zero with the force no
//!   larger than `h_s` and every actuator released.
//!
//! Integration is fixed-step RK4 on the coupled (position, velocity,
//! activations) state. Motion onset and stop are localized inside a step by
//! bisection, so stop times are not biased by the step grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::muscle::{ActivationParams, MuscleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionSpec {
    /// Force needed to start moving (`h_s`).
    pub static_threshold: f64,
    /// Opposing force while moving (`h_k`).
    pub kinetic: f64,
}

impl FrictionSpec {
    pub fn new(static_threshold: f64, kinetic: f64) -> Result<Self> {
        if !(kinetic.is_finite() && kinetic >= 0.0) {
            return Err(Error::invalid("kinetic", "must be finite and >= 0"));
        }
        if !(static_threshold.is_finite() && static_threshold >= kinetic) {
            return Err(Error::invalid("static_threshold", "must be finite and >= kinetic"));
        }
        Ok(Self {
            static_threshold,
            kinetic,
        })
    }
}

impl Default for FrictionSpec {
    fn default() -> Self {
        Self {
            static_threshold: 0.6,
            kinetic: 0.54,
        }
    }
}

/// Contraction duration per actuator; every actuator starts at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachPlan {
    pub durations: Vec<f64>,
}

impl ReachPlan {
    pub fn new(durations: Vec<f64>) -> Self {
        Self { durations }
    }

    pub fn is_diagonal(&self) -> bool {
        self.durations.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    /// Final rest position.
    pub distance: f64,
    /// Time of the final stop; `None` if the mass never moved.
    pub stop_time: Option<f64>,
    pub plan: ReachPlan,
}

impl FrontierPoint {
    pub fn moved(&self) -> bool {
        self.stop_time.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachConfig {
    pub dt: f64,
    /// Width of the bracket left by event bisection.
    pub event_tolerance: f64,
    /// Simulated time allowed after the last release before giving up.
    pub settle_limit: f64,
}

impl Default for ReachConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            event_tolerance: 1e-6,
            settle_limit: 200.0,
        }
    }
}

/// Contraction durations `0.75, 1.25, ..., 14.75`.
pub fn duration_grid() -> Vec<f64> {
    (0..29).map(|k| 0.75 + 0.5 * k as f64).collect()
}

/// Uniform motor-unit configuration: two units of strength 0.5.
pub fn uniform_muscle() -> MuscleSpec {
    MuscleSpec::new(&[0.5, 0.5]).expect("valid strengths")
}

/// Diverse motor-unit configuration: strengths 0.85 and 0.15.
pub fn diverse_muscle() -> MuscleSpec {
    MuscleSpec::new(&[0.85, 0.15]).expect("valid strengths")
}

#[derive(Debug, Clone)]
struct State {
    x: f64,
    v: f64,
    act: Vec<f64>,
}

/// Actuated point mass with a fixed unit-to-actuator mapping.
struct Body {
    params: ActivationParams,
    friction: FrictionSpec,
    drives: Vec<f64>,
    /// Step index at which each unit is released.
    release_step: Vec<u64>,
}

impl Body {
    fn force(&self, act: &[f64]) -> f64 {
        act.iter().map(|&a| self.params.force(a)).sum()
    }

    fn drive(&self, unit: usize, step: u64) -> f64 {
        if step < self.release_step[unit] {
            self.drives[unit]
        } else {
            0.0
        }
    }

    fn derivative(&self, s: &State, step: u64, moving: bool) -> State {
        let act = s
            .act
            .iter()
            .enumerate()
            .map(|(i, &a)| self.params.derivative(a, self.drive(i, step)))
            .collect();
        let (dx, dv) = if moving {
            (s.v, self.force(&s.act) - self.friction.kinetic)
        } else {
            (0.0, 0.0)
        };
        State { x: dx, v: dv, act }
    }

    fn rk4(&self, s: &State, step: u64, h: f64, moving: bool) -> State {
        let axpy = |base: &State, k: &State, c: f64| State {
            x: base.x + c * k.x,
            v: base.v + c * k.v,
            act: base.act.iter().zip(&k.act).map(|(a, b)| a + c * b).collect(),
        };
        let k1 = self.derivative(s, step, moving);
        let k2 = self.derivative(&axpy(s, &k1, 0.5 * h), step, moving);
        let k3 = self.derivative(&axpy(s, &k2, 0.5 * h), step, moving);
        let k4 = self.derivative(&axpy(s, &k3, h), step, moving);
        State {
            x: s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            act: (0..s.act.len())
                .map(|i| s.act[i] + h / 6.0 * (k1.act[i] + 2.0 * k2.act[i] + 2.0 * k3.act[i] + k4.act[i]))
                .collect(),
        }
    }

    /// Smallest sub-step in `(0, h]` at which `crossed` becomes true,
    /// bracketed to `tol`.
    fn locate<F>(&self, s: &State, step: u64, h: f64, moving: bool, tol: f64, crossed: F) -> f64
    where
        F: Fn(&State) -> bool,
    {
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if crossed(&self.rk4(s, step, mid, moving)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn simulate(
    params: ActivationParams,
    drives: Vec<f64>,
    actuator_of: &[usize],
    plan: &ReachPlan,
    friction: &FrictionSpec,
    config: &ReachConfig,
) -> Result<FrontierPoint> {
    let actuators = actuator_of.iter().copied().max().map_or(0, |m| m + 1);
    if plan.durations.len() != actuators {
        return Err(Error::invalid(
            "plan",
            format!("expected {actuators} durations, got {}", plan.durations.len()),
        ));
    }
    if plan.durations.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::invalid("plan", "durations must be finite and >= 0"));
    }
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    let dt = config.dt;
    let release_step: Vec<u64> = actuator_of
        .iter()
        .map(|&a| (plan.durations[a] / dt).round() as u64)
        .collect();
    let last_release = release_step.iter().copied().max().unwrap_or(0);
    let limit = last_release + (config.settle_limit / dt).ceil() as u64;
    let body = Body {
        params,
        friction: *friction,
        drives,
        release_step,
    };

    let h_s = friction.static_threshold;
    let mut state = State {
        x: 0.0,
        v: 0.0,
        act: vec![0.0; actuator_of.len()],
    };
    let mut moving = false;
    let mut stop_time = None;
    let mut step = 0u64;
    loop {
        if !moving && step >= last_release && body.force(&state.act) <= h_s {
            break;
        }
        if step >= limit {
            return Err(Error::invalid("plan", "mass did not come to rest"));
        }
        let t0 = step as f64 * dt;
        let mut t_in = 0.0;
        let mut remaining = dt;
        // A step can split at most twice: an onset and then a stop.
        for _ in 0..3 {
            if remaining <= 0.0 {
                break;
            }
            let trial = body.rk4(&state, step, remaining, moving);
            if moving && trial.v <= 0.0 {
                let h = body.locate(&state, step, remaining, true, config.event_tolerance, |s| s.v <= 0.0);
                state = body.rk4(&state, step, h, true);
                state.v = 0.0;
                moving = false;
                stop_time = Some(t0 + t_in + h);
                t_in += h;
                remaining -= h;
            } else if !moving && body.force(&trial.act) > h_s {
                let h = body.locate(&state, step, remaining, false, config.event_tolerance, |s| {
                    body.force(&s.act) > h_s
                });
                state = body.rk4(&state, step, h, false);
                moving = true;
                t_in += h;
                remaining -= h;
            } else {
                state = trial;
                remaining = 0.0;
            }
        }
        step += 1;
    }
    Ok(FrontierPoint {
        distance: state.x,
        stop_time,
        plan: plan.clone(),
    })
}

/// Reach produced by one muscle whose motor units are individually timed.
pub fn simulate_reach(muscle: &MuscleSpec, plan: &ReachPlan, friction: &FrictionSpec) -> Result<FrontierPoint> {
    simulate_reach_with(muscle, plan, friction, &ReachConfig::default())
}

pub fn simulate_reach_with(
    muscle: &MuscleSpec,
    plan: &ReachPlan,
    friction: &FrictionSpec,
    config: &ReachConfig,
) -> Result<FrontierPoint> {
    let drives = muscle.units().iter().map(|u| u.drive).collect();
    let actuator_of: Vec<usize> = (0..muscle.len()).collect();
    simulate(*muscle.params(), drives, &actuator_of, plan, friction, config)
}

/// Reach produced by several whole muscles, each recruited for its own
/// duration with all of its units driven together.
pub fn simulate_muscles(
    muscles: &[MuscleSpec],
    plan: &ReachPlan,
    friction: &FrictionSpec,
    config: &ReachConfig,
) -> Result<FrontierPoint> {
    let params = muscles
        .first()
        .map(|m| *m.params())
        .ok_or_else(|| Error::invalid("muscles", "need at least one muscle"))?;
    if muscles.iter().any(|m| *m.params() != params) {
        return Err(Error::invalid("muscles", "all muscles must share activation constants"));
    }
    let mut drives = Vec::new();
    let mut actuator_of = Vec::new();
    for (i, m) in muscles.iter().enumerate() {
        for u in m.units() {
            drives.push(u.drive);
            actuator_of.push(i);
        }
    }
    simulate(params, drives, &actuator_of, plan, friction, config)
}

/// Every assignment of grid durations to `actuators` actuators, the first
/// actuator varying slowest.
pub fn enumerate_plans(grid: &[f64], actuators: usize) -> Vec<ReachPlan> {
    let mut plans = vec![Vec::with_capacity(actuators)];
    for _ in 0..actuators {
        plans = plans
            .into_iter()
            .flat_map(|prefix| {
                grid.iter().map(move |&d| {
                    let mut p = prefix.clone();
                    p.push(d);
                    p
                })
            })
            .collect();
    }
    plans.into_iter().map(ReachPlan::new).collect()
}

/// All achievable (distance, stop time) pairs of a motor-unit muscle over
/// the duration grid, in plan order.
pub fn frontier(
    muscle: &MuscleSpec,
    grid: &[f64],
    friction: &FrictionSpec,
    config: &ReachConfig,
) -> Result<Vec<FrontierPoint>> {
    enumerate_plans(grid, muscle.len())
        .par_iter()
        .map(|plan| simulate_reach_with(muscle, plan, friction, config))
        .collect()
}

/// [`frontier`] with whole muscles as the independently timed actuators.
pub fn two_muscle_frontier(
    muscles: &[MuscleSpec],
    grid: &[f64],
    friction: &FrictionSpec,
    config: &ReachConfig,
) -> Result<Vec<FrontierPoint>> {
    enumerate_plans(grid, muscles.len())
        .par_iter()
        .map(|plan| simulate_muscles(muscles, plan, friction, config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatPoint {
    pub distance: f64,
    pub width: f64,
    /// `W / D`.
    pub ratio: f64,
    pub min_time: Option<f64>,
}

/// Fastest frontier point landing within `W/2` of `D`.
pub fn min_reach_time(points: &[FrontierPoint], distance: f64, width: f64) -> Option<f64> {
    points
        .iter()
        .filter(|p| (p.distance - distance).abs() <= width / 2.0)
        .filter_map(|p| p.stop_time)
        .min_by(f64::total_cmp)
}

/// Speed-accuracy curve over the cross product of target distances and widths.
pub fn sat_curve(points: &[FrontierPoint], distances: &[f64], widths: &[f64]) -> Vec<SatPoint> {
    distances
        .iter()
        .flat_map(|&d| {
            widths.iter().map(move |&w| SatPoint {
                distance: d,
                width: w,
                ratio: w / d,
                min_time: min_reach_time(points, d, w),
            })
        })
        .collect()
}

pub fn max_distance(points: &[FrontierPoint]) -> f64 {
    points.iter().map(|p| p.distance).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_durations_do_not_move() {
        let p = simulate_reach(
            &diverse_muscle(),
            &ReachPlan::new(vec![0.0, 0.0]),
            &FrictionSpec::default(),
        )
        .unwrap();
        assert_eq!(p.distance, 0.0);
        assert_eq!(p.stop_time, None);
    }

    #[test]
    fn weak_unit_alone_cannot_break_static_friction() {
        // Index 0 is the 0.15 unit after sorting.
        for d in duration_grid() {
            let p = simulate_reach(
                &diverse_muscle(),
                &ReachPlan::new(vec![d, 0.0]),
                &FrictionSpec::default(),
            )
            .unwrap();
            assert_eq!(p.distance, 0.0);
            assert!(!p.moved());
        }
    }

    #[test]
    fn uniform_single_unit_cannot_move_either() {
        let p = simulate_reach(
            &uniform_muscle(),
            &ReachPlan::new(vec![14.75, 0.0]),
            &FrictionSpec::default(),
        )
        .unwrap();
        assert!(!p.moved());
    }

    #[test]
    fn strong_unit_moves_forward() {
        let p = simulate_reach(
            &diverse_muscle(),
            &ReachPlan::new(vec![0.0, 2.75]),
            &FrictionSpec::default(),
        )
        .unwrap();
        assert!(p.distance > 0.0);
        assert!(p.stop_time.unwrap() > 2.75);
    }

    #[test]
    fn plan_enumeration_counts() {
        let g = duration_grid();
        assert_eq!(g.len(), 29);
        assert_eq!(g[28], 14.75);
        assert_eq!(enumerate_plans(&g, 1).len(), 29);
        let two = enumerate_plans(&g, 2);
        assert_eq!(two.len(), 841);
        assert_eq!(two[1].durations, vec![0.75, 1.25]);
        assert_eq!(two.iter().filter(|p| p.is_diagonal()).count(), 29);
    }

    #[test]
    fn plan_shape_is_checked() {
        let r = simulate_reach(&diverse_muscle(), &ReachPlan::new(vec![1.0]), &FrictionSpec::default());
        assert!(r.is_err());
        assert!(FrictionSpec::new(0.5, 0.6).is_err());
    }

    #[test]
    fn sat_curve_filters_by_band() {
        let pts = vec![
            FrontierPoint {
                distance: 1.0,
                stop_time: Some(3.0),
                plan: ReachPlan::new(vec![]),
            },
            FrontierPoint {
                distance: 2.0,
                stop_time: Some(2.0),
                plan: ReachPlan::new(vec![]),
            },
        ];
        let c = sat_curve(&pts, &[1.0, 5.0], &[0.5, 10.0]);
        assert_eq!(c[0].min_time, Some(3.0));
        assert_eq!(c[1].min_time, Some(2.0));
        assert_eq!(c[2].min_time, None);
        assert_eq!(c[3].min_time, Some(2.0));
    }
}
