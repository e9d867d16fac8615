//! Discrete-time error dynamics of the reaching loop.
//!
//! The loop tracks a single signed error `x(t)`: the distance between the
//! cursor (or hand) and the center of the target. Each sampling interval the
//! error is advanced by the disturbance and the control action,
//!
//! ```text
//! x(t + 1) = x(t) + w(t) + u(t)
//! ```
//!
//! A reaching task injects a one-shot disturbance `w(t) = d·δ(t)` whose
//! magnitude is bounded by the task's maximum distance `D`. The task is
//! solved once the error enters the band `|x| ≤ W/2` and never leaves it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Error sample at a given tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorState {
    pub tick: u64,
    pub x: f64,
}

impl ErrorState {
    pub fn new(tick: u64, x: f64) -> Self {
        Self { tick, x }
    }
}

/// Advance the error by one sampling interval.
pub fn step(state: ErrorState, w: f64, u: f64) -> ErrorState {
    ErrorState {
        tick: state.tick + 1,
        x: state.x + w + u,
    }
}

/// A one-dimensional reaching task.
///
/// `max_distance` is `D`, `width` is `W` and `disturbance` is the actual
/// displacement `d` for this instance. The index of difficulty
/// `log2(2D/W)` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachTask {
    max_distance: f64,
    width: f64,
    disturbance: f64,
}

impl ReachTask {
    pub fn new(max_distance: f64, width: f64, disturbance: f64) -> Result<Self> {
        if !(max_distance.is_finite() && max_distance > 0.0) {
            return Err(Error::invalid("max_distance", "must be finite and > 0"));
        }
        if !(width.is_finite() && width > 0.0 && width <= 2.0 * max_distance) {
            return Err(Error::invalid("width", "must satisfy 0 < W <= 2D"));
        }
        if !(disturbance.is_finite() && disturbance.abs() <= max_distance) {
            return Err(Error::invalid("disturbance", "must satisfy |d| <= D"));
        }
        Ok(Self {
            max_distance,
            width,
            disturbance,
        })
    }

    /// Task whose disturbance sits at the far edge `d = D`.
    pub fn at_edge(max_distance: f64, width: f64) -> Result<Self> {
        Self::new(max_distance, width, max_distance)
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn disturbance(&self) -> f64 {
        self.disturbance
    }

    pub fn half_width(&self) -> f64 {
        self.width / 2.0
    }

    /// Index of difficulty in bits, `log2(2D/W)`.
    pub fn difficulty(&self) -> f64 {
        (2.0 * self.max_distance / self.width).log2()
    }

    /// Target interval `[d - W/2, d + W/2]`.
    pub fn target_interval(&self) -> (f64, f64) {
        (
            self.disturbance - self.half_width(),
            self.disturbance + self.half_width(),
        )
    }

    pub fn with_disturbance(&self, disturbance: f64) -> Result<Self> {
        Self::new(self.max_distance, self.width, disturbance)
    }
}

/// Ordered error samples with consecutive ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    task: ReachTask,
    /// Seconds per tick.
    interval: f64,
    states: Vec<ErrorState>,
}

impl Trajectory {
    pub fn new(task: ReachTask, interval: f64) -> Self {
        Self {
            task,
            interval,
            states: Vec::new(),
        }
    }

    /// Build from raw error values, assigning ticks `0, 1, 2, ...`.
    pub fn from_errors(task: ReachTask, interval: f64, xs: &[f64]) -> Self {
        let states = xs
            .iter()
            .enumerate()
            .map(|(t, &x)| ErrorState::new(t as u64, x))
            .collect();
        Self { task, interval, states }
    }

    /// Append a state. Its tick must follow the last recorded tick.
    pub fn push(&mut self, state: ErrorState) -> Result<()> {
        if let Some(last) = self.states.last() {
            if state.tick != last.tick + 1 {
                return Err(Error::invalid(
                    "tick",
                    format!("expected {}, got {}", last.tick + 1, state.tick),
                ));
            }
        }
        self.states.push(state);
        Ok(())
    }

    pub fn task(&self) -> &ReachTask {
        &self.task
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn states(&self) -> &[ErrorState] {
        &self.states
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.x)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&ErrorState> {
        self.states.last()
    }
}

/// Index of the first sample after which every sample satisfies
/// `|x| <= half_width`. `None` if the final sample is outside the band.
pub fn settle_index<I>(errors: I, half_width: f64) -> Option<usize>
where
    I: IntoIterator<Item = f64>,
{
    let mut start = None;
    for (i, x) in errors.into_iter().enumerate() {
        if x.abs() <= half_width {
            start.get_or_insert(i);
        } else {
            start = None;
        }
    }
    start
}

/// Reach-and-stay time in ticks, evaluated over the recorded horizon.
pub fn reaching_time(traj: &Trajectory, task: &ReachTask) -> Option<u64> {
    settle_index(traj.errors(), task.half_width()).map(|i| traj.states[i].tick)
}
