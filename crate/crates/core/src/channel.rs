//! Delay lines, rate-limited quantized feedback and the bisection controller
//! that meets the reaching-time lower bound `T + F/R`.
//!
//! All delays are counted in ticks (sampling intervals). [`ChannelSpec`]
//! carries the interval length so results can be converted to seconds.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dynamics::{reaching_time, ErrorState, ReachTask, Trajectory};
use crate::error::{Error, Result};

/// Delay and rate budget of a feedback loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Signaling delay in ticks.
    pub signaling_delay: u32,
    /// Internal delay in ticks.
    pub internal_delay: u32,
    /// Bits per sampling interval.
    pub rate: f64,
    /// Seconds per tick.
    pub interval: f64,
}

impl ChannelSpec {
    pub fn new(signaling_delay: u32, internal_delay: u32, rate: f64, interval: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid("rate", "must be finite and > 0"));
        }
        if !(interval.is_finite() && interval > 0.0) {
            return Err(Error::invalid("interval", "must be finite and > 0"));
        }
        Ok(Self {
            signaling_delay,
            internal_delay,
            rate,
            interval,
        })
    }

    /// Channel with the whole delay attributed to signaling, unit interval.
    pub fn ticks(total_delay: u32, rate: f64) -> Result<Self> {
        Self::new(total_delay, 0, rate, 1.0)
    }

    /// Total loop delay `T = T_s + T_i` in ticks.
    pub fn total_delay(&self) -> u32 {
        self.signaling_delay + self.internal_delay
    }

    /// Rate as a whole number of bits, if it is one.
    pub fn integral_rate(&self) -> Option<u32> {
        (self.rate.fract() == 0.0 && self.rate >= 1.0 && self.rate <= u32::MAX as f64).then_some(self.rate as u32)
    }
}

/// Fixed-length FIFO: the value pushed at tick `t` comes out at `t + delay`.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    queue: VecDeque<T>,
}

impl<T: Clone> DelayLine<T> {
    /// The first `delay` outputs are `fill`.
    pub fn new(delay: usize, fill: T) -> Self {
        let mut queue = VecDeque::with_capacity(delay + 1);
        queue.extend(std::iter::repeat_n(fill, delay));
        Self { queue }
    }

    pub fn delay(&self) -> usize {
        self.queue.len()
    }

    /// Push this tick's input and return the delayed output.
    pub fn push(&mut self, value: T) -> T {
        self.queue.push_back(value);
        self.queue.pop_front().expect("queue holds at least the pushed value")
    }
}

/// Uncertainty interval of a quantizer that forwards `rate_bits` bits per
/// interval about a static target.
///
/// After `n` refinements the interval has width `full_scale · 2^(-n·R)` and
/// always contains the target. Cells are half-open `[lo, lo + w)` except the
/// last one, which is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerState {
    pub steps: u32,
    pub lo: f64,
    pub hi: f64,
    pub full_scale: f64,
    pub rate_bits: u32,
    origin: f64,
}

impl QuantizerState {
    pub fn new(lo: f64, hi: f64, rate_bits: u32) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("interval", "need finite lo < hi"));
        }
        if rate_bits == 0 {
            return Err(Error::invalid("rate_bits", "must be >= 1"));
        }
        Ok(Self {
            steps: 0,
            lo,
            hi,
            full_scale: hi - lo,
            rate_bits,
            origin: lo,
        })
    }

    /// Quantizer over the symmetric range `[-half_range, half_range]`.
    pub fn symmetric(half_range: f64, rate_bits: u32) -> Result<Self> {
        Self::new(-half_range, half_range, rate_bits)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, target: f64) -> bool {
        self.lo <= target && target <= self.hi
    }

    /// Width the interval will have after `steps` refinements.
    pub fn width_after(&self, steps: u32) -> f64 {
        self.full_scale * (-(steps as f64) * self.rate_bits as f64).exp2()
    }

    /// Narrow the interval to the cell that contains `target`.
    pub fn refine(&mut self, target: f64) -> Result<()> {
        if !self.contains(target) {
            return Err(Error::TargetOutsideInterval {
                target,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let cells = (self.rate_bits as f64).exp2();
        let w = self.width_after(self.steps + 1);
        let last = cells - 1.0;
        let mut idx = ((target - self.lo) / w).floor().clamp(0.0, last);
        // Rounding in `lo + idx * w` can put the cell edge on the wrong side.
        if target < self.lo + idx * w && idx > 0.0 {
            idx -= 1.0;
        } else if idx < last && target >= self.lo + (idx + 1.0) * w {
            idx += 1.0;
        }
        let lo = self.lo + idx * w;
        let hi = if idx == last { self.hi } else { lo + w };
        self.lo = lo;
        self.hi = hi;
        self.steps += 1;
        Ok(())
    }

    /// Back to the full-scale interval.
    pub fn reset(&mut self) {
        self.steps = 0;
        self.lo = self.origin;
        self.hi = self.origin + self.full_scale;
    }
}

/// Functional form of [`QuantizerState::refine`].
pub fn quantize_step(q: &QuantizerState, target: f64) -> Result<QuantizerState> {
    let mut next = *q;
    next.refine(target)?;
    Ok(next)
}

/// Lower bound on the worst-case reaching time, `delay + difficulty / rate`.
pub fn fitts_bound(difficulty: f64, delay: f64, rate: f64) -> f64 {
    delay + difficulty / rate
}

/// [`fitts_bound`] for a task and channel, in ticks.
pub fn bound(task: &ReachTask, chan: &ChannelSpec) -> f64 {
    fitts_bound(task.difficulty(), chan.total_delay() as f64, chan.rate)
}

/// [`bound`] converted to seconds.
pub fn bound_seconds(task: &ReachTask, chan: &ChannelSpec) -> f64 {
    bound(task, chan) * chan.interval
}

/// Number of `rate_bits`-bit refinements before the cell width of the range
/// `[-D, D]` drops to `W` or below, i.e. `ceil(F / R)` computed without
/// floating-point logarithms.
pub fn refinements_needed(max_distance: f64, width: f64, rate_bits: u32) -> u32 {
    let mut k = 0;
    let mut cell = 2.0 * max_distance;
    let shrink = (-(rate_bits as f64)).exp2();
    while cell > width {
        cell *= shrink;
        k += 1;
    }
    k
}

/// Closed-loop trajectory of the bisection controller.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub trajectory: Trajectory,
    /// First tick at which a control action can land (`T`).
    pub loop_closes_at: u64,
}

impl OracleRun {
    /// Reach-and-stay time in ticks. A reach is never credited before the
    /// loop has closed.
    pub fn reach_ticks(&self) -> Option<u64> {
        reaching_time(&self.trajectory, self.trajectory.task()).map(|t| t.max(self.loop_closes_at))
    }
}

/// Simulate the bisection controller.
///
/// The sensor forwards `R` bits per tick about the disturbance; the
/// actuator, `T` ticks later, puts the cursor at the center of the current
/// uncertainty interval. The error after `k` delivered refinements is
/// `d - center_k`, so the worst case over `d` settles at `T + ceil(F/R)`.
pub fn oracle_controller(task: &ReachTask, chan: &ChannelSpec) -> Result<OracleRun> {
    let rate_bits = chan
        .integral_rate()
        .ok_or_else(|| Error::invalid("rate", "the bisection controller needs whole bits per tick"))?;
    let delay = chan.total_delay() as u64;
    let needed = refinements_needed(task.max_distance(), task.width(), rate_bits) as u64;
    let horizon = delay + needed + 2;

    let d = task.disturbance();
    let mut quantizer = QuantizerState::symmetric(task.max_distance(), rate_bits)?;
    let mut trajectory = Trajectory::new(*task, chan.interval);
    for t in 0..=horizon {
        let delivered = t.saturating_sub(delay);
        while (quantizer.steps as u64) < delivered {
            quantizer.refine(d)?;
        }
        trajectory.push(ErrorState::new(t, d - quantizer.center()))?;
    }
    Ok(OracleRun {
        trajectory,
        loop_closes_at: delay,
    })
}

/// Worst case of [`OracleRun::reach_ticks`] over every dyadic target
/// `d = -D + j·W/2` in `[-D, D]`.
pub fn worst_case_reach(max_distance: f64, width: f64, chan: &ChannelSpec) -> Result<Option<u64>> {
    let base = ReachTask::at_edge(max_distance, width)?;
    let half = width / 2.0;
    let count = (2.0 * max_distance / half).round() as u64;
    let mut worst = Some(0);
    for j in 0..=count {
        let d = (-max_distance + j as f64 * half).min(max_distance);
        let run = oracle_controller(&base.with_disturbance(d)?, chan)?;
        worst = match (worst, run.reach_ticks()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_line_shifts_by_delay() {
        let mut line = DelayLine::new(3, 0);
        let out: Vec<i32> = (1..=6).map(|v| line.push(v)).collect();
        assert_eq!(out, vec![0, 0, 0, 1, 2, 3]);
        let mut passthrough = DelayLine::new(0, 0);
        assert_eq!(passthrough.push(9), 9);
    }

    #[test]
    fn quantizer_width_after_three_steps() {
        let mut q = QuantizerState::new(-500.0, 500.0, 2).unwrap();
        for _ in 0..3 {
            q.refine(123.4).unwrap();
        }
        assert_eq!(q.width(), 15.625);
        assert!(q.contains(123.4));
    }

    #[test]
    fn quantizer_hand_bisection() {
        let mut q = QuantizerState::new(0.0, 8.0, 1).unwrap();
        let mut seen = Vec::new();
        for _ in 0..4 {
            q.refine(3.2).unwrap();
            seen.push((q.lo, q.hi));
        }
        assert_eq!(seen, vec![(0.0, 4.0), (2.0, 4.0), (3.0, 4.0), (3.0, 3.5)]);
    }

    #[test]
    fn quantizer_high_rate_collapses() {
        let mut q = QuantizerState::new(-500.0, 500.0, 50).unwrap();
        q.refine(17.3).unwrap();
        assert!(q.width() < 1e-11);
        assert!(q.contains(17.3));
        assert!((q.center() - 17.3).abs() < 1e-11);
    }

    #[test]
    fn quantizer_boundaries() {
        // Interior edge goes to the upper cell; the top edge stays in the last cell.
        let q = QuantizerState::new(0.0, 8.0, 1).unwrap();
        let mid = quantize_step(&q, 4.0).unwrap();
        assert_eq!((mid.lo, mid.hi), (4.0, 8.0));
        let top = quantize_step(&q, 8.0).unwrap();
        assert_eq!((top.lo, top.hi), (4.0, 8.0));
        let bottom = quantize_step(&q, 0.0).unwrap();
        assert_eq!((bottom.lo, bottom.hi), (0.0, 4.0));
    }

    #[test]
    fn quantizer_rejects_outside_target() {
        let q = QuantizerState::new(0.0, 8.0, 1).unwrap();
        let q = quantize_step(&q, 1.0).unwrap();
        assert!(matches!(
            quantize_step(&q, 5.0),
            Err(Error::TargetOutsideInterval { .. })
        ));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(fitts_bound(3.0, 0.375, 4.0), 1.125);
        let task = ReachTask::at_edge(8.0, 1.0).unwrap();
        let chan = ChannelSpec::ticks(1, 2.0).unwrap();
        assert_eq!(bound(&task, &chan), 3.0);
        let task = ReachTask::at_edge(0.5, 1.0).unwrap();
        assert_eq!(bound(&task, &ChannelSpec::ticks(0, 1.0).unwrap()), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let worst = |d, w, t, r| worst_case_reach(d, w, &ChannelSpec::ticks(t, r).unwrap()).unwrap();
        assert_eq!(worst(4.0, 1.0, 2, 1.0), Some(5));
        assert_eq!(worst(4.0, 1.0, 0, 3.0), Some(1));
        assert_eq!(worst(2.0, 4.0, 4, 1.0), Some(4));
    }

    #[test]
    fn oracle_needs_whole_bits() {
        let task = ReachTask::at_edge(4.0, 1.0).unwrap();
        assert!(oracle_controller(&task, &ChannelSpec::ticks(0, 1.5).unwrap()).is_err());
    }

    #[test]
    fn refinements_match_ceiling() {
        assert_eq!(refinements_needed(4.0, 1.0, 1), 3);
        assert_eq!(refinements_needed(4.0, 1.0, 2), 2);
        assert_eq!(refinements_needed(512.0, 1.0, 6), 2);
        assert_eq!(refinements_needed(1.0, 2.0, 3), 0);
    }
}
