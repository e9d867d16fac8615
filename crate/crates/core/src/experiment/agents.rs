//! Scripted subjects for exercising the engine without people.

use super::condition::{Condition, ControlMode, EngineConfig, SpeedMap};
use super::trial::{DisplayFrame, InputSource};
use crate::channel::DelayLine;

/// Puts the cursor on the center of the gray zone it sees.
///
/// With the target visible this moves straight onto it. Under quantization
/// the zone is the uncertainty interval, so this is the bisection strategy.
/// Only meaningful under position control.
#[derive(Debug, Clone)]
pub struct ZoneCenterAgent {
    lag: usize,
    gain: f64,
    seen: DelayLine<DisplayFrame>,
    last: f64,
}

impl ZoneCenterAgent {
    /// `lag` extra ticks of reaction time on top of the display.
    pub fn new(lag: usize) -> Self {
        Self {
            lag,
            gain: 1.0,
            seen: DelayLine::new(lag, DisplayFrame::BLANK),
            last: 0.0,
        }
    }
}

impl Default for ZoneCenterAgent {
    fn default() -> Self {
        Self::new(0)
    }
}

impl InputSource for ZoneCenterAgent {
    fn begin(&mut self, condition: &Condition, config: &EngineConfig) {
        if let ControlMode::Position { gain } = condition.control(config.position_gain) {
            self.gain = gain;
        }
        self.seen = DelayLine::new(self.lag, DisplayFrame::BLANK);
        self.last = 0.0;
    }

    fn angle(&mut self, _tick: u64, frame: &DisplayFrame) -> Option<f64> {
        let seen = self.seen.push(*frame);
        if let Some(c) = seen.zone_center() {
            self.last = c / self.gain;
        }
        Some(self.last)
    }
}

/// Wheel user under velocity control with a reaction lag.
///
/// Drives at the fastest available speed while the seen error exceeds the
/// distance a fast step covers during the lag plus a quarter of the zone,
/// then at the slowest speed, and stops once within a quarter zone. With a
/// single speed this is a bang-off controller that overshoots by up to
/// `speed · lag`.
#[derive(Debug, Clone)]
pub struct SpeedAgent {
    lag: usize,
    interval: f64,
    map: SpeedMap,
    seen: DelayLine<DisplayFrame>,
}

impl SpeedAgent {
    pub fn new(lag: usize) -> Self {
        Self {
            lag,
            interval: 0.01,
            map: SpeedMap::slow(),
            seen: DelayLine::new(lag, DisplayFrame::BLANK),
        }
    }

    pub fn lag(&self) -> usize {
        self.lag
    }
}

impl Default for SpeedAgent {
    /// 12-tick lag, 0.12 s at the speed-condition tick.
    fn default() -> Self {
        Self::new(12)
    }
}

impl InputSource for SpeedAgent {
    fn begin(&mut self, condition: &Condition, config: &EngineConfig) {
        if let ControlMode::Velocity(map) = condition.control(config.position_gain) {
            self.map = map;
        }
        self.interval = condition.interval();
        self.seen = DelayLine::new(self.lag, DisplayFrame::BLANK);
    }

    fn angle(&mut self, _tick: u64, frame: &DisplayFrame) -> Option<f64> {
        let seen = self.seen.push(*frame);
        let (Some(center), Some(width)) = (seen.zone_center(), seen.zone_width()) else {
            return Some(0.0);
        };
        let error = seen.cursor - center;
        let aim = 0.25 * width;
        if error.abs() <= aim {
            return Some(self.map.angle_for(0.0).unwrap_or(0.0));
        }
        let toward = -error.signum();
        let speeds = self.map.magnitudes_toward(toward);
        let (Some(&slow), Some(&fast)) = (speeds.first(), speeds.last()) else {
            return Some(0.0);
        };
        let switch = fast * self.interval * self.lag as f64 + aim;
        let speed = if error.abs() > switch { fast } else { slow };
        Some(self.map.angle_for(toward * speed).unwrap_or(0.0))
    }
}

/// Replays a fixed angle series.
#[derive(Debug, Clone)]
pub struct RecordedInput {
    angles: Vec<f64>,
}

impl RecordedInput {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles }
    }
}

impl InputSource for RecordedInput {
    fn angle(&mut self, tick: u64, _frame: &DisplayFrame) -> Option<f64> {
        self.angles.get(tick as usize).copied()
    }
}
