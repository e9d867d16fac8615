use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::condition::{Condition, ControlMode, EngineConfig, QuantizerScale};
use crate::channel::{DelayLine, QuantizerState};
use crate::error::{Error, Result};

/// What the screen shows at one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplayFrame {
    /// Tick whose state is shown, `None` while the display delay is filling.
    pub shows_tick: Option<u64>,
    pub cursor: f64,
    /// Gray zone: the target band, or the quantizer's uncertainty interval
    /// when the target is hidden.
    pub zone: Option<(f64, f64)>,
}

impl DisplayFrame {
    pub const BLANK: DisplayFrame = DisplayFrame {
        shows_tick: None,
        cursor: 0.0,
        zone: None,
    };

    pub fn zone_center(&self) -> Option<f64> {
        self.zone.map(|(lo, hi)| 0.5 * (lo + hi))
    }

    pub fn zone_width(&self) -> Option<f64> {
        self.zone.map(|(lo, hi)| hi - lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickSample {
    pub tick: u64,
    pub angle: f64,
    pub cursor: f64,
    /// `cursor - target`.
    pub error: f64,
    pub shown: DisplayFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TrialOutcome {
    /// Error entered the band at `tick` and stayed for the hold window.
    Reached { tick: u64, time: f64 },
    /// Timed out before holding.
    Censored { ticks: u64 },
    /// Input stream broke at `tick`.
    Invalid { tick: u64 },
}

/// Per-trial result kept in logs and used by the analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub condition: Condition,
    pub label: String,
    pub difficulty: f64,
    pub target: f64,
    pub interval: f64,
    pub ticks: u64,
    pub outcome: TrialOutcome,
}

impl TrialSummary {
    /// Raw reaching time in seconds.
    pub fn reach_time(&self) -> Option<f64> {
        match self.outcome {
            TrialOutcome::Reached { time, .. } => Some(time),
            _ => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self.outcome, TrialOutcome::Censored { .. })
    }

    pub fn is_valid(&self) -> bool {
        !matches!(self.outcome, TrialOutcome::Invalid { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub summary: TrialSummary,
    pub samples: Vec<TickSample>,
    /// Seconds each tick started late; all zero under a virtual clock.
    pub jitter: Vec<f64>,
}

impl TrialRecord {
    pub fn angles(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.angle).collect()
    }
}

/// One trial, advanced a tick at a time.
///
/// At tick `t` the plant holds cursor `p(t)`. The frame for `t` enters the
/// display delay line, the delayed frame is what the subject sees, the
/// subject's angle for `t` sets `p(t + 1)`.
#[derive(Debug, Clone)]
pub struct TrialLoop {
    trial: u64,
    condition: Condition,
    target: f64,
    control: ControlMode,
    quantizer: Option<QuantizerState>,
    refine_every: u64,
    line: DelayLine<DisplayFrame>,
    shown: DisplayFrame,
    tick: u64,
    cursor: f64,
    band_since: Option<u64>,
    hold_ticks: u64,
    max_ticks: u64,
    samples: Vec<TickSample>,
    outcome: Option<TrialOutcome>,
}

impl TrialLoop {
    pub fn new(trial: u64, condition: &Condition, target: f64, config: &EngineConfig) -> Result<Self> {
        condition.validate()?;
        config.validate()?;
        if !target.is_finite() {
            return Err(Error::invalid("target", "must be finite"));
        }
        let quantizer = match condition.rate_bits() {
            Some(bits) => {
                let half = match config.quantizer_scale {
                    QuantizerScale::TaskRange => condition.distance,
                    QuantizerScale::Screen => 0.5 * config.screen_width,
                };
                let q = QuantizerState::symmetric(half, bits)?;
                if !q.contains(target) {
                    return Err(Error::TargetOutsideInterval {
                        target,
                        lo: q.lo,
                        hi: q.hi,
                    });
                }
                Some(q)
            }
            None => None,
        };
        let interval = condition.interval();
        let mut this = Self {
            trial,
            condition: *condition,
            target,
            control: condition.control(config.position_gain),
            quantizer,
            refine_every: condition.ticks_per_refinement().max(1),
            line: DelayLine::new(condition.display_delay_ticks() as usize, DisplayFrame::BLANK),
            shown: DisplayFrame::BLANK,
            tick: 0,
            cursor: 0.0,
            band_since: None,
            hold_ticks: ((config.hold_window / interval).round() as u64).max(1),
            max_ticks: ((config.max_duration / interval).round() as u64).max(1),
            samples: Vec::new(),
            outcome: None,
        };
        this.shown = this.line.push(this.source_frame());
        Ok(this)
    }

    fn source_frame(&self) -> DisplayFrame {
        let zone = match &self.quantizer {
            Some(q) => (q.lo, q.hi),
            None => {
                let h = 0.5 * self.condition.width;
                (self.target - h, self.target + h)
            }
        };
        DisplayFrame {
            shows_tick: Some(self.tick),
            cursor: self.cursor,
            zone: Some(zone),
        }
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    pub fn condition(&self) -> &Condition {
        &self.condition
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    pub fn cursor(&self) -> f64 {
        self.cursor
    }

    /// Frame visible at the current tick.
    pub fn display(&self) -> &DisplayFrame {
        &self.shown
    }

    pub fn outcome(&self) -> Option<TrialOutcome> {
        self.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Apply this tick's angle. Returns the outcome once the trial ends.
    pub fn tick(&mut self, angle: f64) -> Option<TrialOutcome> {
        if self.outcome.is_some() {
            return self.outcome;
        }
        let t = self.tick;
        let error = self.cursor - self.target;
        self.samples.push(TickSample {
            tick: t,
            angle,
            cursor: self.cursor,
            error,
            shown: self.shown,
        });

        if error.abs() <= 0.5 * self.condition.width {
            let since = *self.band_since.get_or_insert(t);
            if t + 1 - since >= self.hold_ticks {
                self.outcome = Some(TrialOutcome::Reached {
                    tick: since,
                    time: since as f64 * self.condition.interval(),
                });
                return self.outcome;
            }
        } else {
            self.band_since = None;
        }
        if t + 1 >= self.max_ticks {
            self.outcome = Some(TrialOutcome::Censored { ticks: t + 1 });
            return self.outcome;
        }

        self.cursor = match &self.control {
            ControlMode::Position { gain } => gain * angle,
            ControlMode::Velocity(map) => self.cursor + map.speed(angle) * self.condition.interval(),
        };
        self.tick += 1;
        if let Some(q) = &mut self.quantizer {
            if self.tick.is_multiple_of(self.refine_every) {
                q.refine(self.target).expect("target stays inside the interval");
            }
        }
        self.shown = self.line.push(self.source_frame());
        None
    }

    /// Mark the trial invalid because input for the current tick is missing.
    pub fn invalidate(&mut self) -> TrialOutcome {
        let o = TrialOutcome::Invalid { tick: self.tick };
        self.outcome = Some(o);
        o
    }

    pub fn summary(&self) -> TrialSummary {
        TrialSummary {
            trial: self.trial,
            condition: self.condition,
            label: self.condition.label(),
            difficulty: self.condition.difficulty(),
            target: self.target,
            interval: self.condition.interval(),
            ticks: self.samples.len() as u64,
            outcome: self.outcome.unwrap_or(TrialOutcome::Invalid { tick: self.tick }),
        }
    }

    pub fn into_record(self, jitter: Vec<f64>) -> TrialRecord {
        TrialRecord {
            summary: self.summary(),
            samples: self.samples,
            jitter,
        }
    }
}

/// Source of wheel angles, one per tick.
pub trait InputSource {
    /// Called before the first tick of each trial.
    fn begin(&mut self, _condition: &Condition, _config: &EngineConfig) {}

    /// Angle in degrees for `tick`, given the frame on screen. `None` means
    /// the stream has no sample for this tick.
    fn angle(&mut self, tick: u64, frame: &DisplayFrame) -> Option<f64>;
}

/// Paces ticks.
pub trait Clock {
    /// Block until `tick` is due; returns how late it started, in seconds.
    fn wait_for(&mut self, tick: u64, interval: f64) -> f64;
}

/// Runs as fast as possible with exact tick times.
#[derive(Debug, Default, Clone, Copy)]
pub struct VirtualClock;

impl Clock for VirtualClock {
    fn wait_for(&mut self, _tick: u64, _interval: f64) -> f64 {
        0.0
    }
}

/// Wall-clock pacing from the first tick.
#[derive(Debug, Default, Clone)]
pub struct RealtimeClock {
    start: Option<Instant>,
}

impl Clock for RealtimeClock {
    fn wait_for(&mut self, tick: u64, interval: f64) -> f64 {
        let start = *self.start.get_or_insert_with(Instant::now);
        let due = start + Duration::from_secs_f64(tick as f64 * interval);
        let now = Instant::now();
        if now < due {
            std::thread::sleep(due - now);
            0.0
        } else {
            (now - due).as_secs_f64()
        }
    }
}

/// Run one trial to completion.
pub fn run_trial(
    trial: u64,
    condition: &Condition,
    target: f64,
    config: &EngineConfig,
    input: &mut dyn InputSource,
    clock: &mut dyn Clock,
) -> Result<TrialRecord> {
    let mut lp = TrialLoop::new(trial, condition, target, config)?;
    input.begin(condition, config);
    let interval = condition.interval();
    let mut jitter = Vec::new();
    loop {
        let t = lp.current_tick();
        jitter.push(clock.wait_for(t, interval));
        match input.angle(t, lp.display()) {
            Some(a) if a.is_finite() => {
                if lp.tick(a).is_some() {
                    break;
                }
            }
            _ => {
                lp.invalidate();
                break;
            }
        }
    }
    Ok(lp.into_record(jitter))
}
