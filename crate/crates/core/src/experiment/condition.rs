use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle band around center in which a wheel produces no motion.
pub const DEAD_ZONE_DEG: f64 = 5.0;

/// Seconds between ticks in the speed-diversity conditions.
pub const SPEED_INTERVAL: f64 = 0.01;

/// Seconds between ticks in the delay and quantization conditions. Divides
/// both the 1/8 s delay grid and the quantizer interval.
pub const CHANNEL_INTERVAL: f64 = 0.025;

/// Seconds between quantizer refinements.
pub const QUANTIZER_INTERVAL: f64 = 0.35;

/// Piecewise-constant map from wheel angle (degrees) to cursor speed
/// (screen units per second).
///
/// Bins are right-closed: `(-inf, t0], (t0, t1], ..., (t_last, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedMap {
    thresholds: Vec<f64>,
    speeds: Vec<f64>,
}

impl SpeedMap {
    pub fn new(thresholds: Vec<f64>, speeds: Vec<f64>) -> Result<Self> {
        if speeds.len() != thresholds.len() + 1 {
            return Err(Error::invalid("speeds", "need one more speed than thresholds"));
        }
        if thresholds.iter().chain(&speeds).any(|v| !v.is_finite()) {
            return Err(Error::invalid("speed map", "values must be finite"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("thresholds", "must be strictly increasing"));
        }
        Ok(Self { thresholds, speeds })
    }

    /// Symmetric map: `magnitudes` in increasing order, the first one used
    /// just outside the dead zone, switching at `switch_angles`.
    fn symmetric(magnitudes: &[f64], switch_angles: &[f64]) -> Self {
        let mut thresholds: Vec<f64> = switch_angles.iter().rev().map(|a| -a).collect();
        thresholds.push(-DEAD_ZONE_DEG);
        thresholds.push(DEAD_ZONE_DEG);
        thresholds.extend(switch_angles);
        let mut speeds: Vec<f64> = magnitudes.iter().rev().map(|v| -v).collect();
        speeds.push(0.0);
        speeds.extend(magnitudes);
        Self::new(thresholds, speeds).expect("preset maps are well formed")
    }

    /// Single slow speed, ±2.5.
    pub fn slow() -> Self {
        Self::symmetric(&[2.5], &[])
    }

    /// Single fast speed, ±10.
    pub fn fast() -> Self {
        Self::symmetric(&[10.0], &[])
    }

    /// Slow within ±30°, fast beyond.
    pub fn both() -> Self {
        Self::symmetric(&[2.5, 10.0], &[30.0])
    }

    /// ±2.5 within ±30°, ±5 beyond.
    pub fn two_level() -> Self {
        Self::symmetric(&[2.5, 5.0], &[30.0])
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn speed(&self, angle: f64) -> f64 {
        self.speeds[self.thresholds.partition_point(|&t| t < angle)]
    }

    /// An angle strictly inside bin `bin`.
    pub fn representative_angle(&self, bin: usize) -> f64 {
        let n = self.thresholds.len();
        match (bin, n) {
            (_, 0) => 0.0,
            (0, _) => self.thresholds[0] - 15.0,
            (b, n) if b == n => self.thresholds[n - 1] + 15.0,
            (b, _) => 0.5 * (self.thresholds[b - 1] + self.thresholds[b]),
        }
    }

    /// Angle producing exactly `speed`, if any bin does.
    pub fn angle_for(&self, speed: f64) -> Option<f64> {
        self.speeds
            .iter()
            .position(|&s| s == speed)
            .map(|b| self.representative_angle(b))
    }

    /// Nonzero speed magnitudes available in the direction of `sign`,
    /// ascending.
    pub fn magnitudes_toward(&self, sign: f64) -> Vec<f64> {
        let mut m: Vec<f64> = self
            .speeds
            .iter()
            .filter(|&&s| s != 0.0 && s.signum() == sign.signum())
            .map(|s| s.abs())
            .collect();
        m.sort_by(f64::total_cmp);
        m.dedup();
        m
    }

    pub fn is_odd_symmetric(&self) -> bool {
        let n = self.thresholds.len();
        (0..n).all(|i| self.thresholds[i] == -self.thresholds[n - 1 - i])
            && (0..=n).all(|i| self.speeds[i] == -self.speeds[n - i])
    }
}

/// Speed conditions of the diversity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedSet {
    Slow,
    Fast,
    Both,
    TwoLevel,
}

impl SpeedSet {
    pub fn map(&self) -> SpeedMap {
        match self {
            SpeedSet::Slow => SpeedMap::slow(),
            SpeedSet::Fast => SpeedMap::fast(),
            SpeedSet::Both => SpeedMap::both(),
            SpeedSet::TwoLevel => SpeedMap::two_level(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpeedSet::Slow => "slow",
            SpeedSet::Fast => "fast",
            SpeedSet::Both => "both",
            SpeedSet::TwoLevel => "two-level",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    /// Display delayed by `delay` seconds.
    AddedDelay {
        delay: f64,
    },
    /// Target shown only through a quantizer of `rate_bits` bits per interval.
    AddedQuantization {
        rate_bits: u32,
    },
    /// Quantizer of `rate_bits` plus a display delay of `(R - 1) / 8` seconds.
    Combined {
        rate_bits: u32,
    },
    SpeedSet {
        set: SpeedSet,
    },
}

/// How the wheel angle moves the cursor.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlMode {
    /// Cursor position is `gain · angle`.
    Position { gain: f64 },
    /// Cursor moves at the mapped speed.
    Velocity(SpeedMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub variant: Variant,
    /// Target distance `D`.
    pub distance: f64,
    /// Target width `W`.
    pub width: f64,
    pub trials: u32,
}

impl Condition {
    pub fn new(variant: Variant, distance: f64, width: f64, trials: u32) -> Result<Self> {
        let c = Self {
            variant,
            distance,
            width,
            trials,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::invalid("distance", "must be finite and > 0"));
        }
        if !(self.width.is_finite() && self.width > 0.0 && self.width <= 2.0 * self.distance) {
            return Err(Error::invalid("width", "must satisfy 0 < W <= 2D"));
        }
        match self.variant {
            Variant::AddedDelay { delay } => {
                let eighths = delay * 8.0;
                if !(0.0..=5.0).contains(&eighths) || eighths.fract() != 0.0 {
                    return Err(Error::invalid("delay", "must be one of 0, 1/8, ..., 5/8 s"));
                }
            }
            Variant::AddedQuantization { rate_bits } | Variant::Combined { rate_bits } => {
                if !(1..=6).contains(&rate_bits) {
                    return Err(Error::invalid("rate_bits", "must be one of 1..=6"));
                }
            }
            Variant::SpeedSet { .. } => {}
        }
        Ok(())
    }

    /// Index of difficulty `log2(2D/W)`.
    pub fn difficulty(&self) -> f64 {
        (2.0 * self.distance / self.width).log2()
    }

    /// Seconds per tick.
    pub fn interval(&self) -> f64 {
        match self.variant {
            Variant::SpeedSet { .. } => SPEED_INTERVAL,
            _ => CHANNEL_INTERVAL,
        }
    }

    /// Added display delay in seconds.
    pub fn display_delay(&self) -> f64 {
        match self.variant {
            Variant::AddedDelay { delay } => delay,
            Variant::Combined { rate_bits } => (rate_bits as f64 - 1.0) / 8.0,
            _ => 0.0,
        }
    }

    pub fn display_delay_ticks(&self) -> u64 {
        (self.display_delay() / self.interval()).round() as u64
    }

    pub fn rate_bits(&self) -> Option<u32> {
        match self.variant {
            Variant::AddedQuantization { rate_bits } | Variant::Combined { rate_bits } => Some(rate_bits),
            _ => None,
        }
    }

    pub fn ticks_per_refinement(&self) -> u64 {
        (QUANTIZER_INTERVAL / self.interval()).round() as u64
    }

    /// No added delay and no quantizer.
    pub fn is_baseline(&self) -> bool {
        matches!(self.variant, Variant::AddedDelay { delay } if delay == 0.0)
    }

    pub fn target_hidden(&self) -> bool {
        self.rate_bits().is_some()
    }

    pub fn control(&self, position_gain: f64) -> ControlMode {
        match self.variant {
            Variant::SpeedSet { set } => ControlMode::Velocity(set.map()),
            _ => ControlMode::Position { gain: position_gain },
        }
    }

    /// Short label naming the variant and its level.
    pub fn label(&self) -> String {
        match self.variant {
            Variant::AddedDelay { delay } => format!("delay={delay}"),
            Variant::AddedQuantization { rate_bits } => format!("quantization={rate_bits}"),
            Variant::Combined { rate_bits } => format!("combined={rate_bits}"),
            Variant::SpeedSet { set } => format!("speed={}", set.name()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} D={} W={}", self.label(), self.distance, self.width)
    }
}

/// Where the quantizer's full-scale range comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizerScale {
    /// `[-D, D]`, the range the target is drawn from.
    TaskRange,
    /// The whole screen, centered on the start position.
    Screen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Seconds the error must stay in the band to end a trial.
    pub hold_window: f64,
    /// Seconds before an unfinished trial is censored.
    pub max_duration: f64,
    /// Screen units per degree in position-controlled conditions.
    pub position_gain: f64,
    pub quantizer_scale: QuantizerScale,
    /// Screen width in screen units.
    pub screen_width: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            hold_window: 0.5,
            max_duration: 30.0,
            position_gain: 8.0,
            quantizer_scale: QuantizerScale::TaskRange,
            screen_width: 1000.0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("hold_window", self.hold_window),
            ("max_duration", self.max_duration),
            ("position_gain", self.position_gain),
            ("screen_width", self.screen_width),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}
