use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::condition::{Condition, SpeedSet, Variant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Display delay 0, 1/8, ..., 5/8 s.
    Delay,
    /// Quantizer rate 1..=6 bits per interval.
    Quantization,
    /// Rate `R` with delay `(R - 1)/8`.
    Combined,
    /// Slow, fast and both speeds over D ∈ {4, 8, 12, 16}, W = D/4.
    #[serde(rename = "diversity-1")]
    DiversitySpeeds,
    /// Slow and two-level speeds at D = 12, W ∈ {1, 2, 3, 4}.
    #[serde(rename = "diversity-2")]
    DiversityWidths,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Delay,
        Family::Quantization,
        Family::Combined,
        Family::DiversitySpeeds,
        Family::DiversityWidths,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Delay => "delay",
            Family::Quantization => "quantization",
            Family::Combined => "combined",
            Family::DiversitySpeeds => "diversity-1",
            Family::DiversityWidths => "diversity-2",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleSettings {
    pub trials_per_condition: u32,
    /// `(D, W)` pairs for the delay, quantization and combined families.
    pub geometries: Vec<(f64, f64)>,
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        Self {
            trials_per_condition: 50,
            geometries: vec![(4.0, 1.0)],
        }
    }
}

/// Conditions of a family, in presentation order before shuffling.
pub fn condition_schedule(family: Family, settings: &ScheduleSettings) -> Result<Vec<Condition>> {
    let n = settings.trials_per_condition;
    if n == 0 {
        return Err(Error::invalid("trials_per_condition", "must be >= 1"));
    }
    let mut out = Vec::new();
    let mut per_geometry = |variants: Vec<Variant>| -> Result<()> {
        if settings.geometries.is_empty() {
            return Err(Error::invalid("geometries", "need at least one (D, W)"));
        }
        for v in variants {
            for &(d, w) in &settings.geometries {
                out.push(Condition::new(v, d, w, n)?);
            }
        }
        Ok(())
    };
    match family {
        Family::Delay => per_geometry((0..=5).map(|k| Variant::AddedDelay { delay: k as f64 / 8.0 }).collect())?,
        Family::Quantization => per_geometry((1..=6).map(|r| Variant::AddedQuantization { rate_bits: r }).collect())?,
        Family::Combined => per_geometry((1..=6).map(|r| Variant::Combined { rate_bits: r }).collect())?,
        Family::DiversitySpeeds => {
            for set in [SpeedSet::Slow, SpeedSet::Fast, SpeedSet::Both] {
                for d in [4.0, 8.0, 12.0, 16.0] {
                    out.push(Condition::new(Variant::SpeedSet { set }, d, d / 4.0, n)?);
                }
            }
        }
        Family::DiversityWidths => {
            for set in [SpeedSet::Slow, SpeedSet::TwoLevel] {
                for w in [1.0, 2.0, 3.0, 4.0] {
                    out.push(Condition::new(Variant::SpeedSet { set }, 12.0, w, n)?);
                }
            }
        }
    }
    Ok(out)
}

/// One scheduled trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trial: u64,
    pub condition: Condition,
    /// Target position, `±D`.
    pub target: f64,
}

/// Expand conditions into trials with seeded target sides, optionally in
/// shuffled order. Same seed, same list.
pub fn expand_trials(conditions: &[Condition], seed: u64, shuffle: bool) -> Result<Vec<TrialPlan>> {
    if conditions.is_empty() {
        return Err(Error::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plans: Vec<(Condition, f64)> = Vec::new();
    for c in conditions {
        c.validate()?;
        for _ in 0..c.trials {
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            plans.push((*c, side * c.distance));
        }
    }
    if shuffle {
        plans.shuffle(&mut rng);
    }
    Ok(plans
        .into_iter()
        .enumerate()
        .map(|(i, (condition, target))| TrialPlan {
            trial: i as u64,
            condition,
            target,
        })
        .collect())
}
