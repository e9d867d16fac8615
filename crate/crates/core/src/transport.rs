//! Travel with modes of different speed and landing resolution.
//!
//! A mode with resolution `e` can end a leg anywhere within `e` of its
//! intended waypoint, so it alone meets a tolerance `E` only when `e <= E`.
//! Combining a fast coarse mode with slower finer ones lets the trip scale
//! with the fastest mode while the final leg supplies the accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportMode {
    pub speed: f64,
    pub resolution: f64,
}

impl TransportMode {
    pub fn new(speed: f64, resolution: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::invalid("speed", "must be finite and > 0"));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid("resolution", "must be finite and > 0"));
        }
        Ok(Self { speed, resolution })
    }

    pub fn meets(&self, tolerance: f64) -> bool {
        self.resolution <= tolerance
    }
}

/// Time to cover `distance` with a single mode, `None` if the mode cannot
/// land within `tolerance`.
pub fn uniform_time(mode: &TransportMode, distance: f64, tolerance: f64) -> Option<f64> {
    mode.meets(tolerance).then(|| distance / mode.speed)
}

/// Best single-mode time over a set of modes.
pub fn best_uniform_time(modes: &[TransportMode], distance: f64, tolerance: f64) -> Option<f64> {
    modes
        .iter()
        .filter_map(|m| uniform_time(m, distance, tolerance))
        .min_by(f64::total_cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub mode: TransportMode,
    /// Leg length when every previous leg landed exactly.
    pub nominal: f64,
    /// Leg length when every previous leg landed as far off as allowed.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelPlan {
    pub legs: Vec<Leg>,
    pub switches: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Coarse-to-fine plan: the fastest mode covers the distance, then each
/// finer mode in turn removes the previous leg's landing error, stopping at
/// the first mode that meets `tolerance`. Modes that are both slower and no
/// finer than a faster one are skipped.
pub fn plan_diverse(modes: &[TransportMode], distance: f64, tolerance: f64, switch_loss: f64) -> Result<TravelPlan> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::invalid("distance", "must be finite and > 0"));
    }
    if !(switch_loss.is_finite() && switch_loss >= 0.0) {
        return Err(Error::invalid("switch_loss", "must be finite and >= 0"));
    }
    let mut sorted = modes.to_vec();
    sorted.sort_by(|a, b| b.speed.total_cmp(&a.speed).then(a.resolution.total_cmp(&b.resolution)));
    let mut chain: Vec<TransportMode> = Vec::new();
    for m in sorted {
        if chain.last().is_some_and(|prev| m.resolution >= prev.resolution) {
            continue;
        }
        let done = m.meets(tolerance);
        chain.push(m);
        if done {
            break;
        }
    }
    if !chain.last().is_some_and(|m| m.meets(tolerance)) {
        return Err(Error::Infeasible(tolerance));
    }

    let mut legs = Vec::with_capacity(chain.len());
    let (mut lower, mut upper) = (0.0, 0.0);
    for (i, m) in chain.iter().enumerate() {
        let (nominal, worst) = if i == 0 {
            (distance, distance)
        } else {
            (0.0, chain[i - 1].resolution.min(distance))
        };
        lower += nominal / m.speed;
        upper += worst / m.speed;
        legs.push(Leg {
            mode: *m,
            nominal,
            worst,
        });
    }
    let switches = legs.len() - 1;
    let loss = switches as f64 * switch_loss;
    Ok(TravelPlan {
        legs,
        switches,
        lower: lower + loss,
        upper: upper + loss,
    })
}

/// Lower and upper bound on the combined-mode travel time.
pub fn diverse_time(modes: &[TransportMode], distance: f64, tolerance: f64, switch_loss: f64) -> Result<(f64, f64)> {
    plan_diverse(modes, distance, tolerance, switch_loss).map(|p| (p.lower, p.upper))
}

/// Walking-speed mode of the two-mode example: speed 2.5, resolution 1.
pub fn slow_mode() -> TransportMode {
    TransportMode {
        speed: 2.5,
        resolution: 1.0,
    }
}

/// Driving-speed mode of the two-mode example: speed 5, resolution 1.5.
pub fn fast_mode() -> TransportMode {
    TransportMode {
        speed: 5.0,
        resolution: 1.5,
    }
}
