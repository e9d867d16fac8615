//! Nerve signaling tradeoff and the delay/rate cost split.
//!
//! A bundle of `n` axons of mean radius `ρ` filling cross-section `s`
//! propagates with delay `T_s = α/ρ` and fires at `φ = β·ρ` per axon, so the
//! bundle rate is `R = n·φ = λ·T_s` with `λ = s·β / (π·α)`. Thicker axons
//! are faster but fewer fit, which is the whole tradeoff.
//!
//! Given a task of difficulty `F`, the worst-case reaching time
//! `T + F/R` under `R = λ·T` is smallest at `T = √(F/λ)`, `R = √(λ·F)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and physiology of a nerve bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NerveBundleSpec {
    /// Total cross-sectional area.
    pub area: f64,
    /// Mean axon radius.
    pub radius: f64,
    /// Propagation constant: `T_s = alpha_prop / radius`.
    pub alpha_prop: f64,
    /// Firing constant: `φ = beta_fire · radius`.
    pub beta_fire: f64,
}

/// Delay and rate delivered by a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NerveChannel {
    pub signaling_delay: f64,
    pub rate: f64,
}

impl NerveBundleSpec {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("area", self.area),
            ("radius", self.radius),
            ("alpha_prop", self.alpha_prop),
            ("beta_fire", self.beta_fire),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn axon_count(&self) -> f64 {
        self.area / (PI * self.radius * self.radius)
    }

    pub fn firing_rate(&self) -> f64 {
        self.beta_fire * self.radius
    }

    pub fn lambda(&self) -> f64 {
        self.area * self.beta_fire / (PI * self.alpha_prop)
    }

    pub fn signaling_delay(&self) -> f64 {
        self.alpha_prop / self.radius
    }
}

pub fn bundle_to_channel(bundle: &NerveBundleSpec) -> Result<NerveChannel> {
    bundle.validate()?;
    let signaling_delay = bundle.signaling_delay();
    Ok(NerveChannel {
        signaling_delay,
        rate: bundle.lambda() * signaling_delay,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweetSpot {
    pub delay: f64,
    pub rate: f64,
    pub total: f64,
}

/// Minimizer of `T + F/R` subject to `R = λ·T`.
pub fn sweet_spot(difficulty: f64, lambda: f64) -> Result<SweetSpot> {
    if !(difficulty.is_finite() && difficulty >= 0.0) {
        return Err(Error::invalid("difficulty", "must be finite and >= 0"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be finite and > 0"));
    }
    let delay = (difficulty / lambda).sqrt();
    Ok(SweetSpot {
        delay,
        rate: (lambda * difficulty).sqrt(),
        total: 2.0 * delay,
    })
}

/// Brute-force minimizer of `T + F/(λ·T)` over `T = step, 2·step, ..., t_max`.
pub fn grid_sweet_spot(difficulty: f64, lambda: f64, t_max: f64, step: f64) -> Result<SweetSpot> {
    sweet_spot(difficulty, lambda)?;
    if !(step.is_finite() && step > 0.0 && t_max >= step) {
        return Err(Error::invalid("step", "need 0 < step <= t_max"));
    }
    let n = (t_max / step).floor() as usize;
    let (delay, total) = (1..=n)
        .map(|k| {
            let t = k as f64 * step;
            (t, t + difficulty / (lambda * t))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    Ok(SweetSpot {
        delay,
        rate: lambda * delay,
        total,
    })
}

/// A point on a component tradeoff curve: rate `R` achievable with delay `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub rate: f64,
    pub delay: f64,
}

/// Sample a delay-as-function-of-rate constraint on a grid of rates.
pub fn sample_constraint<F>(rates: impl IntoIterator<Item = f64>, delay_of: F) -> Vec<TradeoffPoint>
where
    F: Fn(f64) -> f64,
{
    rates
        .into_iter()
        .map(|rate| TradeoffPoint {
            rate,
            delay: delay_of(rate),
        })
        .collect()
}

/// The linear constraint `T = (R - 1) / 8`.
pub fn linear_constraint(rate: f64) -> f64 {
    (rate - 1.0) / 8.0
}

/// `count` evenly spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + step * i as f64).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub rate: f64,
    pub delay_cost: f64,
    pub rate_cost: f64,
    pub total: f64,
}

/// Delay cost, rate cost and their sum at every sampled constraint point.
pub fn cost_sweep(difficulty: f64, constraint: &[TradeoffPoint]) -> Result<Vec<CostBreakdown>> {
    constraint
        .iter()
        .map(|p| {
            if !(p.rate.is_finite() && p.rate > 0.0) {
                return Err(Error::invalid("rate", format!("must be > 0, got {}", p.rate)));
            }
            let rate_cost = difficulty / p.rate;
            Ok(CostBreakdown {
                rate: p.rate,
                delay_cost: p.delay,
                rate_cost,
                total: p.delay + rate_cost,
            })
        })
        .collect()
}

/// Row of a sweep with the smallest total cost.
pub fn minimum_cost(sweep: &[CostBreakdown]) -> Option<&CostBreakdown> {
    sweep.iter().min_by(|a, b| a.total.total_cmp(&b.total))
}
