//! Motor-unit activation dynamics and size-ordered recruitment.
//!
//! Each motor unit carries an activation `a ∈ [0, 1)` driven by
//!
//! ```text
//! da/dt = α·f^p·(1 - a) - β·a,        c = a^q
//! ```
//!
//! where `c` is the unit's output force. The drive of a recruited unit is
//! the constant `f = 1 / ((1/F)^(1/q) - 1)`, chosen so the steady-state force
//! equals the unit's strength `F`. Released units have zero drive and their
//! activation decays as `e^(-β·t)` (force as `e^(-q·β·t)`).
//!
//! Strong units have large `f` and therefore settle quickly (`α·f^p + β`);
//! weak units are slow but give fine force resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the activation ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationParams {
    /// `α`
    pub rise_rate: f64,
    /// `β`
    pub decay_rate: f64,
    /// `p`
    pub drive_power: f64,
    /// `q`
    pub force_power: f64,
}

impl Default for ActivationParams {
    fn default() -> Self {
        Self {
            rise_rate: 1.0,
            decay_rate: 1.0,
            drive_power: 1.0,
            force_power: 3.0,
        }
    }
}

impl ActivationParams {
    /// Right-hand side of the activation ODE.
    pub fn derivative(&self, activation: f64, drive: f64) -> f64 {
        self.rise_rate * drive.powf(self.drive_power) * (1.0 - activation) - self.decay_rate * activation
    }

    /// Relaxation rate under constant drive, `α·f^p + β`.
    pub fn relaxation_rate(&self, drive: f64) -> f64 {
        self.rise_rate * drive.powf(self.drive_power) + self.decay_rate
    }

    /// Activation fixed point under constant drive.
    pub fn steady_activation(&self, drive: f64) -> f64 {
        let push = self.rise_rate * drive.powf(self.drive_power);
        push / (push + self.decay_rate)
    }

    /// Drive that makes the steady-state force equal `strength`.
    ///
    /// Reduces to `1 / ((1/F)^(1/q) - 1)` for `α = β = p = 1`.
    pub fn drive_for(&self, strength: f64) -> f64 {
        let a = strength.powf(1.0 / self.force_power);
        (self.decay_rate * a / (self.rise_rate * (1.0 - a))).powf(1.0 / self.drive_power)
    }

    pub fn force(&self, activation: f64) -> f64 {
        activation.powf(self.force_power)
    }

    /// Largest fixed step that keeps the four-stage integrator inside its
    /// stability region for a unit driven at `drive`.
    pub fn max_stable_dt(&self, drive: f64) -> f64 {
        2.5 / self.relaxation_rate(drive)
    }

    fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("rise_rate", self.rise_rate),
            ("decay_rate", self.decay_rate),
            ("drive_power", self.drive_power),
            ("force_power", self.force_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Drive constant for strength `F` with the default constants.
pub fn drive_constant(strength: f64) -> f64 {
    1.0 / ((1.0 / strength).cbrt() - 1.0)
}

/// Rise rate `f + 1` of a unit of strength `F` with the default constants.
pub fn rise_rate_of(strength: f64) -> f64 {
    drive_constant(strength) + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorUnit {
    /// Steady-state strength `F`, in `(0, 1)`.
    pub strength: f64,
    /// Drive applied while recruited.
    pub drive: f64,
    pub activation: f64,
    pub recruited: bool,
}

impl MotorUnit {
    pub fn new(strength: f64, params: &ActivationParams) -> Result<Self> {
        if !(strength > 0.0 && strength < 1.0) {
            return Err(Error::invalid(
                "strength",
                format!("must lie in (0, 1), got {strength}"),
            ));
        }
        Ok(Self {
            strength,
            drive: params.drive_for(strength),
            activation: 0.0,
            recruited: false,
        })
    }

    pub fn force(&self, params: &ActivationParams) -> f64 {
        params.force(self.activation)
    }

    pub fn current_drive(&self) -> f64 {
        if self.recruited {
            self.drive
        } else {
            0.0
        }
    }
}

/// One classical Runge-Kutta step of the activation ODE under constant drive.
pub fn rk4_activation(activation: f64, drive: f64, dt: f64, params: &ActivationParams) -> f64 {
    let k1 = params.derivative(activation, drive);
    let k2 = params.derivative(activation + 0.5 * dt * k1, drive);
    let k3 = params.derivative(activation + 0.5 * dt * k2, drive);
    let k4 = params.derivative(activation + dt * k3, drive);
    activation + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Advance one unit by `dt` under an explicit drive.
pub fn integrate_activation(unit: &MotorUnit, dt: f64, drive: f64, params: &ActivationParams) -> Result<MotorUnit> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    if !(drive.is_finite() && drive >= 0.0) {
        return Err(Error::invalid("drive", "must be finite and >= 0"));
    }
    Ok(MotorUnit {
        activation: rk4_activation(unit.activation, drive, dt, params),
        ..*unit
    })
}

/// A muscle: motor units sorted by ascending strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleSpec {
    units: Vec<MotorUnit>,
    params: ActivationParams,
}

impl MuscleSpec {
    pub fn new(strengths: &[f64]) -> Result<Self> {
        Self::with_params(strengths, ActivationParams::default())
    }

    pub fn with_params(strengths: &[f64], params: ActivationParams) -> Result<Self> {
        params.validate()?;
        if strengths.is_empty() {
            return Err(Error::invalid("strengths", "need at least one motor unit"));
        }
        let mut units = strengths
            .iter()
            .map(|&s| MotorUnit::new(s, &params))
            .collect::<Result<Vec<_>>>()?;
        units.sort_by(|a, b| a.strength.total_cmp(&b.strength));
        Ok(Self { units, params })
    }

    pub fn units(&self) -> &[MotorUnit] {
        &self.units
    }

    pub fn params(&self) -> &ActivationParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Maximum strength `ℓ = Σ F_i`.
    pub fn max_strength(&self) -> f64 {
        self.units.iter().map(|u| u.strength).sum()
    }

    pub fn total_force(&self) -> f64 {
        self.units.iter().map(|u| u.force(&self.params)).sum()
    }

    pub fn forces(&self) -> impl Iterator<Item = f64> + '_ {
        self.units.iter().map(|u| u.force(&self.params))
    }

    /// Steady force levels reachable by recruiting the `n` weakest units.
    pub fn strength_levels(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut levels = vec![0.0];
        for u in &self.units {
            acc += u.strength;
            levels.push(acc);
        }
        levels
    }

    /// Drive the `n` weakest units and release the rest.
    pub fn recruit_in_place(&mut self, n: usize) -> Result<()> {
        if n > self.units.len() {
            return Err(Error::invalid(
                "n",
                format!("cannot recruit {n} of {} units", self.units.len()),
            ));
        }
        for (i, u) in self.units.iter_mut().enumerate() {
            u.recruited = i < n;
        }
        Ok(())
    }

    /// Set each unit's recruitment explicitly (index order = ascending strength).
    pub fn set_recruited(&mut self, mask: &[bool]) {
        for (u, &on) in self.units.iter_mut().zip(mask) {
            u.recruited = on;
        }
    }

    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        let params = self.params;
        for u in &mut self.units {
            u.activation = rk4_activation(u.activation, u.current_drive(), dt, &params);
        }
        Ok(())
    }
}

/// Functional form of [`MuscleSpec::recruit_in_place`].
pub fn recruit(spec: &MuscleSpec, n: usize) -> Result<MuscleSpec> {
    let mut next = spec.clone();
    next.recruit_in_place(n)?;
    Ok(next)
}

/// Sample of a force trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub time: f64,
    pub forces: Vec<f64>,
    pub total: f64,
}

/// Recruit every unit at `t = 0` and release unit `i` at `release[i]`
/// (index order = ascending strength). Samples every `sample_every` steps.
pub fn force_trace(
    spec: &MuscleSpec,
    release: &[f64],
    dt: f64,
    duration: f64,
    sample_every: usize,
) -> Result<Vec<ForceSample>> {
    if release.len() != spec.len() {
        return Err(Error::invalid("release", "need one release time per unit"));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("duration", "must be finite and >= 0"));
    }
    let sample_every = sample_every.max(1);
    let mut muscle = spec.clone();
    let steps = (duration / dt).round() as usize;
    let release_steps: Vec<usize> = release.iter().map(|&t| (t / dt).round().max(0.0) as usize).collect();
    let mut out = Vec::with_capacity(steps / sample_every + 1);
    for k in 0..=steps {
        let mask: Vec<bool> = release_steps.iter().map(|&r| k < r).collect();
        muscle.set_recruited(&mask);
        if k % sample_every == 0 {
            let forces: Vec<f64> = muscle.forces().collect();
            let total = forces.iter().sum();
            out.push(ForceSample {
                time: k as f64 * dt,
                forces,
                total,
            });
        }
        if k < steps {
            muscle.advance(dt)?;
        }
    }
    Ok(out)
}
