//! TOML configuration. Every section and field is optional; see
//! `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use dess::experiment::EngineConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub fitts_bound: FittsBoundConfig,
    pub sweet_spot: SweetSpotConfig,
    pub muscle_trace: MuscleTraceConfig,
    pub frontier: FrontierConfig,
    pub transport: TransportConfig,
    pub simulate: SimulateConfig,
    pub serve: ServeConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FittsBoundConfig {
    /// Delays 0..=max_delay ticks.
    pub max_delay: u32,
    /// Bits per tick.
    pub rates: Vec<u32>,
    /// Ratios 2D/W = 2^1 .. 2^max_ratio_exponent, with W = 1.
    pub max_ratio_exponent: u32,
}

impl Default for FittsBoundConfig {
    fn default() -> Self {
        Self {
            max_delay: 8,
            rates: (1..=6).collect(),
            max_ratio_exponent: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweetSpotConfig {
    pub lambdas: Vec<f64>,
    pub difficulties: Vec<f64>,
    /// Search grid over the delay T.
    pub grid_step: f64,
    pub grid_max: f64,
    /// Difficulty for the cost sweep under T = (R - 1)/8.
    pub sweep_difficulty: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub rate_points: usize,
}

impl Default for SweetSpotConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![1.0, 4.0, 8.0, 16.0],
            difficulties: (1..=10).map(f64::from).collect(),
            grid_step: 1e-4,
            grid_max: 5.0,
            sweep_difficulty: 3.0,
            rate_min: 1.0,
            rate_max: 16.0,
            rate_points: 1501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuscleTraceConfig {
    pub strengths: Vec<f64>,
    /// Release time per unit, in ascending-strength order.
    pub release: Vec<f64>,
    pub dt: f64,
    pub duration: f64,
    pub sample_every: usize,
}

impl Default for MuscleTraceConfig {
    fn default() -> Self {
        Self {
            strengths: vec![0.15, 0.85],
            release: vec![4.0, 4.0],
            dt: 1e-3,
            duration: 8.0,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierConfig {
    pub uniform: Vec<f64>,
    pub diverse: Vec<f64>,
    pub static_friction: f64,
    pub kinetic_friction: f64,
    pub grid_start: f64,
    pub grid_step: f64,
    pub grid_count: usize,
    pub dt: f64,
    /// Target distances and widths for the speed-accuracy curves.
    pub distances: Vec<f64>,
    pub widths: Vec<f64>,
    /// Also time whole muscles instead of single motor units.
    pub two_muscles: bool,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            uniform: vec![0.5, 0.5],
            diverse: vec![0.85, 0.15],
            static_friction: 0.6,
            kinetic_friction: 0.54,
            grid_start: 0.75,
            grid_step: 0.5,
            grid_count: 29,
            dt: 1e-3,
            distances: (1..=20).map(|k| k as f64 * 2.5).collect(),
            widths: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            two_muscles: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    /// `[speed, resolution]` pairs.
    pub modes: Vec<[f64; 2]>,
    pub distance: f64,
    pub tolerances: Vec<f64>,
    pub switch_loss: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            modes: vec![[2.5, 1.0], [5.0, 1.5]],
            distance: 12.0,
            tolerances: vec![1.0, 2.0, 3.0, 4.0],
            switch_loss: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub family: String,
    pub label: String,
    pub trials_per_condition: u32,
    pub geometries: Vec<(f64, f64)>,
    /// Reaction lag of the velocity-control agent, ticks.
    pub speed_agent_lag: usize,
    pub engine: EngineConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            family: "combined".into(),
            label: "scripted".into(),
            trials_per_condition: 5,
            geometries: vec![(4.0, 1.0)],
            speed_agent_lag: 12,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub addr: String,
    pub root: PathBuf,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            addr: "127.0.0.1:8080".into(),
            root: PathBuf::from("sessions"),
        }
    }
}
