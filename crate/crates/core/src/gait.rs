//! Serpenoid gait generator driven by two network outputs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{config_keys, enum_config_value, ConfigError};
use crate::world::snake::invalid;
use crate::world::JOINTS;

pub const OMEGA_MIN: f64 = 0.5;
pub const OMEGA_SPAN: f64 = 2.0;
pub const OUTPUT_SCALE: f64 = 3.0;

/// Which servo receives the steering offset φ₀.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffsetJoint {
    /// Joint 1, next to the head.
    First,
    /// Joint 8, next to the tail.
    Last,
}

/// Direction the body wave travels along the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveDirection {
    /// Joint `i` lags joint `i-1` by δ; propels the snake head first.
    HeadToTail,
    /// Joint `i` leads joint `i-1` by δ; propels the snake tail first.
    TailToHead,
}

impl FromStr for OffsetJoint {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" => Ok(Self::First),
            "last" => Ok(Self::Last),
            _ => Err(format!("expected first or last, got `{s}`")),
        }
    }
}

impl fmt::Display for OffsetJoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::First => "first",
            Self::Last => "last",
        })
    }
}

impl FromStr for WaveDirection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "head_to_tail" => Ok(Self::HeadToTail),
            "tail_to_head" => Ok(Self::TailToHead),
            _ => Err(format!("expected head_to_tail or tail_to_head, got `{s}`")),
        }
    }
}

impl fmt::Display for WaveDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HeadToTail => "head_to_tail",
            Self::TailToHead => "tail_to_head",
        })
    }
}

enum_config_value!(OffsetJoint, WaveDirection);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitConfig {
    pub amplitude: f64,
    pub phase_lag: f64,
    pub offset_joint: OffsetJoint,
    pub wave_direction: WaveDirection,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.6,
            phase_lag: PI / 6.0,
            offset_joint: OffsetJoint::First,
            wave_direction: WaveDirection::HeadToTail,
        }
    }
}

config_keys!(GaitConfig { amplitude, phase_lag, offset_joint, wave_direction });

impl GaitConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.amplitude >= 0.0) {
            return Err(invalid("amplitude", self.amplitude, "must be non-negative"));
        }
        Ok(())
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Network outputs to `(ω, φ₀)`; `None` when either output is not finite.
pub fn map_outputs(o1: f64, o2: f64) -> Option<(f64, f64)> {
    if !(o1.is_finite() && o2.is_finite()) {
        return None;
    }
    Some((
        OMEGA_MIN + OMEGA_SPAN * logistic(o1 / OUTPUT_SCALE),
        (o2 / OUTPUT_SCALE).tanh(),
    ))
}

/// Gait state carried between control steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitParams {
    pub omega: f64,
    pub phi0: f64,
    pub phase: f64,
}

impl GaitParams {
    pub fn new(phase: f64) -> Self {
        Self { omega: 0.0, phi0: 0.0, phase }
    }

    /// Integrates the phase so that a change of ω never jumps the targets.
    pub fn advance(&mut self, omega: f64, phi0: f64, dt: f64) {
        self.omega = omega;
        self.phi0 = phi0;
        self.phase += omega * dt;
    }
}

pub fn clamp_head(command: f64, yaw_limit: f64) -> f64 {
    command.clamp(-yaw_limit, yaw_limit)
}

/// Joint set-points for the current phase; joint 1 is at the head.
pub fn gait_targets(p: &GaitParams, cfg: &GaitConfig, yaw_limit: f64) -> [f64; JOINTS] {
    let sign = match cfg.wave_direction {
        WaveDirection::HeadToTail => -1.0,
        WaveDirection::TailToHead => 1.0,
    };
    let mut t: [f64; JOINTS] =
        std::array::from_fn(|i| cfg.amplitude * (p.phase + sign * i as f64 * cfg.phase_lag).sin());
    let k = match cfg.offset_joint {
        OffsetJoint::First => 0,
        OffsetJoint::Last => JOINTS - 1,
    };
    t[k] += p.phi0;
    t[0] = clamp_head(t[0], yaw_limit);
    t
}
