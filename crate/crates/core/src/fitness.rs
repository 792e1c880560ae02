//! Per-step shaped reward.

use serde::{Deserialize, Serialize};

use crate::config::{config_keys, ConfigError};
use crate::world::snake::invalid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub progress_gain: f64,
    /// Largest per-step regression that is still penalised, metres.
    pub regression_cap: f64,
    pub corridor_penalty: f64,
    pub corridor_min: f64,
    pub corridor_max: f64,
    pub collision_penalty: f64,
    pub living_bonus: f64,
    pub goal_bonus: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            progress_gain: 20.0,
            regression_cap: 0.05,
            corridor_penalty: 3.0,
            corridor_min: -0.5,
            corridor_max: 3.5,
            collision_penalty: 20.0,
            living_bonus: 0.05,
            goal_bonus: 2000.0,
        }
    }
}

config_keys!(FitnessConfig {
    progress_gain,
    regression_cap,
    corridor_penalty,
    corridor_min,
    corridor_max,
    collision_penalty,
    living_bonus,
    goal_bonus,
});

impl FitnessConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("progress_gain", self.progress_gain),
            ("regression_cap", self.regression_cap),
            ("corridor_penalty", self.corridor_penalty),
            ("collision_penalty", self.collision_penalty),
        ] {
            if v < 0.0 {
                return Err(invalid(key, v, "must be non-negative"));
            }
        }
        if self.corridor_min >= self.corridor_max {
            return Err(invalid("corridor_min", self.corridor_min, "must be below corridor_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepFitness {
    pub progress: f64,
    pub corridor: f64,
    pub collision: f64,
    pub living: f64,
}

impl StepFitness {
    pub fn total(&self) -> f64 {
        self.progress + self.corridor + self.collision + self.living
    }
}

/// `prev_dy` and `curr_dy` are goal-axis distances before and after the step.
pub fn step_fitness(
    prev_dy: f64,
    curr_dy: f64,
    head_x: f64,
    collision_started: bool,
    cfg: &FitnessConfig,
) -> StepFitness {
    let delta = prev_dy - curr_dy;
    let outside = (cfg.corridor_min - head_x).max(head_x - cfg.corridor_max).max(0.0);
    StepFitness {
        progress: cfg.progress_gain * delta.max(-cfg.regression_cap),
        corridor: -cfg.corridor_penalty * outside,
        collision: if collision_started { -cfg.collision_penalty } else { 0.0 },
        living: cfg.living_bonus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_steps() {
        let c = FitnessConfig::default();
        assert!((step_fitness(10.0, 9.98, 1.5, false, &c).total() - 0.45).abs() < 1e-9);
        assert!((step_fitness(5.0, 5.0, 3.6, false, &c).corridor + 0.3).abs() < 1e-12);
        assert!((step_fitness(5.0, 5.0, -0.7, false, &c).corridor + 0.6).abs() < 1e-12);
        assert!((step_fitness(5.0, 5.0, 1.0, true, &c).total() + 19.95).abs() < 1e-12);
    }

    #[test]
    fn regression_is_capped() {
        let c = FitnessConfig::default();
        assert_eq!(step_fitness(5.0, 6.0, 1.0, false, &c).progress, -1.0);
    }

    proptest! {
        #[test]
        fn sign_structure(prev in -20.0f64..20.0, curr in -20.0f64..20.0, x in -5.0f64..8.0, hit: bool) {
            let c = FitnessConfig::default();
            let f = step_fitness(prev, curr, x, hit, &c);
            prop_assert!(f.corridor <= 0.0);
            prop_assert!(f.collision <= 0.0);
            prop_assert_eq!(f.living, 0.05);
            prop_assert!(f.progress >= -c.progress_gain * c.regression_cap);
        }
    }
}
