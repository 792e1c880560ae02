//! Flat `key = value` run configuration.
//!
//! Keys mirror the reference NEAT configuration names exactly; the task
//! section (gait, physics, fitness shaping, arena) lives in the same flat key
//! space. Unknown keys are rejected so typos never silently fall back to a
//! default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Activation, Aggregation};

pub const ENV_PREFIX: &str = "SNAKE_NEAT_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config key `{0}` given twice")]
    Duplicate(String),
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
}

/// A scalar that can appear on the right-hand side of a config line.
pub trait ConfigValue: Sized {
    fn parse_value(text: &str) -> Result<Self, String>;
    fn format_value(&self) -> String;
}

impl ConfigValue for f64 {
    fn parse_value(text: &str) -> Result<Self, String> {
        let v: f64 = text.parse().map_err(|e| format!("{e}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err("value must be finite".into())
        }
    }
    fn format_value(&self) -> String {
        // Debug formatting always round-trips and keeps a decimal point.
        format!("{self:?}")
    }
}

impl ConfigValue for usize {
    fn parse_value(text: &str) -> Result<Self, String> {
        text.parse().map_err(|e| format!("{e}"))
    }
    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for bool {
    fn parse_value(text: &str) -> Result<Self, String> {
        match text {
            "True" | "true" | "1" | "yes" => Ok(true),
            "False" | "false" | "0" | "no" => Ok(false),
            _ => Err("expected True or False".into()),
        }
    }
    fn format_value(&self) -> String {
        if *self { "True" } else { "False" }.to_string()
    }
}

impl ConfigValue for String {
    fn parse_value(text: &str) -> Result<Self, String> {
        Ok(text.to_string())
    }
    fn format_value(&self) -> String {
        self.clone()
    }
}

impl ConfigValue for Vec<Activation> {
    fn parse_value(text: &str) -> Result<Self, String> {
        let v = text
            .split_whitespace()
            .map(Activation::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("at least one activation required".into());
        }
        Ok(v)
    }
    fn format_value(&self) -> String {
        self.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl ConfigValue for Vec<Aggregation> {
    fn parse_value(text: &str) -> Result<Self, String> {
        let v = text
            .split_whitespace()
            .map(Aggregation::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("at least one aggregation required".into());
        }
        Ok(v)
    }
    fn format_value(&self) -> String {
        self.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
    }
}

macro_rules! enum_config_value {
    ($($t:ty),*) => {$(
        impl $crate::config::ConfigValue for $t {
            fn parse_value(text: &str) -> Result<Self, String> {
                <$t as std::str::FromStr>::from_str(text)
            }
            fn format_value(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

enum_config_value!(Activation, Aggregation, FitnessCriterion, InitialConnection);
pub(crate) use enum_config_value;

/// Implements keyed get/set over a struct's fields.
macro_rules! config_keys {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Sets `key`; returns `Ok(false)` when the key does not belong here.
            pub fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
                match key {
                    $(stringify!($field) => {
                        self.$field = $crate::config::ConfigValue::parse_value(value).map_err(|reason| {
                            ConfigError::InvalidValue {
                                key: key.to_string(),
                                value: value.to_string(),
                                reason,
                            }
                        })?;
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            }

            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($field), $crate::config::ConfigValue::format_value(&self.$field))),*]
            }
        }
    };
}
pub(crate) use config_keys;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitnessCriterion {
    Max,
    Min,
    Mean,
}

impl FromStr for FitnessCriterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max" => Ok(Self::Max),
            "min" => Ok(Self::Min),
            "mean" => Ok(Self::Mean),
            _ => Err(format!("unknown fitness criterion `{s}`")),
        }
    }
}

impl fmt::Display for FitnessCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Max => "max",
            Self::Min => "min",
            Self::Mean => "mean",
        })
    }
}

impl FitnessCriterion {
    pub fn reduce(self, values: &[f64]) -> f64 {
        match self {
            Self::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Self::Mean => values.iter().sum::<f64>() / values.len().max(1) as f64,
        }
    }
}

/// Initial wiring of a fresh genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialConnection {
    /// Input→hidden, hidden→output and input→output.
    FullDirect,
    /// Input→hidden and hidden→output only (input→output when there are no hidden nodes).
    FullNoDirect,
    Unconnected,
}

impl FromStr for InitialConnection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full_direct" => Ok(Self::FullDirect),
            "full_nodirect" | "full" => Ok(Self::FullNoDirect),
            "unconnected" => Ok(Self::Unconnected),
            _ => Err(format!("unknown initial_connection `{s}`")),
        }
    }
}

impl fmt::Display for InitialConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullDirect => "full_direct",
            Self::FullNoDirect => "full_nodirect",
            Self::Unconnected => "unconnected",
        })
    }
}

/// NEAT hyper-parameters. Defaults are the snake-task values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeatConfig {
    pub fitness_criterion: FitnessCriterion,
    pub fitness_threshold: f64,
    pub no_fitness_termination: bool,
    pub pop_size: usize,
    pub reset_on_extinction: bool,

    pub activation_default: Activation,
    pub activation_mutate_rate: f64,
    pub activation_options: Vec<Activation>,
    pub aggregation_default: Aggregation,
    pub aggregation_mutate_rate: f64,
    pub aggregation_options: Vec<Aggregation>,

    pub bias_init_mean: f64,
    pub bias_init_stdev: f64,
    pub bias_max_value: f64,
    pub bias_min_value: f64,
    pub bias_mutate_power: f64,
    pub bias_mutate_rate: f64,
    pub bias_replace_rate: f64,

    pub compatibility_disjoint_coefficient: f64,
    pub compatibility_weight_coefficient: f64,

    pub conn_add_prob: f64,
    pub conn_delete_prob: f64,
    pub enabled_default: bool,
    pub enabled_mutate_rate: f64,
    pub feed_forward: bool,
    pub initial_connection: InitialConnection,
    pub node_add_prob: f64,
    pub node_delete_prob: f64,
    pub num_hidden: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,

    pub response_init_mean: f64,
    pub response_init_stdev: f64,
    pub response_max_value: f64,
    pub response_min_value: f64,
    pub response_mutate_power: f64,
    pub response_mutate_rate: f64,
    pub response_replace_rate: f64,

    pub weight_init_mean: f64,
    pub weight_init_stdev: f64,
    pub weight_max_value: f64,
    pub weight_min_value: f64,
    pub weight_mutate_power: f64,
    pub weight_mutate_rate: f64,
    pub weight_replace_rate: f64,

    pub compatibility_threshold: f64,
    pub species_fitness_func: FitnessCriterion,
    pub max_stagnation: usize,
    pub species_elitism: usize,
    pub elitism: usize,
    pub survival_threshold: f64,
}

config_keys!(NeatConfig {
    fitness_criterion,
    fitness_threshold,
    no_fitness_termination,
    pop_size,
    reset_on_extinction,
    activation_default,
    activation_mutate_rate,
    activation_options,
    aggregation_default,
    aggregation_mutate_rate,
    aggregation_options,
    bias_init_mean,
    bias_init_stdev,
    bias_max_value,
    bias_min_value,
    bias_mutate_power,
    bias_mutate_rate,
    bias_replace_rate,
    compatibility_disjoint_coefficient,
    compatibility_weight_coefficient,
    conn_add_prob,
    conn_delete_prob,
    enabled_default,
    enabled_mutate_rate,
    feed_forward,
    initial_connection,
    node_add_prob,
    node_delete_prob,
    num_hidden,
    num_inputs,
    num_outputs,
    response_init_mean,
    response_init_stdev,
    response_max_value,
    response_min_value,
    response_mutate_power,
    response_mutate_rate,
    response_replace_rate,
    weight_init_mean,
    weight_init_stdev,
    weight_max_value,
    weight_min_value,
    weight_mutate_power,
    weight_mutate_rate,
    weight_replace_rate,
    compatibility_threshold,
    species_fitness_func,
    max_stagnation,
    species_elitism,
    elitism,
    survival_threshold,
});

impl Default for NeatConfig {
    fn default() -> Self {
        Self {
            fitness_criterion: FitnessCriterion::Max,
            fitness_threshold: 1000.0,
            no_fitness_termination: false,
            pop_size: 100,
            reset_on_extinction: true,
            activation_default: Activation::Identity,
            activation_mutate_rate: 0.01,
            activation_options: vec![Activation::Identity],
            aggregation_default: Aggregation::Sum,
            aggregation_mutate_rate: 0.01,
            aggregation_options: vec![Aggregation::Sum],
            bias_init_mean: 0.0,
            bias_init_stdev: 2.0,
            bias_max_value: 30.0,
            bias_min_value: -30.0,
            bias_mutate_power: 1.5,
            bias_mutate_rate: 0.7,
            bias_replace_rate: 0.1,
            compatibility_disjoint_coefficient: 1.0,
            compatibility_weight_coefficient: 0.5,
            conn_add_prob: 0.6,
            conn_delete_prob: 0.3,
            enabled_default: true,
            enabled_mutate_rate: 0.01,
            feed_forward: true,
            initial_connection: InitialConnection::FullDirect,
            node_add_prob: 0.5,
            node_delete_prob: 0.2,
            num_hidden: 40,
            num_inputs: 120,
            num_outputs: 2,
            response_init_mean: 0.0,
            response_init_stdev: 2.0,
            response_max_value: 30.0,
            response_min_value: -30.0,
            response_mutate_power: 0.0,
            response_mutate_rate: 0.0,
            response_replace_rate: 0.0,
            weight_init_mean: 0.0,
            weight_init_stdev: 2.0,
            weight_max_value: 30.0,
            weight_min_value: -30.0,
            weight_mutate_power: 3.0,
            weight_mutate_rate: 0.8,
            weight_replace_rate: 0.3,
            compatibility_threshold: 4.0,
            species_fitness_func: FitnessCriterion::Max,
            max_stagnation: 20,
            species_elitism: 2,
            elitism: 2,
            survival_threshold: 0.3,
        }
    }
}

impl NeatConfig {
    /// The classic two-input XOR setup: minimal topology, steep sigmoid units.
    pub fn xor() -> Self {
        Self {
            fitness_threshold: 3.9,
            pop_size: 150,
            activation_default: Activation::Sigmoid,
            activation_mutate_rate: 0.0,
            activation_options: vec![Activation::Sigmoid],
            aggregation_mutate_rate: 0.0,
            bias_init_stdev: 1.0,
            bias_mutate_power: 0.5,
            bias_mutate_rate: 0.7,
            bias_replace_rate: 0.1,
            conn_add_prob: 0.5,
            conn_delete_prob: 0.5,
            node_add_prob: 0.2,
            node_delete_prob: 0.2,
            num_hidden: 0,
            num_inputs: 2,
            num_outputs: 1,
            response_init_mean: 1.0,
            response_init_stdev: 0.0,
            weight_init_stdev: 1.0,
            weight_mutate_power: 0.5,
            weight_mutate_rate: 0.8,
            weight_replace_rate: 0.1,
            // XOR genomes stay under 20 genes, where the distance counts
            // disjoint and excess genes unnormalised.
            compatibility_threshold: 8.0,
            survival_threshold: 0.2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, reason: &str| ConfigError::InvalidValue {
            key: key.into(),
            value,
            reason: reason.into(),
        };
        if self.pop_size == 0 {
            return Err(bad("pop_size", "0".into(), "population must be non-empty"));
        }
        if self.num_outputs == 0 {
            return Err(bad("num_outputs", "0".into(), "at least one output required"));
        }
        if !self.feed_forward {
            return Err(bad("feed_forward", "False".into(), "only feed-forward networks are supported"));
        }
        if !(0.0..=1.0).contains(&self.survival_threshold) || self.survival_threshold == 0.0 {
            return Err(bad(
                "survival_threshold",
                self.survival_threshold.format_value(),
                "must lie in (0, 1]",
            ));
        }
        for (key, lo, hi) in [
            ("weight", self.weight_min_value, self.weight_max_value),
            ("bias", self.bias_min_value, self.bias_max_value),
            ("response", self.response_min_value, self.response_max_value),
        ] {
            if lo > hi {
                return Err(bad(
                    &format!("{key}_min_value"),
                    lo.format_value(),
                    "min exceeds max",
                ));
            }
        }
        Ok(())
    }
}

/// Parsed `key = value` pairs in file order, comments and section headers dropped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim().to_string();
        if out.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::Duplicate(key));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Everything a training run needs: NEAT parameters and the snake task.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub neat: NeatConfig,
    pub task: crate::episode::TaskConfig,
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if self.neat.set(key, value)? || self.task.set(key, value)? {
            Ok(())
        } else {
            Err(ConfigError::UnknownKey(key.to_string()))
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (key, value) in parse_pairs(text)? {
            cfg.set(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.neat.validate()?;
        self.task.validate()
    }

    /// Applies `SNAKE_NEAT_<KEY>` overrides from `vars`; returns the keys touched.
    pub fn apply_overrides<I>(&mut self, vars: I) -> Result<Vec<String>, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut touched = Vec::new();
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = rest.to_ascii_lowercase();
            self.set(&key, value.trim())?;
            touched.push(key);
        }
        touched.sort();
        self.validate()?;
        Ok(touched)
    }

    pub fn apply_env_overrides(&mut self) -> Result<Vec<String>, ConfigError> {
        self.apply_overrides(std::env::vars())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = self.neat.entries();
        e.extend(self.task.entries());
        e
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}
