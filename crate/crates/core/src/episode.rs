//! Closed-loop episodes: sense, act, step, score.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{config_keys, ConfigError};
use crate::evolution::INVALID_FITNESS;
use crate::fitness::{step_fitness, FitnessConfig, StepFitness};
use crate::gait::{gait_targets, map_outputs, GaitConfig, GaitParams};
use crate::genome::Genome;
use crate::network::FeedforwardNetwork;
use crate::world::lidar;
use crate::world::snake::invalid;
use crate::world::{Arena, ArenaError, PhysicsConfig, RobotSpec, World, JOINTS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Preset name or layout file path.
    pub arena: String,
    pub control_dt: f64,
    pub max_steps: usize,
    pub max_collisions: usize,
    pub success_radius_train: f64,
    pub success_radius_eval: f64,
    pub lidar_range: f64,
    /// Wall-clock step used for the normalised routing time, seconds.
    pub normalized_step: f64,
    /// Initial gait phase is drawn from `[0, phase_jitter)` with the episode seed.
    pub phase_jitter: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            arena: "default".into(),
            control_dt: 0.0833,
            max_steps: 20_000,
            max_collisions: 6,
            success_radius_train: 1.5,
            success_radius_eval: 0.5,
            lidar_range: lidar::DEFAULT_MAX_RANGE,
            normalized_step: 0.010,
            phase_jitter: 0.0,
        }
    }
}

config_keys!(EpisodeConfig {
    arena,
    control_dt,
    max_steps,
    max_collisions,
    success_radius_train,
    success_radius_eval,
    lidar_range,
    normalized_step,
    phase_jitter,
});

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("control_dt", self.control_dt),
            ("success_radius_train", self.success_radius_train),
            ("success_radius_eval", self.success_radius_eval),
            ("lidar_range", self.lidar_range),
        ] {
            if !(v > 0.0) {
                return Err(invalid(key, v, "must be positive"));
            }
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", 0, "must be at least 1"));
        }
        if self.phase_jitter < 0.0 {
            return Err(invalid("phase_jitter", self.phase_jitter, "must be non-negative"));
        }
        Ok(())
    }
}

/// Snake task settings; all keys share the flat config namespace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub robot: RobotSpec,
    pub physics: PhysicsConfig,
    pub gait: GaitConfig,
    pub fitness: FitnessConfig,
    pub episode: EpisodeConfig,
}

impl TaskConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        Ok(self.robot.set(key, value)?
            || self.physics.set(key, value)?
            || self.gait.set(key, value)?
            || self.fitness.set(key, value)?
            || self.episode.set(key, value)?)
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = self.robot.entries();
        e.extend(self.physics.entries());
        e.extend(self.gait.entries());
        e.extend(self.fitness.entries());
        e.extend(self.episode.entries());
        e
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate()?;
        self.physics.validate()?;
        self.gait.validate()?;
        self.fitness.validate()?;
        self.episode.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Eval,
}

/// Task config with its arena resolved once.
#[derive(Clone, Debug)]
pub struct Task {
    pub cfg: TaskConfig,
    pub arena: Arena,
}

impl Task {
    pub fn new(cfg: TaskConfig) -> Result<Self, ArenaError> {
        let arena = Arena::load(&cfg.episode.arena)?;
        Ok(Self { cfg, arena })
    }

    pub fn with_arena(cfg: TaskConfig, arena: Arena) -> Self {
        Self { cfg, arena }
    }

    pub fn success_radius(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Train => self.cfg.episode.success_radius_train,
            Mode::Eval => self.cfg.episode.success_radius_eval,
        }
    }

    pub fn initial_phase(&self, seed: u64) -> f64 {
        let j = self.cfg.episode.phase_jitter;
        if j == 0.0 {
            0.0
        } else {
            ChaCha8Rng::seed_from_u64(seed).random::<f64>() * j
        }
    }
}

/// Anything that maps the 120 sensor values to the two gait outputs.
pub trait Controller {
    fn act(&mut self, inputs: &[f64]) -> [f64; 2];
}

/// Fixed raw outputs, independent of the sensors.
#[derive(Clone, Copy, Debug)]
pub struct ConstantController(pub f64, pub f64);

impl Controller for ConstantController {
    fn act(&mut self, _: &[f64]) -> [f64; 2] {
        [self.0, self.1]
    }
}

pub struct NetworkController<'a> {
    net: &'a FeedforwardNetwork,
    scratch: Vec<f64>,
}

impl<'a> NetworkController<'a> {
    pub fn new(net: &'a FeedforwardNetwork) -> Self {
        Self { net, scratch: Vec::new() }
    }
}

impl Controller for NetworkController<'_> {
    fn act(&mut self, inputs: &[f64]) -> [f64; 2] {
        let mut out = [f64::NAN; 2];
        if self.net.num_outputs() != 2
            || self.net.activate_into(inputs, &mut self.scratch, &mut out).is_err()
        {
            return [f64::NAN; 2];
        }
        out
    }
}

/// One logged control step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub step: usize,
    pub t: f64,
    pub head_x: f64,
    pub head_y: f64,
    pub head_theta: f64,
    pub omega: f64,
    pub phi0: f64,
    pub d_goal: f64,
    pub collisions: usize,
    pub tau: [f64; JOINTS],
    pub reward: StepFitness,
}

pub const TRAJECTORY_HEADER: &str =
    "step,t,head_x,head_y,head_theta,omega,phi0,d_goal,collisions,tau_1,tau_2,tau_3,tau_4,tau_5,tau_6,tau_7,tau_8";

pub fn trajectory_csv(rows: &[LogRow]) -> String {
    let mut s = String::with_capacity(64 + rows.len() * 200);
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.step, r.t, r.head_x, r.head_y, r.head_theta, r.omega, r.phi0, r.d_goal, r.collisions
        );
        for t in r.tau {
            let _ = write!(s, ",{t}");
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub fitness: f64,
    pub steps: usize,
    pub collisions: usize,
    pub success: bool,
    pub routing_time_s: f64,
    pub routing_time_normalized_s: f64,
    pub final_distance: f64,
    /// Why the episode stopped early on an error, if it did.
    pub aborted: Option<String>,
    pub trajectory: Vec<LogRow>,
}

/// Compact per-episode record written next to the trajectory CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub fitness: f64,
    pub steps: usize,
    pub collisions: usize,
    pub success: bool,
    pub routing_time_s: f64,
    pub routing_time_normalized_s: f64,
    pub final_distance: f64,
    pub parameter_count: usize,
    pub aborted: Option<String>,
}

impl EpisodeReport {
    pub fn summary(&self, parameter_count: usize) -> EpisodeSummary {
        EpisodeSummary {
            fitness: self.fitness,
            steps: self.steps,
            collisions: self.collisions,
            success: self.success,
            routing_time_s: self.routing_time_s,
            routing_time_normalized_s: self.routing_time_normalized_s,
            final_distance: self.final_distance,
            parameter_count,
            aborted: self.aborted.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpisodeOptions {
    pub mode: Mode,
    pub initial_phase: f64,
    pub record: bool,
}

impl EpisodeOptions {
    pub fn train() -> Self {
        Self { mode: Mode::Train, initial_phase: 0.0, record: false }
    }

    pub fn eval() -> Self {
        Self { mode: Mode::Eval, initial_phase: 0.0, record: true }
    }
}

pub fn run_episode(task: &Task, controller: &mut dyn Controller, opts: EpisodeOptions) -> EpisodeReport {
    run_episode_observed(task, controller, opts, &mut |_, _| {})
}

/// Like [`run_episode`], calling `observe` with the world after every step.
pub fn run_episode_observed(
    task: &Task,
    controller: &mut dyn Controller,
    opts: EpisodeOptions,
    observe: &mut dyn FnMut(&World, &LogRow),
) -> EpisodeReport {
    let cfg = &task.cfg;
    let ep = &cfg.episode;
    let radius = task.success_radius(opts.mode);
    let finish = |fitness: f64, steps: usize, collisions: usize, success: bool, d: f64, aborted, trajectory| {
        EpisodeReport {
            fitness,
            steps,
            collisions,
            success,
            routing_time_s: steps as f64 * ep.control_dt,
            routing_time_normalized_s: steps as f64 * ep.normalized_step,
            final_distance: d,
            aborted,
            trajectory,
        }
    };

    let mut world = match World::spawn(task.arena.clone(), cfg.robot.clone(), cfg.physics.clone()) {
        Ok(w) => w,
        Err(e) => return finish(-cfg.fitness.collision_penalty, 0, 0, false, f64::NAN, Some(e.to_string()), Vec::new()),
    };
    let yaw_limit = cfg.robot.yaw_limit();
    let mut gait = GaitParams::new(opts.initial_phase);
    let mut inputs = Vec::with_capacity(lidar::INPUTS);
    let mut trajectory = Vec::new();
    let head = world.state.head_pose();
    let (mut d, mut prev_dy) = task.arena.distance_to_goal(head.position());
    let mut total = 0.0;

    for step in 1..=ep.max_steps {
        let head = world.state.head_pose();
        lidar::sense(&task.arena, head.position(), head.theta, ep.lidar_range, &mut inputs);
        let [o1, o2] = controller.act(&inputs);
        let Some((omega, phi0)) = map_outputs(o1, o2) else {
            total -= cfg.fitness.collision_penalty;
            let why = Some(format!("non-finite controller output at step {step}"));
            return finish(total, step, world.collision_count(), false, d, why, trajectory);
        };
        gait.advance(omega, phi0, ep.control_dt);
        let targets = gait_targets(&gait, &cfg.gait, yaw_limit);
        let outcome = match world.step(&targets, ep.control_dt) {
            Ok(o) => o,
            Err(e) => {
                total -= cfg.fitness.collision_penalty;
                return finish(total, step, world.collision_count(), false, d, Some(e.to_string()), trajectory);
            }
        };
        let pos = outcome.head_pose.position();
        let (dist, dy) = task.arena.distance_to_goal(pos);
        d = dist;
        let reward = step_fitness(prev_dy, dy, pos.x, outcome.collision_started, &cfg.fitness);
        total += reward.total();
        prev_dy = dy;
        let row = LogRow {
            step,
            t: world.state.time,
            head_x: pos.x,
            head_y: pos.y,
            head_theta: outcome.head_pose.theta,
            omega,
            phi0,
            d_goal: d,
            collisions: world.collision_count(),
            tau: outcome.joint_torques,
            reward,
        };
        observe(&world, &row);
        if opts.record {
            trajectory.push(row);
        }
        if d <= radius {
            total += cfg.fitness.goal_bonus;
            return finish(total, step, world.collision_count(), true, d, None, trajectory);
        }
        if world.collision_count() > ep.max_collisions {
            return finish(total, step, world.collision_count(), false, d, None, trajectory);
        }
    }
    finish(total, ep.max_steps, world.collision_count(), false, d, None, trajectory)
}

/// One training-mode episode of `genome`; the seed only picks the initial
/// gait phase (and only when `phase_jitter > 0`).
pub fn evaluate_genome(task: &Task, genome: &Genome, seed: u64) -> f64 {
    match FeedforwardNetwork::compile(genome) {
        Ok(net) => {
            let opts = EpisodeOptions { initial_phase: task.initial_phase(seed), ..EpisodeOptions::train() };
            run_episode(task, &mut NetworkController::new(&net), opts).fitness
        }
        Err(_) => INVALID_FITNESS,
    }
}
