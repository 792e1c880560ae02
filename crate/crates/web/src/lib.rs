//! Browser bindings: three small operations that each return SVG or JSON text.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use snake_neat::config::NeatConfig;
use snake_neat::episode::{
    run_episode, ConstantController, Controller, EpisodeOptions, EpisodeReport, NetworkController, Task, TaskConfig,
};
use snake_neat::evolution::Population;
use snake_neat::network::FeedforwardNetwork;
use snake_neat::svg;
use snake_neat::world::{lidar, Arena, Vec2};

#[derive(Serialize)]
struct Rollout {
    svg: String,
    steps: usize,
    seconds: f64,
    forward_progress_m: f64,
    collisions: usize,
    reached_goal: bool,
    fitness: f64,
}

fn arena(preset: &str) -> Result<Arena, String> {
    Arena::preset(preset).map_err(|e| e.to_string())
}

fn task(preset: &str, seconds: f64, yaw_limit_deg: f64) -> Result<Task, String> {
    let mut cfg = TaskConfig::default();
    cfg.robot.yaw_limit_deg = yaw_limit_deg;
    cfg.episode.max_steps = (seconds / cfg.episode.control_dt).round().clamp(1.0, 20_000.0) as usize;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(Task::with_arena(cfg, arena(preset)?))
}

fn rollout(task: &Task, controller: &mut dyn Controller, title: &str) -> Result<String, String> {
    let r: EpisodeReport = run_episode(task, controller, EpisodeOptions::eval());
    let mut path = vec![task.arena.spawn];
    path.extend(r.trajectory.iter().map(|row| Vec2::new(row.head_x, row.head_y)));
    let end = path.last().copied().unwrap_or(task.arena.spawn);
    let out = Rollout {
        svg: svg::arena_overlay(&task.arena, title, &[(String::new(), path)]),
        steps: r.steps,
        seconds: r.routing_time_s,
        forward_progress_m: end.y - task.arena.spawn.y,
        collisions: r.collisions,
        reached_goal: r.success,
        fitness: r.fitness,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// SVG of the arena with the 120 sensor rays the controller sees from
/// `(x, y)` with the head pointing `heading_deg` from +x.
#[wasm_bindgen]
pub fn lidar_scan(preset: &str, x: f64, y: f64, heading_deg: f64) -> Result<String, String> {
    let a = arena(preset)?;
    let origin = Vec2::new(x, y);
    let theta = heading_deg.to_radians();
    let hits: Vec<Vec2> = (0..lidar::RAYS)
        .step_by(lidar::STRIDE)
        .map(|k| {
            let r = lidar::cast(&a, origin, theta, k, lidar::DEFAULT_MAX_RANGE);
            origin + lidar::ray_direction(theta, k) * r
        })
        .collect();
    let nearest = hits.iter().map(|h| (h - origin).norm()).fold(f64::INFINITY, f64::min);
    Ok(svg::lidar_view(&a, origin, &hits, &format!("nearest return {nearest:.3} m")))
}

/// Runs the gait with fixed raw network outputs `(o1, o2)`; returns JSON
/// with the trajectory SVG and episode numbers.
#[wasm_bindgen]
pub fn gait_rollout(preset: &str, o1: f64, o2: f64, seconds: f64, yaw_limit_deg: f64) -> Result<String, String> {
    let t = task(preset, seconds, yaw_limit_deg)?;
    rollout(&t, &mut ConstantController(o1, o2), &format!("constant outputs ({o1}, {o2})"))
}

/// Builds one untrained NEAT genome from `seed` and runs it as the controller.
#[wasm_bindgen]
pub fn random_controller(preset: &str, seed: u64, seconds: f64) -> Result<String, String> {
    let t = task(preset, seconds, 45.0)?;
    let cfg = NeatConfig { pop_size: 1, ..NeatConfig::default() };
    let genome = Population::new(cfg, seed).genomes.remove(0);
    let net = FeedforwardNetwork::compile(&genome).map_err(|e| e.to_string())?;
    let title = format!("untrained genome, seed {seed}, {} params", genome.parameter_count());
    rollout(&t, &mut NetworkController::new(&net), &title)
}
