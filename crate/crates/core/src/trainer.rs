//! Training runs with checkpoints, champion evaluation, the head-angle
//! sweep and replay, plus the files each of them writes.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec;
use crate::config::{ConfigError, RunConfig};
use crate::episode::{
    evaluate_genome, run_episode, run_episode_observed, trajectory_csv, EpisodeOptions, EpisodeReport,
    EpisodeSummary, LogRow, NetworkController, Task,
};
use crate::evolution::{EvalContext, EvolutionError, GenerationStats, Population};
use crate::genome::{Genome, GenomeError};
use crate::network::FeedforwardNetwork;
use crate::svg;
use crate::world::{ArenaError, Pose, Vec2, World};

pub const STATS_HEADER: &str = "gen,best,mean,species_count,best_genome_size";
pub const ABLATION_HEADER: &str = "max_head_angle,collisions,steps_to_goal,final_fitness,reached_goal";
pub const ABLATION_ANGLES: [f64; 5] = [30.0, 45.0, 60.0, 90.0, 180.0];
pub const DEFAULT_CHECKPOINT_EVERY: usize = 5;

pub const STATS_FILE: &str = "stats.csv";
pub const CHAMPION_FILE: &str = "champion.snkg";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.txt";
pub const CHECKPOINT_DIR: &str = "checkpoints";

const CHECKPOINT_MAGIC: &[u8; 8] = b"SNKCKPT1";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error("champion genome: {0}")]
    Genome(#[from] GenomeError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Problems with the configuration or arena rather than the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_) | Self::Arena(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Writes through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// SHA-256 of the canonical `key = value` rendering.
pub fn config_hash(cfg: &RunConfig) -> String {
    hex(&Sha256::digest(cfg.to_text().as_bytes()))
}

/// Short hex id derived from the config hash and seed.
pub fn run_id(config_hash: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(config_hash.as_bytes());
    h.update(seed.to_le_bytes());
    hex(&h.finalize())[..12].to_string()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub run_id: String,
    pub generations_completed: usize,
    pub solved: bool,
    pub champion_fitness: f64,
    pub champion_parameter_count: usize,
    pub champion_size_bytes: usize,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Checkpoint { path: path.to_path_buf(), reason: e.to_string() })
    }
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub generations: usize,
    pub workers: usize,
    pub checkpoint_every: usize,
    /// Continue from the newest checkpoint in the output directory, if any.
    pub resume: bool,
}

impl TrainOptions {
    pub fn new(config: RunConfig, seed: u64, generations: usize) -> Self {
        Self {
            config,
            config_path: None,
            seed,
            generations,
            workers: 1,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            resume: false,
        }
    }
}

pub fn stats_csv(log: &[GenerationStats]) -> String {
    let mut s = String::from(STATS_HEADER);
    s.push('\n');
    for g in log {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            g.generation, g.best_fitness, g.mean_fitness, g.species_count, g.best_genome_size
        );
    }
    s
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    config_hash: String,
    /// Population with `genomes` and `best` moved into the compact codec below.
    state: Population,
    genomes: Vec<Vec<u8>>,
    best: Option<Vec<u8>>,
}

pub fn checkpoint_path(out_dir: &Path, generations: usize) -> PathBuf {
    out_dir.join(CHECKPOINT_DIR).join(format!("gen-{generations:05}.ckpt"))
}

pub fn save_checkpoint(path: &Path, pop: &Population, config_hash: &str) -> Result<(), RunError> {
    let mut state = pop.clone();
    let genomes = std::mem::take(&mut state.genomes).iter().map(codec::encode).collect();
    let best = state.best.take().map(|g| codec::encode(&g));
    let file = CheckpointFile { config_hash: config_hash.to_string(), state, genomes, best };
    let mut bytes = CHECKPOINT_MAGIC.to_vec();
    bincode::serialize_into(&mut bytes, &file)
        .map_err(|e| RunError::Checkpoint { path: path.to_path_buf(), reason: e.to_string() })?;
    write_atomic(path, &bytes)
}

/// Loads a checkpoint; returns the population and the config hash it was written with.
pub fn load_checkpoint(path: &Path) -> Result<(Population, String), RunError> {
    let bad = |reason: String| RunError::Checkpoint { path: path.to_path_buf(), reason };
    let bytes = fs::read(path).map_err(io_err(path))?;
    let body = bytes.strip_prefix(CHECKPOINT_MAGIC.as_slice()).ok_or_else(|| bad("not a checkpoint file".into()))?;
    let file: CheckpointFile = bincode::deserialize(body).map_err(|e| bad(e.to_string()))?;
    let mut pop = file.state;
    pop.genomes = file.genomes.iter().map(|b| codec::decode(b)).collect::<Result<_, _>>()?;
    pop.best = file.best.map(|b| codec::decode(&b)).transpose()?;
    Ok((pop, file.config_hash))
}

/// Newest checkpoint under `out_dir`, by generation count.
pub fn latest_checkpoint(out_dir: &Path) -> Option<PathBuf> {
    let dir = out_dir.join(CHECKPOINT_DIR);
    let mut found: Vec<PathBuf> = fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ckpt"))
        .collect();
    found.sort();
    found.pop()
}

pub fn load_champion(path: &Path) -> Result<(Genome, usize), RunError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok((codec::decode(&bytes)?, bytes.len()))
}

/// Runs (or resumes) a training run, writing stats, checkpoints, the
/// champion and the manifest into `out_dir`. `progress` sees every
/// generation's stats.
pub fn train(
    opts: &TrainOptions,
    out_dir: &Path,
    progress: &mut dyn FnMut(&GenerationStats),
) -> Result<RunManifest, RunError> {
    opts.config.validate()?;
    let task = Task::new(opts.config.task.clone())?;
    let hash = config_hash(&opts.config);
    create_dir(&out_dir.join(CHECKPOINT_DIR))?;
    write_atomic(&out_dir.join(CONFIG_FILE), opts.config.to_text().as_bytes())?;

    let mut pop = match opts.resume.then(|| latest_checkpoint(out_dir)).flatten() {
        Some(path) => {
            let (pop, saved) = load_checkpoint(&path)?;
            if saved != hash {
                return Err(RunError::Checkpoint { path, reason: "written with a different config".into() });
            }
            pop
        }
        None => Population::new(opts.config.neat.clone(), opts.seed),
    };
    let seed = pop.seed;
    let evaluator = |g: &Genome, ctx: EvalContext| evaluate_genome(&task, g, ctx.seed);
    let mut manifest = RunManifest {
        config_path: opts.config_path.as_ref().map(|p| p.display().to_string()),
        config_hash: hash.clone(),
        seed,
        run_id: run_id(&hash, seed),
        generations_completed: pop.log.len(),
        solved: pop.solved,
        champion_fitness: f64::NAN,
        champion_parameter_count: 0,
        champion_size_bytes: 0,
    };

    while !pop.solved && pop.log.len() < opts.generations {
        pop.step(&evaluator, opts.workers)?;
        let done = pop.log.len();
        write_atomic(&out_dir.join(STATS_FILE), stats_csv(&pop.log).as_bytes())?;
        progress(pop.log.last().expect("a generation was just logged"));
        let bytes = refresh_manifest(&mut manifest, &pop);
        write_atomic(&out_dir.join(CHAMPION_FILE), &bytes)?;
        if opts.checkpoint_every > 0 && done % opts.checkpoint_every == 0 {
            save_checkpoint(&checkpoint_path(out_dir, done), &pop, &hash)?;
        }
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        write_atomic(&out_dir.join(MANIFEST_FILE), json.as_bytes())?;
    }
    if manifest.champion_fitness.is_nan() && pop.best.is_some() {
        refresh_manifest(&mut manifest, &pop);
    }
    Ok(manifest)
}

/// Copies the champion's numbers into `manifest`; returns its encoding.
fn refresh_manifest(manifest: &mut RunManifest, pop: &Population) -> Vec<u8> {
    let champion = pop.best.as_ref().expect("best is set after a generation");
    let bytes = codec::encode(champion);
    manifest.generations_completed = pop.log.len();
    manifest.solved = pop.solved;
    manifest.champion_fitness = champion.fitness.unwrap_or(f64::NAN);
    manifest.champion_parameter_count = champion.parameter_count();
    manifest.champion_size_bytes = bytes.len();
    bytes
}

/// Initial gait phase of evaluation trial `i`; trials are spread evenly
/// over one gait cycle, trial 0 matching the training condition.
pub fn trial_phase(i: usize, trials: usize) -> f64 {
    TAU * i as f64 / trials.max(1) as f64
}

fn compile(genome: &Genome) -> Result<FeedforwardNetwork, RunError> {
    Ok(FeedforwardNetwork::compile(genome)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub arena: String,
    pub trials: usize,
    pub successes: usize,
    pub mean_routing_time_s: f64,
    pub mean_routing_time_normalized_s: f64,
    pub mean_collisions: f64,
    pub mean_steps: f64,
    pub parameter_count: usize,
    pub serialized_bytes: usize,
    pub serialized_kb: f64,
    pub per_trial: Vec<EpisodeSummary>,
}

/// Eval-mode episodes of `champion`; writes `trial_<i>.csv`,
/// `summary.json`, `trajectories.svg`, `timeseries.svg` and `torques.svg`.
pub fn evaluate(
    champion: &Genome,
    serialized_bytes: usize,
    task: &Task,
    trials: usize,
    out_dir: &Path,
) -> Result<EvalSummary, RunError> {
    let net = compile(champion)?;
    create_dir(out_dir)?;
    let trials = trials.max(1);
    let params = champion.parameter_count();
    let mut reports: Vec<EpisodeReport> = Vec::with_capacity(trials);
    for i in 0..trials {
        let opts = EpisodeOptions { initial_phase: trial_phase(i, trials), ..EpisodeOptions::eval() };
        let r = run_episode(task, &mut NetworkController::new(&net), opts);
        let path = out_dir.join(format!("trial_{}.csv", i + 1));
        write_atomic(&path, trajectory_csv(&r.trajectory).as_bytes())?;
        reports.push(r);
    }
    let n = trials as f64;
    let mean = |f: &dyn Fn(&EpisodeReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let summary = EvalSummary {
        arena: task.cfg.episode.arena.clone(),
        trials,
        successes: reports.iter().filter(|r| r.success).count(),
        mean_routing_time_s: mean(&|r| r.routing_time_s),
        mean_routing_time_normalized_s: mean(&|r| r.routing_time_normalized_s),
        mean_collisions: mean(&|r| r.collisions as f64),
        mean_steps: mean(&|r| r.steps as f64),
        parameter_count: params,
        serialized_bytes,
        serialized_kb: serialized_bytes as f64 / 1024.0,
        per_trial: reports.iter().map(|r| r.summary(params)).collect(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    write_atomic(&out_dir.join("summary.json"), json.as_bytes())?;

    let paths: Vec<(String, Vec<Vec2>)> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut p = vec![task.arena.spawn];
            p.extend(r.trajectory.iter().map(|row| Vec2::new(row.head_x, row.head_y)));
            (format!("trial {}", i + 1), p)
        })
        .collect();
    let overlay = svg::arena_overlay(&task.arena, "head trajectories", &paths);
    write_atomic(&out_dir.join("trajectories.svg"), overlay.as_bytes())?;
    let rows = &reports[0].trajectory;
    write_atomic(&out_dir.join("timeseries.svg"), state_plot(rows).as_bytes())?;
    write_atomic(&out_dir.join("torques.svg"), torque_plot(rows).as_bytes())?;
    Ok(summary)
}

fn column(rows: &[LogRow], f: impl Fn(&LogRow) -> f64) -> Vec<f64> {
    rows.iter().map(f).collect()
}

pub fn state_plot(rows: &[LogRow]) -> String {
    let t = column(rows, |r| r.t);
    svg::time_series(
        "trial 1",
        &t,
        &[
            ("head x [m]", column(rows, |r| r.head_x)),
            ("head y [m]", column(rows, |r| r.head_y)),
            ("head angle [rad]", column(rows, |r| r.head_theta)),
            ("omega [rad/s]", column(rows, |r| r.omega)),
            ("phi0 [rad]", column(rows, |r| r.phi0)),
            ("distance to goal [m]", column(rows, |r| r.d_goal)),
        ],
    )
}

pub fn torque_plot(rows: &[LogRow]) -> String {
    let t = column(rows, |r| r.t);
    let labels = ["tau 1", "tau 2", "tau 3", "tau 4", "tau 5", "tau 6", "tau 7", "tau 8"];
    let panels: Vec<(&str, Vec<f64>)> =
        labels.iter().enumerate().map(|(j, l)| (*l, column(rows, |r| r.tau[j]))).collect();
    svg::time_series("joint torques [N m]", &t, &panels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub max_head_angle: f64,
    pub collisions: usize,
    pub steps_to_goal: usize,
    pub final_fitness: f64,
    pub reached_goal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    /// Whether the 45° row has the lowest collision count (ties allowed).
    pub head_45_fewest_collisions: bool,
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut s = String::from(ABLATION_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.max_head_angle, r.collisions, r.steps_to_goal, r.final_fitness, r.reached_goal
        );
    }
    s
}

pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mut s = format!("{:>10} {:>10} {:>14} {:>14} {:>8}\n", "angle", "collisions", "steps_to_goal", "final_fitness", "reached");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>10} {:>10} {:>14} {:>14.1} {:>8}",
            format!("{}°", r.max_head_angle),
            r.collisions,
            r.steps_to_goal,
            r.final_fitness,
            if r.reached_goal { "yes" } else { "no" }
        );
    }
    s
}

pub fn fewest_collisions_at_45(rows: &[AblationRow]) -> bool {
    let min = rows.iter().map(|r| r.collisions).min();
    rows.iter().any(|r| r.max_head_angle == 45.0 && Some(r.collisions) == min)
}

/// One independent training run per head-angle limit, each champion scored
/// by a single eval-mode episode. Writes `yaw_<deg>/`, `ablation.csv` and
/// `ablation.txt`.
pub fn ablate(
    base: &TrainOptions,
    out_dir: &Path,
    progress: &mut dyn FnMut(f64, &GenerationStats),
) -> Result<AblationReport, RunError> {
    create_dir(out_dir)?;
    let mut rows = Vec::with_capacity(ABLATION_ANGLES.len());
    for angle in ABLATION_ANGLES {
        let mut opts = base.clone();
        opts.config.task.robot.yaw_limit_deg = angle;
        let dir = out_dir.join(format!("yaw_{angle}"));
        let manifest = train(&opts, &dir, &mut |s| progress(angle, s))?;
        let (champion, _) = load_champion(&dir.join(CHAMPION_FILE))?;
        let task = Task::new(opts.config.task.clone())?;
        let net = compile(&champion)?;
        let r = run_episode(&task, &mut NetworkController::new(&net), EpisodeOptions::eval());
        rows.push(AblationRow {
            max_head_angle: angle,
            collisions: r.collisions,
            steps_to_goal: r.steps,
            final_fitness: manifest.champion_fitness,
            reached_goal: r.success,
        });
    }
    write_atomic(&out_dir.join("ablation.csv"), ablation_csv(&rows).as_bytes())?;
    write_atomic(&out_dir.join("ablation.txt"), ablation_table(&rows).as_bytes())?;
    let head_45_fewest_collisions = fewest_collisions_at_45(&rows);
    Ok(AblationReport { rows, head_45_fewest_collisions })
}

#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub episode: EpisodeReport,
    pub frames: Vec<PathBuf>,
}

fn status_line(row: &LogRow) -> String {
    format!(
        "t={:7.2}s  head=({:6.3}, {:6.3})  d_goal={:6.3}  collisions={}",
        row.t, row.head_x, row.head_y, row.d_goal, row.collisions
    )
}

/// Re-runs one eval-mode episode, printing a status line per simulated
/// second to `status` and writing one arena frame per requested time.
/// `speed` > 0 paces the loop at that multiple of real time.
pub fn replay(
    champion: &Genome,
    task: &Task,
    snapshots: &[f64],
    speed: f64,
    out_dir: &Path,
    status: &mut dyn Write,
) -> Result<ReplayReport, RunError> {
    let net = compile(champion)?;
    create_dir(out_dir)?;
    let dt = task.cfg.episode.control_dt;
    let mut wanted: Vec<(usize, f64)> = snapshots.iter().copied().enumerate().collect();
    wanted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut frames: Vec<Option<(f64, Vec<Pose>)>> = vec![None; snapshots.len()];
    let mut next = 0;
    let mut last = (0.0, Vec::new());
    let mut io_error = None;
    let mut observe = |world: &World, row: &LogRow| {
        while next < wanted.len() && row.t + dt / 2.0 > wanted[next].1 {
            frames[wanted[next].0] = Some((row.t, world.link_poses().to_vec()));
            next += 1;
        }
        if row.t.floor() > (row.t - dt).floor() && io_error.is_none() {
            io_error = writeln!(status, "{}", status_line(row)).err();
        }
        last = (row.t, world.link_poses().to_vec());
        if speed > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(dt / speed));
        }
    };
    let opts = EpisodeOptions::eval();
    let episode = run_episode_observed(task, &mut NetworkController::new(&net), opts, &mut observe);
    if let Some(e) = io_error {
        return Err(RunError::Io { path: PathBuf::from("<status>"), source: e });
    }
    if let Some(row) = episode.trajectory.last() {
        let outcome = if episode.success { "reached goal" } else { "stopped" };
        let _ = writeln!(status, "{}  {outcome} after {} steps", status_line(row), episode.steps);
    }

    let spec = &task.cfg.robot;
    let mut paths = Vec::with_capacity(snapshots.len());
    for (i, requested) in snapshots.iter().enumerate() {
        let (t, poses) = frames[i].clone().unwrap_or_else(|| last.clone());
        let caption = format!("t = {t:.2} s (requested {requested:.2} s)");
        let doc = svg::arena_frame(&task.arena, &poses, spec.link_length, spec.link_width, &caption);
        let path = out_dir.join(format!("frame_{:02}_{requested:.2}s.svg", i + 1));
        write_atomic(&path, doc.as_bytes())?;
        paths.push(path);
    }
    write_atomic(&out_dir.join("replay.csv"), trajectory_csv(&episode.trajectory).as_bytes())?;
    Ok(ReplayReport { episode, frames: paths })
}
