//! `snake-neat`: train, evaluate, ablate and replay snake gait controllers.
//!
//! Configuration is layered: defaults, then `--config`, then
//! `SNAKE_NEAT_<KEY>` environment variables, then explicit flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snake_neat::config::{ConfigError, RunConfig};
use snake_neat::episode::Task;
use snake_neat::trainer::{self, RunError, TrainOptions, CHAMPION_FILE};

#[derive(Parser)]
#[command(name = "snake-neat", version, about = "NEAT-evolved serpenoid gait controllers for a planar snake robot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a controller; writes stats.csv, checkpoints, champion and manifest.
    Train(TrainArgs),
    /// Run eval-mode trials of a champion and write CSV, JSON and SVG output.
    Evaluate(EvalArgs),
    /// Train and score one champion per head-angle limit (30, 45, 60, 90, 180 degrees).
    Ablate(TrainArgs),
    /// Re-run one episode with status lines and arena snapshots.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct TaskArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arena preset name or layout file.
    #[arg(long)]
    preset: Option<String>,
    /// Head joint limit in degrees.
    #[arg(long = "yaw-limit")]
    yaw_limit: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Evaluation threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Checkpoint cadence in generations (0 disables).
    #[arg(long = "checkpoint-every", default_value_t = trainer::DEFAULT_CHECKPOINT_EVERY)]
    checkpoint_every: usize,
    /// Continue from the newest checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Champion genome file.
    champion: PathBuf,
    #[command(flatten)]
    task: TaskArgs,
    #[arg(long, default_value_t = 5)]
    trials: usize,
}

#[derive(Args)]
struct ReplayArgs {
    /// Champion genome file.
    champion: PathBuf,
    #[command(flatten)]
    task: TaskArgs,
    /// Comma-separated snapshot times in seconds.
    #[arg(long, value_delimiter = ',', default_values_t = [0.12, 6.48, 12.12, 17.77])]
    snapshots: Vec<f64>,
    /// Multiple of real time; 0 runs as fast as possible.
    #[arg(long, default_value_t = 0.0)]
    speed: f64,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Ablate(a) => ablate(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(args: &TaskArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| match e {
            ConfigError::Io(io) => Failure::Config(format!("{}: {io}", path.display())),
            other => other.into(),
        })?,
        None => RunConfig::default(),
    };
    let touched = cfg.apply_env_overrides()?;
    if !touched.is_empty() {
        eprintln!("environment overrides: {}", touched.join(", "));
    }
    if let Some(p) = &args.preset {
        cfg.set("arena", p)?;
    }
    if let Some(y) = args.yaw_limit {
        cfg.set("yaw_limit_deg", &y.to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(args: &TaskArgs, fallback: &str) -> PathBuf {
    args.out.clone().unwrap_or_else(|| PathBuf::from(fallback))
}

fn train_options(a: &TrainArgs) -> Result<TrainOptions, Failure> {
    let mut opts = TrainOptions::new(load_config(&a.task)?, a.seed, a.generations);
    opts.config_path = a.task.config.clone();
    opts.workers = a.workers.max(1);
    opts.checkpoint_every = a.checkpoint_every;
    opts.resume = a.resume;
    Ok(opts)
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    let opts = train_options(&a)?;
    let out = out_dir(&a.task, "runs/train");
    let m = trainer::train(&opts, &out, &mut |s| {
        println!(
            "gen {:4}  best {:10.2}  mean {:10.2}  species {:3}  size {}",
            s.generation, s.best_fitness, s.mean_fitness, s.species_count, s.best_genome_size
        );
    })?;
    println!(
        "run {}: {} generations, champion fitness {:.2}, {} params, {} bytes -> {}",
        m.run_id,
        m.generations_completed,
        m.champion_fitness,
        m.champion_parameter_count,
        m.champion_size_bytes,
        out.join(CHAMPION_FILE).display()
    );
    Ok(())
}

fn evaluate(a: EvalArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.task)?;
    let task = Task::new(cfg.task).map_err(RunError::from)?;
    let (genome, size) = trainer::load_champion(&a.champion)?;
    let out = out_dir(&a.task, "runs/evaluate");
    let s = trainer::evaluate(&genome, size, &task, a.trials, &out)?;
    println!(
        "{}/{} trials reached the goal; mean routing {:.2} s ({:.2} s normalized), mean collisions {:.2}",
        s.successes, s.trials, s.mean_routing_time_s, s.mean_routing_time_normalized_s, s.mean_collisions
    );
    println!("champion: {} params, {:.2} KB -> {}", s.parameter_count, s.serialized_kb, out.display());
    Ok(())
}

fn ablate(a: TrainArgs) -> Result<(), Failure> {
    let opts = train_options(&a)?;
    let out = out_dir(&a.task, "runs/ablate");
    let report = trainer::ablate(&opts, &out, &mut |angle, s| {
        println!("[{angle}°] gen {:4}  best {:10.2}", s.generation, s.best_fitness);
    })?;
    print!("{}", trainer::ablation_table(&report.rows));
    if !report.head_45_fewest_collisions {
        eprintln!("warning: the 45° limit does not have the fewest collisions in this sweep");
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.task)?;
    let task = Task::new(cfg.task).map_err(RunError::from)?;
    let (genome, _) = trainer::load_champion(&a.champion)?;
    let out = out_dir(&a.task, "runs/replay");
    let r = trainer::replay(&genome, &task, &a.snapshots, a.speed, &out, &mut std::io::stdout())?;
    for f in &r.frames {
        println!("wrote {}", f.display());
    }
    Ok(())
}
