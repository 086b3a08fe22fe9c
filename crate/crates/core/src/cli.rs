//! `bnplast run | analyze | trace`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 IO error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::adaptation::StepSample;
use crate::bn::{generate_free_network, BooleanNetwork};
use crate::error::{ConfigError, Error};
use crate::experiment::{
    all_comparisons, replica_csv, run_replica, run_replica_observed, stats_csv, summarize, summary_csv, write_file,
    ReplicaResult, SweepConfig,
};
use crate::regime::{classify, estimate_sensitivity, DEFAULT_EPSILON};
use crate::rng::{mix_seed, ReplicaStreams, Stream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Overrides `base_seed` when set and no `--seed` is given.
pub const SEED_ENV: &str = "BNPLAST_SEED";

pub const TRAJECTORY_HEADER: &str = "step,x,y,heading,v_l,v_r,p_max";
pub const SENSITIVITY_HEADER: &str = "n,k,bias,seed,lambda,std_error,label";

#[derive(Debug, Parser)]
#[command(name = "bnplast", version, about = "Boolean-network robots adapting their sensor coupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a replica sweep and write per-replica, summary and stats CSVs.
    Run(RunArgs),
    /// Estimate Derrida sensitivity and regime of networks.
    Analyze(AnalyzeArgs),
    /// Run one replica and dump its trajectory.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Sweep configuration (JSON).
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Re-run the sweep recorded in a previous run's manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Base seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reset_pose: bool,
    /// Also write per-step trajectories under `trajectories/`.
    #[arg(long)]
    pub dump_trajectory: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Network JSON file; otherwise an ensemble is generated.
    #[arg(long, conflicts_with_all = ["n", "bias", "count"])]
    pub network: Option<PathBuf>,
    #[arg(long, required_unless_present = "network")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "network")]
    pub bias: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Ensemble size.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Sweep configuration; its first (n, bias, encoding) group is traced.
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub reset_pose: bool,
}

/// Written to the output directory before any replica runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub output_dir: PathBuf,
    pub config: SweepConfig,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => CliError::Config(c.to_string()),
            Error::Json { .. } => CliError::Config(e.to_string()),
            Error::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Trace(args) => cmd_trace(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("bnplast: {e}");
            e.exit_code()
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses and validates a sweep configuration. JSON errors carry line and column.
pub fn load_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = read_text(path)?;
    let cfg: SweepConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn seed_override(flag: Option<u64>) -> Result<Option<u64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

fn resolve(mut cfg: SweepConfig, seed: Option<u64>, reset_pose: bool) -> Result<SweepConfig, CliError> {
    if let Some(s) = seed_override(seed)? {
        cfg.base_seed = s;
    }
    cfg.reset_pose_each_trial |= reset_pose;
    cfg.validate()?;
    Ok(cfg)
}

pub fn trajectory_row(out: &mut String, step: usize, s: &StepSample) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{}",
        step, s.pose.x, s.pose.y, s.pose.heading, s.left as u8, s.right as u8, s.p_max
    );
}

/// Runs one replica and returns its result with the trajectory CSV.
pub fn traced_replica(
    cfg: &SweepConfig,
    key: crate::experiment::ConfigKey,
    replica: usize,
) -> Result<(ReplicaResult, String), ConfigError> {
    let mut csv = String::from(TRAJECTORY_HEADER);
    csv.push('\n');
    let mut step = 0usize;
    let result = run_replica_observed(cfg, key, replica, |s| {
        trajectory_row(&mut csv, step, s);
        step += 1;
    })?;
    Ok((result, csv))
}

/// Executes a sweep into `out`: `manifest.json`, `results/*.csv`,
/// `summary.csv`, `stats.csv`, and optionally `trajectories/*.csv`.
pub fn execute_sweep(cfg: &SweepConfig, out: &Path, workers: usize, dump_trajectory: bool) -> Result<Vec<ReplicaResult>, CliError> {
    cfg.validate()?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        output_dir: out.to_path_buf(),
        config: cfg.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out.join("manifest.json"), &(manifest_json + "\n"))?;

    let results_dir = out.join("results");
    let traj_dir = out.join("trajectories");
    let first_error: Mutex<Option<CliError>> = Mutex::new(None);
    let jobs: Vec<_> = cfg
        .keys()
        .into_iter()
        .flat_map(|key| (0..cfg.replicas).map(move |r| (key, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let results: Vec<Option<ReplicaResult>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(key, r)| {
                let stem = key.replica_stem(r);
                let outcome = (|| -> Result<ReplicaResult, CliError> {
                    let result = if dump_trajectory {
                        let (result, csv) = traced_replica(cfg, key, r)?;
                        write_file(&traj_dir.join(format!("{stem}.csv")), &csv)?;
                        result
                    } else {
                        run_replica(cfg, key, r)?
                    };
                    write_file(&results_dir.join(format!("{stem}.csv")), &replica_csv(&result.records))?;
                    Ok(result)
                })();
                match outcome {
                    Ok(res) => Some(res),
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e);
                        None
                    }
                }
            })
            .collect()
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let results: Vec<ReplicaResult> = results.into_iter().flatten().collect();
    write_file(&out.join("summary.csv"), &summary_csv(&summarize(&results)))?;
    write_file(&out.join("stats.csv"), &stats_csv(&all_comparisons(&results, cfg.alpha)))?;
    Ok(results)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let base = match (&args.config, &args.manifest) {
        (Some(path), _) => load_config(path)?,
        (None, Some(path)) => load_manifest(path)?.config,
        (None, None) => return Err(CliError::Config("either --config or --manifest is required".into())),
    };
    let cfg = resolve(base, args.seed, args.reset_pose)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let results = execute_sweep(&cfg, &args.out, workers, args.dump_trajectory)?;
    println!("{} replicas written to {}", results.len(), args.out.display());
    Ok(())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    if !(args.epsilon > 0.0 && args.epsilon < 0.5) {
        return Err(CliError::Config(format!("epsilon must lie in (0, 0.5), got {}", args.epsilon)));
    }
    if args.samples == 0 {
        return Err(CliError::Config("samples must be at least 1".into()));
    }
    let mut networks: Vec<(u64, BooleanNetwork)> = Vec::new();
    if let Some(path) = &args.network {
        let net = BooleanNetwork::from_json(&read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        networks.push((args.seed, net));
    } else {
        let (n, bias) = (args.n.unwrap_or_default(), args.bias.unwrap_or_default());
        for i in 0..args.count.unwrap_or(1) {
            let seed = mix_seed(&[args.seed, i as u64]);
            let mut rng = ReplicaStreams::new(seed).stream(Stream::Network);
            networks.push((seed, generate_free_network(n, args.k, bias, 0.5, &mut rng)?));
        }
    }
    let mut csv = String::from(SENSITIVITY_HEADER);
    csv.push('\n');
    for (seed, net) in &networks {
        let est = estimate_sensitivity(net, args.samples, *seed);
        let label = classify(&est, args.epsilon);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            net.n(),
            net.k(),
            net.bias(),
            seed,
            est.lambda,
            est.std_error,
            label
        );
    }
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn cmd_trace(args: &TraceArgs) -> Result<(), CliError> {
    let cfg = resolve(load_config(&args.config)?, args.seed, args.reset_pose)?;
    let key = cfg.keys()[0];
    let (result, csv) = traced_replica(&cfg, key, 0)?;
    write_file(&args.out, &csv)?;
    println!(
        "n={} bias={} encoding={} seed={} final F_best={}",
        key.n, key.bias, key.encoding, result.seed, result.final_best
    );
    Ok(())
}
