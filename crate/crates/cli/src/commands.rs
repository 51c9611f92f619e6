use crate::serve::{self, ServeOptions};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sharedpilot::config::ConfigError;
use sharedpilot::experiment::write_csv;
use sharedpilot::fuzzy::{dump_tables, GainTarget, RuleTable};
use sharedpilot::{run_experiment, ExperimentConfig, RunMetrics, RunMode, SimError};
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sharedpilot", version, about = "Shared brain/autopilot quadrotor simulator")]
pub struct Cli {
    /// Experiment configuration (JSON). Defaults to the built-in config.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one batch experiment and write telemetry.csv and metrics.json.
    Run(RunArgs),
    /// Run a grid over channel parameters and seeds.
    Sweep(SweepArgs),
    /// Live mode: WebSocket endpoint at /ws.
    Serve(ServeArgs),
    /// Print the three fuzzy rule tables.
    DumpTables(DumpArgs),
    /// Check a configuration file and report the first invalid field.
    ValidateConfig,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// brain | auto | shared
    #[arg(long)]
    pub mode: Option<RunMode>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated channel accuracies.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.9")]
    pub accuracy: Vec<f64>,
    /// Comma-separated recognition intervals (s).
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub recognition_interval: Vec<f64>,
    /// Comma-separated latencies (s).
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    pub latency: Vec<f64>,
    /// Seeds 0..n for every grid point.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Comma-separated modes to run at every grid point.
    #[arg(long, value_delimiter = ',', default_value = "brain,shared")]
    pub mode: Vec<RunMode>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Simulated seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,
    /// Publish telemetry every n-th step.
    #[arg(long, default_value_t = 5)]
    pub decimation: u32,
    /// Overrides the configured authority mode.
    #[arg(long)]
    pub mode: Option<RunMode>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Read kp.txt, ki.txt and kd.txt from this directory instead of the
    /// built-in tables.
    #[arg(long, value_name = "DIR")]
    pub tables: Option<PathBuf>,
}

/// Contents of metrics.json.
#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub mode: &'static str,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: RunMetrics,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn sim_exit(e: &SimError) -> i32 {
    match e {
        SimError::Diverged { .. } => EXIT_DIVERGED,
        _ => EXIT_INVALID_CONFIG,
    }
}

pub fn execute(cli: Cli) -> i32 {
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&cfg, &args),
        Command::Sweep(args) => cmd_sweep(&cfg, &args),
        Command::Serve(args) => cmd_serve(cfg, &args),
        Command::DumpTables(args) => cmd_dump(&args),
        Command::ValidateConfig => {
            println!("config ok");
            Ok(EXIT_OK)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_INVALID_CONFIG
    })
}

fn cmd_run(cfg: &ExperimentConfig, args: &RunArgs) -> anyhow::Result<i32> {
    let mode = args.mode.unwrap_or(cfg.mode);
    let seed = args.seed.unwrap_or(cfg.seed);
    let out = match run_experiment(cfg, mode, seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(sim_exit(&e));
        }
    };
    fs::create_dir_all(&args.out)?;
    let csv = fs::File::create(args.out.join("telemetry.csv"))?;
    write_csv(&out.rows, BufWriter::new(csv))?;
    let report = MetricsReport {
        mode: mode.label(),
        seed,
        metrics: out.metrics,
    };
    fs::write(
        args.out.join("metrics.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    let m = out.metrics;
    println!(
        "{} seed {seed}: rms cross-track {:.3} m, max {:.3} m, lap {:.1}%, {} switches, {} steps",
        mode.label(),
        m.rms_cross_track,
        m.max_cross_track,
        100.0 * m.lap_completion,
        m.mode_switches,
        m.steps
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy)]
struct SweepJob {
    accuracy: f64,
    recognition_interval: f64,
    latency: f64,
    mode: RunMode,
    seed: u64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn cmd_sweep(cfg: &ExperimentConfig, args: &SweepArgs) -> anyhow::Result<i32> {
    let mut jobs = Vec::new();
    for &accuracy in &args.accuracy {
        for &recognition_interval in &args.recognition_interval {
            for &latency in &args.latency {
                for &mode in &args.mode {
                    for seed in 0..args.seeds {
                        jobs.push(SweepJob {
                            accuracy,
                            recognition_interval,
                            latency,
                            mode,
                            seed,
                        });
                    }
                }
            }
        }
    }
    // Reject bad grid values before spending time on runs.
    for job in &jobs {
        let mut c = cfg.clone();
        c.channel.accuracy = job.accuracy;
        c.channel.recognition_interval = job.recognition_interval;
        c.channel.latency = job.latency;
        if let Err(e) = c.validate() {
            eprintln!("error: {e}");
            return Ok(EXIT_INVALID_CONFIG);
        }
    }
    let results: Vec<(SweepJob, Result<RunMetrics, SimError>)> = jobs
        .par_iter()
        .map(|job| {
            let mut c = cfg.clone();
            c.channel.accuracy = job.accuracy;
            c.channel.recognition_interval = job.recognition_interval;
            c.channel.latency = job.latency;
            (*job, run_experiment(&c, job.mode, job.seed).map(|o| o.metrics))
        })
        .collect();

    fs::create_dir_all(&args.out)?;
    let mut csv = String::from(
        "accuracy,recognition_interval,latency,mode,seed,status,rms_cross_track,max_cross_track,rms_altitude_error,lap_completion,mode_switches,mean_alpha\n",
    );
    let mut diverged = false;
    for (j, r) in &results {
        let head = format!(
            "{},{},{},{},{}",
            j.accuracy, j.recognition_interval, j.latency, j.mode, j.seed
        );
        match r {
            Ok(m) => writeln!(
                csv,
                "{head},ok,{},{},{},{},{},{}",
                m.rms_cross_track,
                m.max_cross_track,
                m.rms_altitude_error,
                m.lap_completion,
                m.mode_switches,
                m.mean_alpha
            )?,
            Err(e) => {
                diverged |= matches!(e, SimError::Diverged { .. });
                writeln!(csv, "{head},{},,,,,,", csv_status(e))?;
            }
        }
    }
    fs::write(args.out.join("sweep.csv"), csv)?;

    println!("accuracy  T_rec  latency  mode    median_rms  median_lap");
    for chunk in results.chunks(args.seeds.max(1) as usize) {
        let j = chunk[0].0;
        let ok: Vec<&RunMetrics> = chunk.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
        println!(
            "{:<9} {:<6} {:<8} {:<7} {:<11.3} {:.3}",
            j.accuracy,
            j.recognition_interval,
            j.latency,
            j.mode,
            median(ok.iter().map(|m| m.rms_cross_track).collect()),
            median(ok.iter().map(|m| m.lap_completion).collect()),
        );
    }
    Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK })
}

fn csv_status(e: &SimError) -> &'static str {
    match e {
        SimError::Diverged { .. } => "diverged",
        _ => "error",
    }
}

fn cmd_serve(mut cfg: ExperimentConfig, args: &ServeArgs) -> anyhow::Result<i32> {
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !(args.time_scale > 0.0 && args.time_scale.is_finite()) {
        eprintln!("error: --time-scale must be positive");
        return Ok(EXIT_INVALID_CONFIG);
    }
    let opts = ServeOptions {
        time_scale: args.time_scale,
        decimation: args.decimation.max(1),
        ..ServeOptions::default()
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = serve::bind(args.port).await?;
        eprintln!(
            "serving ws://{}/ws ({} mode, time scale {})",
            listener.local_addr()?,
            cfg.mode.label(),
            opts.time_scale
        );
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve::serve(listener, cfg, opts, shutdown).await
    })?;
    Ok(EXIT_OK)
}

fn cmd_dump(args: &DumpArgs) -> anyhow::Result<i32> {
    let tables = match &args.tables {
        None => GainTarget::ALL.into_iter().map(RuleTable::builtin).collect(),
        Some(dir) => GainTarget::ALL
            .into_iter()
            .map(|t| {
                let file = dir.join(format!("{}.txt", t.name().to_lowercase()));
                RuleTable::load(&file, t)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    print!("{}", dump_tables(&tables));
    Ok(EXIT_OK)
}
