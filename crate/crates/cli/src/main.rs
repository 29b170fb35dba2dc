//! `lowpass-gsp`: batch front end for low-pass graph signal experiments.
//!
//! Every subcommand reads a JSON experiment config, writes its results into
//! `--out`, and records a deterministic `manifest.json` next to a
//! `timings.json`. Failures print a single JSON line on stderr and exit with
//! 1 (usage or config), 2 (data validation) or 3 (numerical failure).

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::Inputs;
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "lowpass-gsp",
    version,
    about = "Low-pass graph signal processing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a graph and signals (or a trajectory) from the config.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Laplacian spectrum, and the mean GFT magnitude profile of --signals.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        signals: Option<PathBuf>,
    },
    /// Frequency response of the configured filter, applied to --signals.
    Filter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        signals: Option<PathBuf>,
    },
    /// Low-pass ratio of the configured filter at bandwidth k.
    Ratio {
        #[command(flatten)]
        common: Common,
    },
    /// Greedy sampling set and interpolator for bandwidth k.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Full signals to subsample with the new plan.
        #[arg(long)]
        signals: Option<PathBuf>,
    },
    /// Bandlimited reconstruction from samples.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Spectral or blind community detection.
    Communities {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        signals: Option<PathBuf>,
        /// Reference labels (node,label) for scoring.
        #[arg(long)]
        membership: Option<PathBuf>,
    },
    /// Learn a Laplacian from smooth signals.
    LearnGraph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        signals: PathBuf,
    },
    /// Fill in the unobserved entries of a trajectory.
    Interpolate {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV with a t0,t1,... header.
        #[arg(long)]
        signals: PathBuf,
        /// 0/1 CSV, 1 where observed.
        #[arg(long)]
        mask: PathBuf,
    },
    /// Calibrate on --train and test --signals for high-frequency anomalies.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Anomaly-free signals used to calibrate the threshold.
        #[arg(long)]
        train: PathBuf,
        /// Signals to test, one per column.
        #[arg(long)]
        signals: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Spectrum { .. } => "spectrum",
            Command::Filter { .. } => "filter",
            Command::Ratio { .. } => "ratio",
            Command::Sample { .. } => "sample",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Communities { .. } => "communities",
            Command::LearnGraph { .. } => "learn-graph",
            Command::Interpolate { .. } => "interpolate",
            Command::Detect { .. } => "detect",
        }
    }

    fn split(self) -> (Common, Inputs) {
        let mut inputs = Inputs::default();
        let common = match self {
            Command::Generate { common } | Command::Ratio { common } => common,
            Command::Spectrum { common, signals }
            | Command::Filter { common, signals }
            | Command::Sample { common, signals } => {
                inputs.signals = signals;
                common
            }
            Command::Reconstruct {
                common,
                plan,
                samples,
            } => {
                inputs.plan = Some(plan);
                inputs.samples = Some(samples);
                common
            }
            Command::Communities {
                common,
                signals,
                membership,
            } => {
                inputs.signals = signals;
                inputs.membership = membership;
                common
            }
            Command::LearnGraph { common, signals } => {
                inputs.signals = Some(signals);
                common
            }
            Command::Interpolate {
                common,
                signals,
                mask,
            } => {
                inputs.signals = Some(signals);
                inputs.mask = Some(mask);
                common
            }
            Command::Detect {
                common,
                train,
                signals,
            } => {
                inputs.train = Some(train);
                inputs.signals = Some(signals);
                common
            }
        };
        (common, inputs)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    let name = cli.command.name();
    let (common, inputs) = cli.command.split();
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))?;
    }
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common.out;
    std::fs::create_dir_all(&out).map_err(|e| {
        CliError::usage(format!(
            "cannot create output directory {}: {e}",
            out.display()
        ))
    })?;
    let mut written = match name {
        "generate" => commands::generate(&config, &out)?,
        "spectrum" => commands::spectrum(&config, &inputs, &out)?,
        "filter" => commands::filter(&config, &inputs, &out)?,
        "ratio" => commands::ratio(&config, &out)?,
        "sample" => commands::sample(&config, &inputs, &out)?,
        "reconstruct" => commands::reconstruct(&config, &inputs, &out)?,
        "communities" => commands::communities(&config, &inputs, &out)?,
        "learn-graph" => commands::learn_graph(&config, &inputs, &out)?,
        "interpolate" => commands::interpolate(&config, &inputs, &out)?,
        "detect" => commands::detect_anomalies(&config, &inputs, &out)?,
        other => unreachable!("unknown subcommand {other}"),
    };
    let resolved = out.join("config.json");
    std::fs::write(&resolved, config.to_json() + "\n")
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", resolved.display())))?;
    written.push("config.json".to_string());
    manifest::write_run_records(
        &out,
        name,
        &config,
        &inputs.listed(&config),
        &written,
        started.elapsed(),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::usage(
                e.to_string()
                    .lines()
                    .next()
                    .unwrap_or("invalid arguments")
                    .to_string(),
            );
            eprintln!("{}", err.record());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
