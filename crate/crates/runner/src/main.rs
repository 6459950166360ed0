use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use consensus_core::footprint::FootprintInput;
use consensus_core::report::{render_report, ReportFormat};
use consensus_runner::config::{reference_footprint, Overrides, RunConfig, Task};
use consensus_runner::orchestrator::{self, RunHooks, RunSummary};
use consensus_runner::{Result, RunError};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "consensus", version, about = "Agreement-based aggregation and cascades over local LLM endpoints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task named in the config (or by --task).
    Run {
        #[command(flatten)]
        common: Common,
        /// Ignore an existing checkpoint in the output directory.
        #[arg(long)]
        fresh: bool,
    },
    /// Continue an interrupted run from its output directory.
    Resume {
        dir: PathBuf,
        /// Config to check against the checkpoint; defaults to the stored one.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score relation predictions (extraction-score).
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
    },
    /// Threshold sensitivity of the cascade (threshold-sweep).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated upper thresholds.
        #[arg(long, value_delimiter = ',')]
        theta_high_values: Vec<f64>,
    },
    /// Spectral clustering of a confusion matrix.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        confusion: Option<PathBuf>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
    },
    /// Cost/accuracy Pareto frontier of scenario points.
    Pareto {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Carbon estimate of a run.
    Footprint {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        power_w: Option<f64>,
        #[arg(long)]
        hours: Option<f64>,
        #[arg(long)]
        pue: Option<f64>,
        #[arg(long)]
        grams_per_kwh: Option<f64>,
    },
    /// Re-render a summary.json in other formats.
    Report {
        #[command(flatten)]
        common: Common,
        summary: Option<PathBuf>,
        /// Comma-separated formats: markdown, csv, json.
        #[arg(long, value_delimiter = ',')]
        format: Vec<ReportFormat>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    theta_low: Option<f64>,
    #[arg(long)]
    theta_high: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base URL for every endpoint (`sim`, `replay` or `http://host:port`).
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    /// File values, then flags; `default_task` applies only without a file.
    fn load(&self, default_task: Task) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::new(default_task),
        };
        config.apply(&Overrides {
            task: self.task,
            k: self.k,
            temperature: self.temperature,
            theta_low: self.theta_low,
            theta_high: self.theta_high,
            seed: self.seed,
            runs: self.runs,
            backend: self.backend.clone(),
            output_dir: self.out.clone(),
        });
        Ok(config)
    }
}

fn forced(common: &Common, task: Task) -> Result<RunConfig> {
    let mut config = common.load(task)?;
    config.task = common.task.unwrap_or(task);
    Ok(config)
}

fn execute(command: Command) -> Result<RunSummary> {
    let hooks = RunHooks::default();
    match command {
        Command::Run { common, fresh } => {
            if common.config.is_none() && common.task.is_none() {
                return Err(RunError::Config("`run` needs --config or --task".into()));
            }
            let config = common.load(common.task.unwrap_or(Task::SelfConsistency))?;
            orchestrator::run_with(&config, &RunHooks { fresh, ..hooks })
        }
        Command::Resume { dir, config } => {
            let config = config.map(|p| RunConfig::load(&p)).transpose()?;
            orchestrator::resume(&dir, config.as_ref(), &hooks)
        }
        Command::Score { common, dataset, predictions, dictionary } => {
            let mut config = forced(&common, Task::ExtractionScore)?;
            config.dataset_path = dataset.or(config.dataset_path);
            config.predictions_path = predictions.or(config.predictions_path);
            config.dictionary_path = dictionary.or(config.dictionary_path);
            orchestrator::run_with(&config, &hooks)
        }
        Command::Sweep { common, theta_high_values } => {
            let mut config = forced(&common, Task::ThresholdSweep)?;
            if !theta_high_values.is_empty() {
                config.sweep_theta_high = theta_high_values;
            }
            orchestrator::run_with(&config, &hooks)
        }
        Command::Cluster { common, confusion, dictionary } => {
            let mut config = forced(&common, Task::Cluster)?;
            config.confusion_path = confusion.or(config.confusion_path);
            config.dictionary_path = dictionary.or(config.dictionary_path);
            orchestrator::run_with(&config, &hooks)
        }
        Command::Pareto { common, points } => {
            let mut config = forced(&common, Task::Pareto)?;
            config.points_path = points.or(config.points_path);
            orchestrator::run_with(&config, &hooks)
        }
        Command::Footprint { common, power_w, hours, pue, grams_per_kwh } => {
            let mut config = forced(&common, Task::Footprint)?;
            let base = config.footprint.unwrap_or_else(reference_footprint);
            config.footprint = Some(FootprintInput {
                power_w: power_w.unwrap_or(base.power_w),
                duration_h: hours.unwrap_or(base.duration_h),
                pue: pue.unwrap_or(base.pue),
                carbon_intensity_g_per_kwh: grams_per_kwh.unwrap_or(base.carbon_intensity_g_per_kwh),
            });
            orchestrator::run_with(&config, &hooks)
        }
        Command::Report { common, summary, format } => {
            let mut config = forced(&common, Task::Report)?;
            config.summary_path = summary.or(config.summary_path);
            if !format.is_empty() {
                config.formats = format;
            }
            orchestrator::run_with(&config, &hooks)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("CONSENSUS_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(summary) => {
            match render_report(&summary.report, ReportFormat::Markdown) {
                Ok(text) => print!("{text}"),
                Err(e) => tracing::warn!("cannot render report: {e}"),
            }
            for f in &summary.files {
                tracing::info!(file = %f.display(), "written");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
