//! Declarative run configuration (TOML or JSON).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use consensus_core::footprint::FootprintInput;
use consensus_core::pareto::ScenarioPoint;
use consensus_core::report::ReportFormat;
use consensus_core::RoutingThresholds;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, RunError};
use crate::gateway::{EndpointSpec, RetryPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MultihopZeroshot,
    SelfConsistency,
    Cascade,
    RandomCascade,
    ThresholdSweep,
    ExtractionScore,
    Cluster,
    Variance,
    Footprint,
    Pareto,
    Report,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::MultihopZeroshot,
        Task::SelfConsistency,
        Task::Cascade,
        Task::RandomCascade,
        Task::ThresholdSweep,
        Task::ExtractionScore,
        Task::Cluster,
        Task::Variance,
        Task::Footprint,
        Task::Pareto,
        Task::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::MultihopZeroshot => "multihop-zeroshot",
            Task::SelfConsistency => "self-consistency",
            Task::Cascade => "cascade",
            Task::RandomCascade => "random-cascade",
            Task::ThresholdSweep => "threshold-sweep",
            Task::ExtractionScore => "extraction-score",
            Task::Cluster => "cluster",
            Task::Variance => "variance",
            Task::Footprint => "footprint",
            Task::Pareto => "pareto",
            Task::Report => "report",
        }
    }

    /// Tasks that query models once per dataset record.
    pub fn is_per_question(self) -> bool {
        matches!(
            self,
            Task::MultihopZeroshot
                | Task::SelfConsistency
                | Task::Cascade
                | Task::RandomCascade
                | Task::ThresholdSweep
                | Task::ExtractionScore
        )
    }

    fn needs_secondary(self) -> bool {
        matches!(self, Task::Cascade | Task::RandomCascade | Task::ThresholdSweep)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| RunError::Config(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { iterations: 1000, level: 0.95 }
    }
}

fn default_seed() -> u64 {
    42
}
fn default_runs() -> usize {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_sweep() -> Vec<f64> {
    vec![0.4, 0.6, 0.8, 1.0]
}
fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Markdown, ReportFormat::Json]
}
fn default_k_range() -> (usize, usize) {
    (2, 20)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub endpoints: Vec<EndpointSpec>,
    /// Samples per question; tasks pick their own default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub thresholds: RoutingThresholds,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_runs")]
    pub runs: usize,

    /// Endpoint names; the first and second endpoints when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<String>,
    /// Random-cascade reroute probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reroute_fraction: Option<f64>,
    #[serde(default = "default_sweep")]
    pub sweep_theta_high: Vec<f64>,
    /// Inner task repeated by `variance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_task: Option<Task>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcode_path: Option<PathBuf>,
    /// Score these predictions instead of querying a model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion_path: Option<PathBuf>,
    #[serde(default = "default_k_range")]
    pub cluster_k: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<ScenarioPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint: Option<FootprintInput>,
    /// A `summary.json` to re-render.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_path: Option<PathBuf>,

    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub k: Option<usize>,
    pub temperature: Option<f64>,
    pub theta_low: Option<f64>,
    pub theta_high: Option<f64>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub backend: Option<String>,
    pub output_dir: Option<PathBuf>,
}

/// Reference footprint inputs: 350 W for 4.5 h at PUE 1.0 and 57 g/kWh.
pub fn reference_footprint() -> FootprintInput {
    FootprintInput { power_w: 350.0, duration_h: 4.5, pue: 1.0, carbon_intensity_g_per_kwh: 57.0 }
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        serde_json::from_value(serde_json::json!({ "task": task })).expect("defaults deserialize")
    }

    /// Parse by extension (`.json`, otherwise TOML); relative paths are
    /// taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.dataset_path,
            &mut self.dictionary_path,
            &mut self.pcode_path,
            &mut self.predictions_path,
            &mut self.confusion_path,
            &mut self.points_path,
            &mut self.summary_path,
            &mut self.replay_dir,
            &mut self.record_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.task {
            self.task = t;
        }
        if o.k.is_some() {
            self.k = o.k;
        }
        if o.temperature.is_some() {
            self.temperature = o.temperature;
        }
        if let Some(l) = o.theta_low {
            self.thresholds.theta_low = l;
        }
        if let Some(h) = o.theta_high {
            self.thresholds.theta_high = h;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(r) = o.runs {
            self.runs = r;
        }
        if let Some(b) = &o.backend {
            for e in &mut self.endpoints {
                e.base_url = b.clone();
                e.base_url_env = None;
            }
        }
        if let Some(out) = &o.output_dir {
            self.output_dir = out.clone();
        }
    }

    /// Short digest of everything except the output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..12].to_string()
    }

    pub fn samples_per_question(&self) -> usize {
        self.k.unwrap_or(match self.task {
            Task::MultihopZeroshot | Task::ExtractionScore => 1,
            _ => 5,
        })
    }

    /// Zero-shot tasks keep the endpoint temperature; sampling tasks use 0.7.
    pub fn sampling_temperature(&self, endpoint: &EndpointSpec) -> f64 {
        self.temperature.unwrap_or(match self.task {
            Task::MultihopZeroshot | Task::ExtractionScore => endpoint.options.temperature,
            _ => 0.7,
        })
    }

    pub fn primary_endpoint(&self) -> Result<&EndpointSpec> {
        self.named_endpoint(self.primary.as_deref(), 0)
    }

    pub fn secondary_endpoint(&self) -> Result<&EndpointSpec> {
        self.named_endpoint(self.secondary.as_deref(), 1)
    }

    fn named_endpoint(&self, name: Option<&str>, position: usize) -> Result<&EndpointSpec> {
        match name {
            Some(n) => self.endpoints.iter().find(|e| e.name == n),
            None => self.endpoints.get(position),
        }
        .ok_or_else(|| {
            RunError::Config(match name {
                Some(n) => format!("no endpoint named `{n}`"),
                None => format!("task `{}` needs at least {} endpoint(s)", self.task, position + 1),
            })
        })
    }

    pub fn footprint_input(&self) -> FootprintInput {
        self.footprint.unwrap_or_else(reference_footprint)
    }

    fn require(&self, field: &Option<PathBuf>, name: &str) -> Result<()> {
        if field.is_none() {
            return Err(RunError::Config(format!("task `{}` needs `{name}`", self.task)));
        }
        Ok(())
    }

    /// Task-specific checks, run before any work starts.
    pub fn validate(&self) -> Result<()> {
        RoutingThresholds::new(self.thresholds.theta_low, self.thresholds.theta_high)?;
        if self.runs == 0 {
            return Err(RunError::Config("`runs` must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(RunError::Config("`k` must be at least 1".into()));
        }
        if self.temperature.is_some_and(|t| !(t >= 0.0)) {
            return Err(RunError::Config("`temperature` must be nonnegative".into()));
        }
        if self.formats.is_empty() {
            return Err(RunError::Config("`formats` must name at least one format".into()));
        }
        let mut names: Vec<&str> = self.endpoints.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(RunError::Config(format!("endpoint name `{}` is used twice", w[0])));
        }
        for e in &self.endpoints {
            if !(e.timeout_s > 0.0) {
                return Err(RunError::Config(format!("endpoint `{}`: timeout_s must be positive", e.name)));
            }
            let o = &e.options;
            if !(o.temperature >= 0.0) || !(o.top_p > 0.0 && o.top_p <= 1.0) {
                return Err(RunError::Config(format!("endpoint `{}`: temperature or top_p out of range", e.name)));
            }
        }
        match self.task {
            Task::ExtractionScore => {
                self.require(&self.dataset_path, "dataset_path")?;
                if self.predictions_path.is_none() {
                    self.primary_endpoint()?;
                }
            }
            t if t.is_per_question() => {
                self.require(&self.dataset_path, "dataset_path")?;
                self.primary_endpoint()?;
                if t.needs_secondary() {
                    self.secondary_endpoint()?;
                }
                if let Some(f) = self.reroute_fraction {
                    if !(0.0..=1.0).contains(&f) {
                        return Err(RunError::Config("`reroute_fraction` must lie in [0, 1]".into()));
                    }
                }
                if t == Task::ThresholdSweep {
                    if self.sweep_theta_high.is_empty() {
                        return Err(RunError::Config("`sweep_theta_high` is empty".into()));
                    }
                    let low = self.thresholds.theta_low;
                    if let Some(h) = self.sweep_theta_high.iter().find(|h| !(low <= **h && **h <= 1.0)) {
                        return Err(RunError::Config(format!("sweep value {h} lies outside [theta_low, 1]")));
                    }
                }
            }
            Task::Cluster => {
                self.require(&self.confusion_path, "confusion_path")?;
                let (lo, hi) = self.cluster_k;
                if lo < 2 || hi < lo {
                    return Err(RunError::Config("`cluster_k` must be (min, max) with 2 <= min <= max".into()));
                }
            }
            Task::Variance => {
                let inner = self.variance_task.unwrap_or(Task::SelfConsistency);
                if !inner.is_per_question() {
                    return Err(RunError::Config(format!("variance cannot repeat task `{inner}`")));
                }
                let mut c = self.clone();
                c.task = inner;
                c.validate()?;
            }
            Task::Footprint => self.footprint_input().validate()?,
            Task::Pareto => {
                if self.points.is_empty() && self.points_path.is_none() {
                    return Err(RunError::Config("task `pareto` needs `points` or `points_path`".into()));
                }
                for p in &self.points {
                    p.validate()?;
                }
            }
            Task::Report => self.require(&self.summary_path, "summary_path")?,
            _ => unreachable!("per-question tasks handled above"),
        }
        Ok(())
    }
}
