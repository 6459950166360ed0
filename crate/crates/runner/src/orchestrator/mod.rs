//! Task dispatch, checkpointed per-question loops and report files.

pub mod checkpoint;
pub mod summarize;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use consensus_core::cluster::{mean_jaccard, select_k, symmetrize};
use consensus_core::footprint::co2_estimate;
use consensus_core::pareto::{pareto_mask, ScenarioPoint};
use consensus_core::relation::{
    build_confusion, score_extraction, RelationLabels, RelationPrediction, SynonymDictionary,
};
use consensus_core::report::{render_report, ReportFormat, ScoreReport, Table};
use consensus_core::routing::cost_matched_reroutes;
use consensus_core::{route, AggregateDecision, CascadeOutcome, Routing};
use serde::Serialize;

use crate::config::{RunConfig, Task};
use crate::dataset::{load_instances, load_predictions, load_questions, QuestionRecord};
use crate::error::{Result, RunError};
use crate::formats::{read_confusion, read_dictionary, read_pcodes, read_points, render_assignment, render_dictionary, write_confusion};
use crate::gateway::{Gateway, GatewaySettings, GenerationOptions};
use crate::pipeline::{self, Outcome, Sampling};
use checkpoint::{Checkpoint, OutcomeLine, OutcomeLog};

pub const RUN_CONFIG_FILE: &str = "run-config.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";

/// Test and CLI controls that are not part of the configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunHooks {
    /// Stop with [`RunError::Interrupted`] after this many new questions.
    pub stop_after: Option<usize>,
    /// Discard any existing checkpoint instead of resuming it.
    pub fresh: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: ScoreReport,
    pub files: Vec<PathBuf>,
    pub output_dir: PathBuf,
}

pub fn run_task(config: &RunConfig) -> Result<RunSummary> {
    run_with(config, &RunHooks::default())
}

/// Continue the run stored in `dir`. A `config` that differs from the one
/// that produced the checkpoint is rejected.
pub fn resume(dir: &Path, config: Option<&RunConfig>, hooks: &RunHooks) -> Result<RunSummary> {
    let mut config = match config {
        Some(c) => c.clone(),
        None => {
            let path = dir.join(RUN_CONFIG_FILE);
            let text = fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        }
    };
    config.output_dir = dir.to_path_buf();
    run_with(&config, &RunHooks { fresh: false, ..*hooks })
}

pub fn run_with(config: &RunConfig, hooks: &RunHooks) -> Result<RunSummary> {
    config.validate()?;
    let dir = config.output_dir.clone();
    create_dir(&dir)?;
    write_file(&dir.join(RUN_CONFIG_FILE), &pretty(config))?;
    let started = Instant::now();
    let mut files = Vec::new();
    let report = match config.task {
        t if t.is_per_question() => per_question(config, hooks, &dir, &mut files)?,
        Task::Variance => variance(config, hooks, &dir)?,
        Task::Cluster => cluster(config, &dir, &mut files)?,
        Task::Footprint => footprint(config),
        Task::Pareto => pareto(config)?,
        Task::Report => {
            let path = config.summary_path.as_ref().expect("validated");
            let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        }
        _ => unreachable!("every task is dispatched"),
    };
    files.extend(write_reports(config, &report, &dir)?);
    let timing = Timing {
        wall_clock_s: Checkpoint::load(&dir)?.map_or(started.elapsed().as_secs_f64(), |c| c.wall_clock_s),
        footprint: config.footprint_input(),
    };
    let timing_path = dir.join(TIMING_FILE);
    write_file(&timing_path, &pretty(&timing))?;
    files.push(timing_path);
    Ok(RunSummary { report, files, output_dir: dir })
}

#[derive(Serialize)]
struct Timing {
    wall_clock_s: f64,
    footprint: consensus_core::footprint::FootprintInput,
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| RunError::io(path, e))
}

/// `summary.json` plus one timestamped file per requested format.
fn write_reports(config: &RunConfig, report: &ScoreReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = dir.join(SUMMARY_FILE);
    write_file(&summary, &render_report(report, ReportFormat::Json)?)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let mut files = vec![summary];
    for format in &config.formats {
        let path = dir.join(format!("{}-{stamp}-{}.{}", config.task, report.config_hash, format.extension()));
        write_file(&path, &render_report(report, *format)?)?;
        files.push(path);
    }
    Ok(files)
}

/// Evaluate every id not yet in the checkpoint, persisting each outcome
/// before moving on, then return all outcomes in `ids` order.
fn checkpointed<F>(config: &RunConfig, hooks: &RunHooks, dir: &Path, ids: &[String], mut eval: F) -> Result<Vec<Outcome>>
where
    F: FnMut(usize) -> Result<Outcome>,
{
    create_dir(dir)?;
    let hash = config.hash();
    let mut cp = match Checkpoint::load(dir)? {
        Some(_) if hooks.fresh => Checkpoint::new(&hash),
        Some(cp) if cp.config_hash != hash => {
            return Err(RunError::StaleCheckpoint { dir: dir.to_path_buf(), expected: hash, found: cp.config_hash })
        }
        Some(cp) => cp,
        None => Checkpoint::new(&hash),
    };
    let mut log = OutcomeLog::open(dir, cp.outcomes_offset)?;
    let done: BTreeSet<String> = cp.completed_question_ids.iter().cloned().collect();
    if !done.is_empty() {
        tracing::info!(dir = %dir.display(), completed = done.len(), total = ids.len(), "resuming");
    }
    let started = Instant::now();
    let wall_before = cp.wall_clock_s;
    let mut processed = 0;
    for (i, id) in ids.iter().enumerate() {
        if done.contains(id) {
            continue;
        }
        if hooks.stop_after == Some(processed) {
            return Err(RunError::Interrupted(processed));
        }
        let outcome = eval(i)?;
        cp.outcomes_offset = log.append(&OutcomeLine { id: id.clone(), outcome })?;
        cp.completed_question_ids.push(id.clone());
        cp.wall_clock_s = wall_before + started.elapsed().as_secs_f64();
        cp.save(dir)?;
        processed += 1;
        tracing::debug!(id, done = cp.completed_question_ids.len(), total = ids.len(), "question complete");
    }
    if ids.is_empty() {
        cp.save(dir)?;
    }
    let mut by_id: BTreeMap<String, Outcome> =
        OutcomeLog::read_all(dir)?.into_iter().map(|l| (l.id, l.outcome)).collect();
    ids.iter()
        .map(|id| {
            by_id.remove(id).ok_or_else(|| RunError::Config(format!("{}: no outcome recorded for `{id}`", dir.display())))
        })
        .collect()
}

fn gateway(config: &RunConfig, golds: BTreeMap<String, String>) -> Result<Gateway> {
    let settings = GatewaySettings {
        retry: config.retry,
        workers: config.workers,
        replay_dir: config.replay_dir.clone(),
        record_dir: config.record_dir.clone(),
        golds,
    };
    let gw = Gateway::new(&config.endpoints, settings)?;
    gw.probe()?;
    Ok(gw)
}

fn sampling<'a>(config: &'a RunConfig, endpoint: &'a crate::gateway::EndpointSpec) -> Sampling<'a> {
    Sampling {
        endpoint: &endpoint.name,
        k: config.samples_per_question(),
        temperature: config.sampling_temperature(endpoint),
        seed_base: config.seed,
    }
}

fn per_question(config: &RunConfig, hooks: &RunHooks, dir: &Path, files: &mut Vec<PathBuf>) -> Result<ScoreReport> {
    if config.task == Task::ExtractionScore {
        return extraction(config, hooks, dir, files);
    }
    let records = load_questions(config.dataset_path.as_ref().expect("validated"))?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let golds = records.iter().map(|r| (r.id.clone(), r.gold.clone())).collect();
    let gw = gateway(config, golds)?;
    let primary = config.primary_endpoint()?;
    let p = sampling(config, primary);
    let secondary = || config.secondary_endpoint().map(|s| sampling(config, s));

    match config.task {
        Task::MultihopZeroshot | Task::SelfConsistency => {
            let outcomes = checkpointed(config, hooks, dir, &ids, |i| {
                Ok(Outcome::Decision(pipeline::self_consistency(&gw, &records[i], p)?))
            })?;
            let decisions: Vec<AggregateDecision> = outcomes.into_iter().filter_map(as_decision).collect();
            summarize::decisions(config, &decisions, config.task == Task::SelfConsistency)
        }
        Task::Cascade => {
            let s = secondary()?;
            let outcomes = checkpointed(config, hooks, dir, &ids, |i| {
                Ok(Outcome::Cascade(pipeline::cascade(&gw, &records[i], p, s, &config.thresholds)?))
            })?;
            summarize::cascade(config, &outcomes.into_iter().filter_map(as_cascade).collect::<Vec<_>>(), false)
        }
        Task::RandomCascade => {
            let s = secondary()?;
            random_cascade(config, hooks, dir, &gw, &records, &ids, p, s)
        }
        Task::ThresholdSweep => {
            let s = secondary()?;
            let max_high = config.sweep_theta_high.iter().copied().fold(config.thresholds.theta_low, f64::max);
            let outcomes = checkpointed(config, hooks, dir, &ids, |i| {
                Ok(pipeline::sweep_point(&gw, &records[i], p, s, config.thresholds.theta_low, max_high)?)
            })?;
            let points: Vec<_> = outcomes
                .into_iter()
                .filter_map(|o| match o {
                    Outcome::Sweep { primary, secondary } => Some((primary, secondary)),
                    _ => None,
                })
                .collect();
            summarize::sweep(config, &points)
        }
        _ => unreachable!("per-question tasks only"),
    }
}

fn as_decision(o: Outcome) -> Option<AggregateDecision> {
    match o {
        Outcome::Decision(d) => Some(d),
        _ => None,
    }
}

fn as_cascade(o: Outcome) -> Option<CascadeOutcome> {
    match o {
        Outcome::Cascade(c) => Some(c),
        _ => None,
    }
}

/// Primary pass first (checkpointed in `primary/`), then reroute either
/// by a per-question coin flip with `reroute_fraction`, or, when no
/// fraction is configured, exactly as many random questions as the
/// agreement cascade would reroute.
#[allow(clippy::too_many_arguments)]
fn random_cascade(
    config: &RunConfig,
    hooks: &RunHooks,
    dir: &Path,
    gw: &Gateway,
    records: &[QuestionRecord],
    ids: &[String],
    p: Sampling<'_>,
    s: Sampling<'_>,
) -> Result<ScoreReport> {
    let primary_dir = dir.join("primary");
    let mut budget = hooks.stop_after;
    let phase_hooks = RunHooks { stop_after: budget, ..*hooks };
    let primaries: Vec<AggregateDecision> = checkpointed(config, &phase_hooks, &primary_dir, ids, |i| {
        if let Some(b) = budget.as_mut() {
            *b = b.saturating_sub(1);
        }
        Ok(Outcome::Decision(pipeline::self_consistency(gw, &records[i], p)?))
    })?
    .into_iter()
    .filter_map(as_decision)
    .collect();
    let chosen: BTreeSet<String> = match config.reroute_fraction {
        Some(f) => ids
            .iter()
            .filter(|id| consensus_core::routing::random_reroute(id, f, config.seed))
            .cloned()
            .collect(),
        None => {
            let count = primaries
                .iter()
                .filter(|d| route(d.agreement(), &config.thresholds) == Routing::Rerouted)
                .count();
            cost_matched_reroutes(ids, count, config.seed)
        }
    };
    let phase_hooks = RunHooks { stop_after: budget, ..*hooks };
    let outcomes = checkpointed(config, &phase_hooks, dir, ids, |i| {
        let first = primaries[i].clone();
        let reroute = chosen.contains(&ids[i]);
        let second = if reroute { Some(pipeline::self_consistency(gw, &records[i], s)?) } else { None };
        Ok(Outcome::Cascade(CascadeOutcome::forced(first, reroute, |_| {
            second.expect("rerouted question has a secondary decision")
        })))
    })?;
    summarize::cascade(config, &outcomes.into_iter().filter_map(as_cascade).collect::<Vec<_>>(), true)
}

/// Label vocabulary with the built-in codes plus any configured code table.
fn labels(config: &RunConfig) -> Result<RelationLabels> {
    let base = RelationLabels::default();
    let Some(path) = &config.pcode_path else {
        return Ok(base);
    };
    let mut codes: Vec<(String, String)> = base.codes().map(|(c, l)| (c.to_string(), l.to_string())).collect();
    codes.extend(read_pcodes(path)?);
    Ok(base.with_codes(codes))
}

fn dictionary(config: &RunConfig) -> Result<SynonymDictionary> {
    Ok(match &config.dictionary_path {
        Some(p) => read_dictionary(p)?,
        None => SynonymDictionary::seed(),
    })
}

fn extraction(config: &RunConfig, hooks: &RunHooks, dir: &Path, files: &mut Vec<PathBuf>) -> Result<ScoreReport> {
    let instances = load_instances(config.dataset_path.as_ref().expect("validated"))?;
    let predictions = match &config.predictions_path {
        Some(path) => load_predictions(path)?,
        None => {
            let endpoint = config.primary_endpoint()?;
            let options = GenerationOptions {
                temperature: config.sampling_temperature(endpoint),
                max_new_tokens: GenerationOptions::extraction().max_new_tokens,
                ..endpoint.options
            };
            let golds = instances.iter().map(|i| (i.doc_id.clone(), i.gold_relation.clone())).collect();
            let gw = gateway(config, golds)?;
            let ids: Vec<String> = instances.iter().map(|i| i.doc_id.clone()).collect();
            let outcomes = checkpointed(config, hooks, dir, &ids, |i| {
                Ok(pipeline::extract_relation(&gw, &instances[i], &endpoint.name, options)?)
            })?;
            let predictions: Vec<RelationPrediction> = outcomes
                .into_iter()
                .filter_map(|o| match o {
                    Outcome::Extraction { prediction, .. } => Some(prediction),
                    _ => None,
                })
                .collect();
            let path = dir.join("predictions.jsonl");
            let lines: String = predictions.iter().map(|p| serde_json::to_string(p).expect("serializes") + "\n").collect();
            write_file(&path, &lines)?;
            files.push(path);
            predictions
        }
    };
    let labels = labels(config)?;
    let score = score_extraction(&instances, &predictions, &dictionary(config)?, &labels)?;
    let confusion = build_confusion(&instances, &predictions, &labels)?;
    let path = dir.join("confusion.csv");
    write_confusion(&path, &confusion.matrix)?;
    files.push(path);
    let mut report = summarize::extraction(config, &score)?;
    report.metrics.push(
        consensus_core::metrics::MetricPoint::point("Unresolved labels", confusion.unresolved as f64, score.n_instances)
            .with_decimals(0),
    );
    Ok(report)
}

fn cluster(config: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<ScoreReport> {
    let confusion = read_confusion(config.confusion_path.as_ref().expect("validated"))?;
    let affinity = symmetrize(&confusion);
    let (lo, hi) = config.cluster_k;
    let clustering = select_k(&affinity, lo..=hi.min(affinity.len()), config.seed)?;
    let n = affinity.len();
    let manual = dictionary(config)?;
    let mut report = summarize::empty_report(config, n);
    report.metrics = vec![
        consensus_core::metrics::MetricPoint::point("k", clustering.k as f64, n).with_decimals(0),
        consensus_core::metrics::MetricPoint::point("Silhouette", clustering.silhouette, n),
        consensus_core::metrics::MetricPoint::point("Mean Jaccard vs manual groups", mean_jaccard(&clustering, &manual)?, n),
    ];
    let found = clustering.to_dictionary("clusters");
    if let (Some(data), Some(preds)) = (&config.dataset_path, &config.predictions_path) {
        let instances = load_instances(data)?;
        let predictions = load_predictions(preds)?;
        let labels = labels(config)?;
        for (name, dict) in [("F1 (manual groups)", &manual), ("F1 (cluster groups)", &found)] {
            let s = score_extraction(&instances, &predictions, dict, &labels)?;
            report.metrics.push(consensus_core::metrics::MetricPoint::point(name, s.f1, s.n_instances).with_decimals(4));
        }
    }
    let mut groups = Table::new("Clusters", &["Cluster", "Labels"]);
    for (i, members) in clustering.clusters().iter().enumerate() {
        groups.push(vec![i.to_string(), members.join(" ")]);
    }
    report.tables.push(groups);
    for (name, contents) in [("clusters.csv", render_assignment(&clustering)), ("clusters.groups", render_dictionary(&found))] {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        files.push(path);
    }
    Ok(report)
}

/// Repeat the inner task `runs` times with seeds `seed + 1000 r`.
fn variance(config: &RunConfig, hooks: &RunHooks, dir: &Path) -> Result<ScoreReport> {
    let inner = config.variance_task.unwrap_or(Task::SelfConsistency);
    let mut reports = Vec::with_capacity(config.runs);
    let mut budget = hooks.stop_after;
    for r in 0..config.runs {
        let mut sub = config.clone();
        sub.task = inner;
        sub.runs = 1;
        sub.variance_task = None;
        sub.seed = config.seed + 1000 * r as u64;
        let sub_dir = dir.join(format!("run-{r}"));
        sub.output_dir = sub_dir.clone();
        let sub_hooks = RunHooks { stop_after: budget, ..*hooks };
        let before = Checkpoint::load(&sub_dir)?.map_or(0, |c| c.completed_question_ids.len());
        let report = match per_question(&sub, &sub_hooks, &sub_dir, &mut Vec::new()) {
            Err(RunError::Interrupted(n)) => {
                let spent = hooks.stop_after.zip(budget).map_or(0, |(all, left)| all - left);
                return Err(RunError::Interrupted(spent + n));
            }
            other => other?,
        };
        let after = Checkpoint::load(&sub_dir)?.map_or(0, |c| c.completed_question_ids.len());
        if let Some(b) = budget.as_mut() {
            *b = b.saturating_sub(after - before);
        }
        write_reports(&sub, &report, &sub_dir)?;
        reports.push(report);
    }
    let names: Vec<String> = reports[0]
        .metrics
        .iter()
        .map(|m| m.name.clone())
        .filter(|name| reports.iter().all(|r| r.metric(name).is_some()))
        .collect();
    let values: Vec<Vec<f64>> =
        reports.iter().map(|r| names.iter().map(|n| r.metric(n).expect("common metric").value).collect()).collect();
    let series = consensus_core::metrics::inter_run_stats(&names, &values)?;
    let mut report = summarize::empty_report(config, reports[0].n);
    report.metrics = series
        .iter()
        .zip(&reports[0].metrics.iter().filter(|m| names.contains(&m.name)).collect::<Vec<_>>())
        .flat_map(|(s, m)| {
            [
                consensus_core::metrics::MetricPoint::point(format!("{} (mean)", s.metric), s.mean, config.runs)
                    .with_decimals(m.decimals),
                consensus_core::metrics::MetricPoint::point(format!("{} (sigma)", s.metric), s.sigma, config.runs)
                    .with_decimals(m.decimals),
            ]
        })
        .collect();
    report.tables.push(Table::variance(&series));
    Ok(report)
}

fn footprint(config: &RunConfig) -> ScoreReport {
    let input = config.footprint_input();
    let mut report = summarize::empty_report(config, 1);
    report.metrics = vec![
        consensus_core::metrics::MetricPoint::point("CO2 (kg)", co2_estimate(&input), 1).with_decimals(4),
        consensus_core::metrics::MetricPoint::point("Energy (kWh)", input.power_w * input.duration_h * input.pue / 1000.0, 1)
            .with_decimals(4),
    ];
    report
}

fn pareto(config: &RunConfig) -> Result<ScoreReport> {
    let mut points: Vec<ScenarioPoint> = config.points.clone();
    if let Some(path) = &config.points_path {
        points.extend(read_points(path)?);
    }
    let mask = pareto_mask(&points);
    let mut report = summarize::empty_report(config, points.len());
    report.metrics = vec![consensus_core::metrics::MetricPoint::point(
        "Frontier size",
        mask.iter().filter(|m| **m).count() as f64,
        points.len(),
    )
    .with_decimals(0)];
    report.tables.push(Table::pareto(&points));
    Ok(report)
}
