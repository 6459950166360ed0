//! Turning per-question outcomes into a score report.

use consensus_core::metrics::{
    bootstrap_ci, ece, auc_roc, flag_format_mismatch, mean_chain_length, stratify_by_agreement, MetricPoint,
};
use consensus_core::relation::{ExtractionScore, MatchRule};
use consensus_core::report::{ScoreReport, Table};
use consensus_core::routing::threshold_sweep;
use consensus_core::{AggregateDecision, CascadeOutcome, Routing};

use crate::config::RunConfig;
use crate::error::Result;

const CALIBRATION_BINS: usize = 10;

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn with_ci(config: &RunConfig, name: &str, values: &[f64]) -> Result<MetricPoint> {
    let ci = bootstrap_ci(values, config.bootstrap.iterations, config.bootstrap.level, config.seed)?;
    Ok(MetricPoint::point(name, mean(values), values.len()).with_ci(ci))
}

fn percent(name: &str, part: usize, whole: usize) -> MetricPoint {
    MetricPoint::point(name, 100.0 * part as f64 / whole.max(1) as f64, whole).with_decimals(1)
}

fn bools(values: impl Iterator<Item = bool>) -> Vec<f64> {
    values.map(|b| if b { 1.0 } else { 0.0 }).collect()
}

pub fn empty_report(config: &RunConfig, n: usize) -> ScoreReport {
    ScoreReport {
        task: config.task.to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        n,
        metrics: Vec::new(),
        tables: Vec::new(),
    }
}

/// EM, F1, oracle, agreement and parse statistics of voted decisions.
pub fn decisions(config: &RunConfig, decisions: &[AggregateDecision], with_strata: bool) -> Result<ScoreReport> {
    let n = decisions.len();
    let em: Vec<f64> = decisions.iter().map(AggregateDecision::em).collect();
    let f1: Vec<f64> = decisions.iter().map(AggregateDecision::f1).collect();
    let agreement: Vec<f64> = decisions.iter().map(AggregateDecision::agreement).collect();
    let samples = decisions.iter().map(|d| d.samples.len()).sum();
    let unparsed = decisions.iter().map(AggregateDecision::unparsed_count).sum();
    let mismatches = em.iter().zip(&f1).filter(|(e, f)| flag_format_mismatch(**e, **f)).count();

    let mut report = empty_report(config, n);
    report.metrics = vec![
        with_ci(config, "EM", &em)?,
        with_ci(config, "F1", &f1)?,
        with_ci(config, "Oracle", &bools(decisions.iter().map(|d| d.oracle_hit)))?,
        MetricPoint::point("Agreement", mean(&agreement), n),
        percent("Unparsed (%)", unparsed, samples),
        MetricPoint::point("Mean chain length", mean_chain_length(decisions.iter().flat_map(|d| &d.samples)), samples)
            .with_decimals(2),
        MetricPoint::point("Format mismatches", mismatches as f64, n).with_decimals(0),
    ];
    if with_strata {
        let correct: Vec<bool> = em.iter().map(|e| *e == 1.0).collect();
        report.metrics.push(MetricPoint::point("ECE (agreement)", ece(&agreement, &correct, CALIBRATION_BINS)?, n));
        if let Ok(auc) = auc_roc(&agreement, &correct) {
            report.metrics.push(MetricPoint::point("AUC (agreement)", auc, n));
        }
        let stated: Option<Vec<f64>> = decisions.iter().map(winner_confidence).collect();
        if let Some(stated) = stated {
            report.metrics.push(MetricPoint::point("ECE (self-reported)", ece(&stated, &correct, CALIBRATION_BINS)?, n));
        }
        push_strata(config, &mut report, decisions)?;
    }
    Ok(report)
}

/// Strata need open bounds; thresholds at 0 or 1 leave a stratum empty by construction.
fn push_strata(config: &RunConfig, report: &mut ScoreReport, decisions: &[AggregateDecision]) -> Result<()> {
    let t = config.thresholds;
    if t.theta_low > 0.0 && t.theta_high < 1.0 {
        report.tables.push(Table::strata(&stratify_by_agreement(decisions, (t.theta_low, t.theta_high))?));
    } else {
        tracing::warn!(theta_low = t.theta_low, theta_high = t.theta_high, "thresholds on the boundary, strata table skipped");
    }
    Ok(())
}

/// Mean stated confidence of the samples that voted for the winner.
fn winner_confidence(d: &AggregateDecision) -> Option<f64> {
    let winner = d.winner()?;
    let stated: Option<Vec<f64>> = d
        .samples
        .iter()
        .filter_map(|s| s.parsed())
        .filter(|p| consensus_core::normalize_answer(&p.answer) == winner)
        .map(|p| p.confidence)
        .collect();
    stated.filter(|v| !v.is_empty()).map(|v| mean(&v))
}

pub fn cascade(config: &RunConfig, outcomes: &[CascadeOutcome], random: bool) -> Result<ScoreReport> {
    let n = outcomes.len();
    let em: Vec<f64> = outcomes.iter().map(CascadeOutcome::em).collect();
    let f1: Vec<f64> = outcomes.iter().map(CascadeOutcome::f1).collect();
    let primary_em: Vec<f64> = outcomes.iter().map(|o| o.primary_decision.em()).collect();
    let count = |r: Routing| outcomes.iter().filter(|o| o.routing == r).count();

    let mut report = empty_report(config, n);
    report.metrics = vec![
        with_ci(config, "EM", &em)?,
        with_ci(config, "F1", &f1)?,
        with_ci(config, "Oracle", &bools(outcomes.iter().map(CascadeOutcome::oracle_hit)))?,
        MetricPoint::point("Agreement", mean(&outcomes.iter().map(CascadeOutcome::agreement).collect::<Vec<_>>()), n),
        MetricPoint::point("Primary-only EM", mean(&primary_em), n),
        percent("Rerouted (%)", count(Routing::Rerouted), n),
    ];
    if random {
        if let Some(f) = config.reroute_fraction {
            report.metrics.push(MetricPoint::point("Reroute probability", f, n));
        }
        return Ok(report);
    }
    report.metrics.insert(5, percent("Accepted (%)", count(Routing::Accepted), n));
    report.metrics.push(percent("Uncertain (%)", count(Routing::Uncertain), n));

    let mut routing = Table::new("Routing", &["Class", "N", "Share (%)", "EM"]);
    for r in [Routing::Accepted, Routing::Rerouted, Routing::Uncertain] {
        let class: Vec<f64> = outcomes.iter().filter(|o| o.routing == r).map(CascadeOutcome::em).collect();
        routing.push(vec![
            r.as_str().to_string(),
            class.len().to_string(),
            format!("{:.1}", 100.0 * class.len() as f64 / n.max(1) as f64),
            if class.is_empty() { "-".into() } else { format!("{:.3}", mean(&class)) },
        ]);
    }
    report.tables.push(routing);
    let primaries: Vec<AggregateDecision> = outcomes.iter().map(|o| o.primary_decision.clone()).collect();
    push_strata(config, &mut report, &primaries)?;
    Ok(report)
}

pub fn sweep(config: &RunConfig, points: &[(AggregateDecision, Option<AggregateDecision>)]) -> Result<ScoreReport> {
    let n = points.len();
    let primaries: Vec<AggregateDecision> = points.iter().map(|(p, _)| p.clone()).collect();
    let lookup = |p: &AggregateDecision| {
        points
            .iter()
            .find(|(q, _)| q.question_id == p.question_id)
            .and_then(|(_, s)| s.clone())
            .expect("secondary recorded for every question inside the swept band")
    };
    let rows = threshold_sweep(&primaries, config.thresholds.theta_low, &config.sweep_theta_high, lookup)?;
    let oracle = bools(points.iter().map(|(p, s)| {
        p.oracle_hit || s.as_ref().is_some_and(|s| s.oracle_hit)
    }));
    let mut report = empty_report(config, n);
    report.metrics = vec![
        MetricPoint::point("Primary-only EM", mean(&primaries.iter().map(AggregateDecision::em).collect::<Vec<_>>()), n),
        MetricPoint::point("Oracle", mean(&oracle), n),
    ];
    report.tables.push(Table::threshold_sweep(&rows));
    Ok(report)
}

pub fn extraction(config: &RunConfig, score: &ExtractionScore) -> Result<ScoreReport> {
    let n = score.n_instances;
    let [p_ci, r_ci, f_ci] = score.bootstrap(config.bootstrap.iterations, config.bootstrap.level, config.seed)?;
    let mut report = empty_report(config, n);
    if let Some(p) = score.precision {
        report.metrics.push(MetricPoint::point("Precision", p, score.n_parsed).with_ci(p_ci).with_decimals(4));
    }
    report.metrics.extend([
        MetricPoint::point("Recall", score.recall, n).with_ci(r_ci).with_decimals(4),
        MetricPoint::point("F1", score.f1, n).with_ci(f_ci).with_decimals(4),
        percent("Unparsed (%)", score.n_unparsed, n),
    ]);
    let mut rules = Table::new("Matches by rule", &["Rule", "Matches"]);
    for (rule, name) in MatchRule::ALL.into_iter().zip(["code resolution", "normalized", "lexical", "synonym group"]) {
        let count = score.rule_counts[usize::from(rule.id()) - 1];
        rules.push(vec![format!("{} ({name})", rule.id()), count.to_string()]);
    }
    report.tables.push(rules);
    Ok(report)
}
