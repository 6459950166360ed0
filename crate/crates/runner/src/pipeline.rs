//! Per-question evaluation on top of the gateway.

use consensus_core::relation::{RelationInstance, RelationPrediction};
use consensus_core::{route, AggregateDecision, CascadeOutcome, Routing, RoutingThresholds, SampleResponse};
use serde::{Deserialize, Serialize};

use crate::dataset::QuestionRecord;
use crate::gateway::{Gateway, GatewayError, GenerationOptions};
use crate::prompts::PromptBundle;

/// How one stage samples a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling<'a> {
    pub endpoint: &'a str,
    pub k: usize,
    pub temperature: f64,
    pub seed_base: u64,
}

/// What a run records for each question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Decision(AggregateDecision),
    Cascade(CascadeOutcome),
    /// Primary pass plus the secondary decision whenever some swept
    /// threshold could reroute the question.
    Sweep { primary: AggregateDecision, secondary: Option<AggregateDecision> },
    Extraction { prediction: RelationPrediction, sample: SampleResponse },
}

/// Majority vote over `k` samples from one model.
pub fn self_consistency(
    gateway: &Gateway,
    record: &QuestionRecord,
    s: Sampling<'_>,
) -> Result<AggregateDecision, GatewayError> {
    let samples = gateway.sample_k(&PromptBundle::multihop(record), s.endpoint, s.k, s.temperature, s.seed_base)?;
    Ok(AggregateDecision::from_samples(&record.id, &record.gold, samples))
}

/// Agreement-routed two-stage answer; the secondary model is only called
/// for rerouted questions.
pub fn cascade(
    gateway: &Gateway,
    record: &QuestionRecord,
    primary: Sampling<'_>,
    secondary: Sampling<'_>,
    thresholds: &RoutingThresholds,
) -> Result<CascadeOutcome, GatewayError> {
    let first = self_consistency(gateway, record, primary)?;
    let second = match route(first.agreement(), thresholds) {
        Routing::Rerouted => Some(self_consistency(gateway, record, secondary)?),
        _ => None,
    };
    Ok(CascadeOutcome::route_primary(first, thresholds, |_| second.expect("rerouted question has a secondary decision")))
}

/// Baseline that reroutes by a seeded coin flip instead of agreement.
pub fn random_cascade(
    gateway: &Gateway,
    record: &QuestionRecord,
    primary: Sampling<'_>,
    secondary: Sampling<'_>,
    fraction: f64,
    seed: u64,
) -> Result<CascadeOutcome, GatewayError> {
    let first = self_consistency(gateway, record, primary)?;
    let reroute = consensus_core::routing::random_reroute(&record.id, fraction, seed);
    let second = if reroute { Some(self_consistency(gateway, record, secondary)?) } else { None };
    Ok(CascadeOutcome::forced(first, reroute, |_| second.expect("rerouted question has a secondary decision")))
}

/// Primary pass for a threshold sweep; the secondary runs when the
/// agreement falls in `[theta_low, max_high)`.
pub fn sweep_point(
    gateway: &Gateway,
    record: &QuestionRecord,
    primary: Sampling<'_>,
    secondary: Sampling<'_>,
    theta_low: f64,
    max_high: f64,
) -> Result<Outcome, GatewayError> {
    let first = self_consistency(gateway, record, primary)?;
    let a = first.agreement();
    let second = if a >= theta_low && a < max_high { Some(self_consistency(gateway, record, secondary)?) } else { None };
    Ok(Outcome::Sweep { primary: first, secondary: second })
}

/// One relation prediction; an unparsed reply predicts nothing.
pub fn extract_relation(
    gateway: &Gateway,
    instance: &RelationInstance,
    endpoint: &str,
    options: GenerationOptions,
) -> Result<Outcome, GatewayError> {
    let sample = gateway.generate_with(&PromptBundle::extraction(instance), endpoint, options, 0)?;
    let parsed = sample.parsed();
    let prediction = RelationPrediction {
        doc_id: instance.doc_id.clone(),
        predicted_relation: parsed.map(|p| p.relation.clone().unwrap_or_else(|| p.answer.clone())),
        confidence: parsed.and_then(|p| p.confidence),
    };
    Ok(Outcome::Extraction { prediction, sample })
}
