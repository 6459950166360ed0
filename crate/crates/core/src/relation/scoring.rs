use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::dictionary::SynonymDictionary;
use super::labels::RelationLabels;
use super::matching::{match_up_to, MatchRule};
use crate::metrics::bootstrap::bootstrap_statistic_ci;
use crate::{Error, Result};

/// One (head, tail) pair with its gold relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub doc_id: String,
    pub text: String,
    pub head: String,
    pub tail: String,
    pub gold_relation: String,
}

/// A model's relation for one instance; `predicted_relation` is `None`
/// when the output could not be parsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationPrediction {
    pub doc_id: String,
    pub predicted_relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub doc_id: String,
    /// A parsed prediction exists for this instance.
    pub predicted: bool,
    pub unparsed: bool,
    pub rule: Option<MatchRule>,
}

impl InstanceOutcome {
    pub fn matched(&self) -> bool {
        self.rule.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionScore {
    /// Undefined when no prediction parsed.
    pub precision: Option<f64>,
    pub recall: f64,
    pub f1: f64,
    pub unparsed_rate: f64,
    pub n_instances: usize,
    pub n_parsed: usize,
    pub n_unparsed: usize,
    pub n_matched: usize,
    /// Matches credited to each rule, indexed by rule id - 1.
    pub rule_counts: [usize; 4],
    pub outcomes: Vec<InstanceOutcome>,
}

fn prf(matched: usize, parsed: usize, golds: usize) -> (Option<f64>, f64, f64) {
    let precision = (parsed > 0).then(|| matched as f64 / parsed as f64);
    let recall = if golds == 0 { 0.0 } else { matched as f64 / golds as f64 };
    let f1 = match precision {
        Some(p) if p + recall > 0.0 => 2.0 * p * recall / (p + recall),
        _ => 0.0,
    };
    (precision, recall, f1)
}

impl ExtractionScore {
    fn from_outcomes(outcomes: Vec<InstanceOutcome>) -> Self {
        let n_instances = outcomes.len();
        let n_parsed = outcomes.iter().filter(|o| o.predicted).count();
        let n_unparsed = outcomes.iter().filter(|o| o.unparsed).count();
        let mut rule_counts = [0usize; 4];
        for rule in outcomes.iter().filter_map(|o| o.rule) {
            rule_counts[usize::from(rule.id()) - 1] += 1;
        }
        let n_matched = rule_counts.iter().sum();
        let (precision, recall, f1) = prf(n_matched, n_parsed, n_instances);
        Self {
            precision,
            recall,
            f1,
            unparsed_rate: if n_instances == 0 { 0.0 } else { n_unparsed as f64 / n_instances as f64 },
            n_instances,
            n_parsed,
            n_unparsed,
            n_matched,
            rule_counts,
            outcomes,
        }
    }

    /// Percentile intervals for (precision, recall, F1) over resampled instances.
    pub fn bootstrap(&self, iterations: usize, level: f64, seed: u64) -> Result<[(f64, f64); 3]> {
        let n = self.outcomes.len();
        let stat = |which: usize| {
            move |idx: &[usize]| {
                let matched = idx.iter().filter(|&&i| self.outcomes[i].matched()).count();
                let parsed = idx.iter().filter(|&&i| self.outcomes[i].predicted).count();
                let (p, r, f) = prf(matched, parsed, idx.len());
                [p.unwrap_or(0.0), r, f][which]
            }
        };
        Ok([
            bootstrap_statistic_ci(n, iterations, level, seed, stat(0))?,
            bootstrap_statistic_ci(n, iterations, level, seed, stat(1))?,
            bootstrap_statistic_ci(n, iterations, level, seed, stat(2))?,
        ])
    }
}

/// Precision over parsed predictions, recall over all gold instances.
pub fn score_extraction(
    instances: &[RelationInstance],
    predictions: &[RelationPrediction],
    dict: &SynonymDictionary,
    labels: &RelationLabels,
) -> Result<ExtractionScore> {
    score_extraction_up_to(instances, predictions, dict, labels, MatchRule::Synonym)
}

/// As [`score_extraction`] with the rule chain cut after `last_rule`.
pub fn score_extraction_up_to(
    instances: &[RelationInstance],
    predictions: &[RelationPrediction],
    dict: &SynonymDictionary,
    labels: &RelationLabels,
    last_rule: MatchRule,
) -> Result<ExtractionScore> {
    let by_doc = predictions_by_doc(instances, predictions)?;
    let outcomes = instances
        .iter()
        .map(|inst| {
            let pred = by_doc.get(inst.doc_id.as_str());
            let parsed = pred.and_then(|p| p.predicted_relation.as_deref());
            InstanceOutcome {
                doc_id: inst.doc_id.clone(),
                predicted: parsed.is_some(),
                unparsed: pred.is_some_and(|p| p.predicted_relation.is_none()),
                rule: parsed.and_then(|p| {
                    match_up_to(p, &inst.gold_relation, dict, labels, last_rule).rule
                }),
            }
        })
        .collect();
    Ok(ExtractionScore::from_outcomes(outcomes))
}

/// Index predictions by document, rejecting unknown and repeated ids.
pub(crate) fn predictions_by_doc<'a>(
    instances: &[RelationInstance],
    predictions: &'a [RelationPrediction],
) -> Result<BTreeMap<&'a str, &'a RelationPrediction>> {
    let mut known: BTreeMap<&str, ()> = BTreeMap::new();
    for inst in instances {
        if known.insert(inst.doc_id.as_str(), ()).is_some() {
            return Err(Error::InputMismatch(alloc::format!("duplicate instance `{}`", inst.doc_id)));
        }
    }
    let mut by_doc = BTreeMap::new();
    for p in predictions {
        if !known.contains_key(p.doc_id.as_str()) {
            return Err(Error::InputMismatch(alloc::format!("unknown doc_id `{}`", p.doc_id)));
        }
        if by_doc.insert(p.doc_id.as_str(), p).is_some() {
            return Err(Error::InputMismatch(alloc::format!(
                "more than one prediction for `{}`",
                p.doc_id
            )));
        }
    }
    Ok(by_doc)
}
