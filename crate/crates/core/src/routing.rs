//! Agreement-based routing between a primary and a secondary model.
//!
//! High-agreement primary votes are accepted, intermediate agreement is
//! rerouted to the secondary model and low agreement is flagged uncertain
//! (the primary answer is still emitted so it can be scored). Rerouting
//! covers the half-open interval `[theta_low, theta_high)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::fnv1a;
use crate::metrics::answer::{exact_match, token_f1};
use crate::vote::{oracle_hit, AggregateDecision};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingThresholds {
    pub theta_low: f64,
    pub theta_high: f64,
}

impl RoutingThresholds {
    pub fn new(theta_low: f64, theta_high: f64) -> Result<Self> {
        if !(0.0 <= theta_low && theta_low < theta_high && theta_high <= 1.0) {
            return Err(Error::InvalidThresholds {
                low: theta_low,
                high: theta_high,
            });
        }
        Ok(Self {
            theta_low,
            theta_high,
        })
    }
}

impl Default for RoutingThresholds {
    fn default() -> Self {
        Self {
            theta_low: 0.4,
            theta_high: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Routing {
    Accepted,
    Rerouted,
    Uncertain,
}

impl Routing {
    pub fn as_str(self) -> &'static str {
        match self {
            Routing::Accepted => "Primary accepted",
            Routing::Rerouted => "Rerouted",
            Routing::Uncertain => "Uncertain",
        }
    }
}

pub fn route(agreement: f64, thresholds: &RoutingThresholds) -> Routing {
    if agreement >= thresholds.theta_high {
        Routing::Accepted
    } else if agreement >= thresholds.theta_low {
        Routing::Rerouted
    } else {
        Routing::Uncertain
    }
}

/// Final routed answer for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeOutcome {
    pub question_id: String,
    pub routing: Routing,
    pub primary_decision: AggregateDecision,
    pub secondary_decision: Option<AggregateDecision>,
    /// `None` when the deciding stage produced no parseable sample.
    pub final_answer: Option<String>,
    pub uncertain_flag: bool,
}

impl CascadeOutcome {
    /// Route on the primary agreement; `secondary` runs only when rerouted.
    pub fn route_primary<F>(primary: AggregateDecision, thresholds: &RoutingThresholds, secondary: F) -> Self
    where
        F: FnOnce(&AggregateDecision) -> AggregateDecision,
    {
        let routing = route(primary.agreement(), thresholds);
        Self::assemble(primary, routing, secondary)
    }

    /// Reroute iff `reroute`, regardless of agreement (random baseline).
    pub fn forced<F>(primary: AggregateDecision, reroute: bool, secondary: F) -> Self
    where
        F: FnOnce(&AggregateDecision) -> AggregateDecision,
    {
        let routing = if reroute {
            Routing::Rerouted
        } else {
            Routing::Accepted
        };
        Self::assemble(primary, routing, secondary)
    }

    fn assemble<F>(primary: AggregateDecision, routing: Routing, secondary: F) -> Self
    where
        F: FnOnce(&AggregateDecision) -> AggregateDecision,
    {
        let secondary_decision = (routing == Routing::Rerouted).then(|| secondary(&primary));
        let final_answer = match &secondary_decision {
            Some(s) => s.winner().map(String::from),
            None => primary.winner().map(String::from),
        };
        Self {
            question_id: primary.question_id.clone(),
            uncertain_flag: routing == Routing::Uncertain || final_answer.is_none(),
            routing,
            primary_decision: primary,
            secondary_decision,
            final_answer,
        }
    }

    pub fn gold(&self) -> &str {
        &self.primary_decision.gold
    }

    pub fn em(&self) -> f64 {
        self.final_answer.as_deref().map_or(0.0, |a| exact_match(a, self.gold()))
    }

    pub fn f1(&self) -> f64 {
        self.final_answer.as_deref().map_or(0.0, |a| token_f1(a, self.gold()))
    }

    /// Any sample from either stage matches gold.
    pub fn oracle_hit(&self) -> bool {
        let mut answers = self.primary_decision.answers();
        if let Some(s) = &self.secondary_decision {
            answers.extend(s.answers());
        }
        oracle_hit(&answers, self.gold())
    }

    /// Agreement of the stage that produced the final answer.
    pub fn agreement(&self) -> f64 {
        self.secondary_decision
            .as_ref()
            .unwrap_or(&self.primary_decision)
            .agreement()
    }
}

fn unit_draw(question_id: &str, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(question_id.as_bytes()));
    rng.random::<f64>()
}

/// Seeded coin flip for the random-cascade baseline. Each question gets its
/// own draw, so the decision does not depend on processing order.
pub fn random_reroute(question_id: &str, reroute_fraction: f64, seed: u64) -> bool {
    unit_draw(question_id, seed) < reroute_fraction
}

/// Exactly `count` question ids chosen uniformly at random (seeded), for a
/// baseline that issues as many secondary calls as the agreement cascade.
pub fn cost_matched_reroutes<S: AsRef<str>>(question_ids: &[S], count: usize, seed: u64) -> BTreeSet<String> {
    let mut keyed: Vec<(f64, &str)> = question_ids
        .iter()
        .map(|id| (unit_draw(id.as_ref(), seed), id.as_ref()))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    keyed.into_iter().take(count).map(|(_, id)| String::from(id)).collect()
}

/// One line of a threshold sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta_high: f64,
    pub em: f64,
    pub rerouted: usize,
    pub rerouted_pct: f64,
}

/// EM and reroute volume for each `theta_high`, reusing one primary pass.
///
/// `secondary` is invoked at most once per question; its decisions are
/// cached across rows. A `theta_high` equal to `theta_low` is allowed and
/// describes the primary-only cascade.
pub fn threshold_sweep<F>(
    primaries: &[AggregateDecision],
    theta_low: f64,
    theta_high_values: &[f64],
    mut secondary: F,
) -> Result<Vec<SweepRow>>
where
    F: FnMut(&AggregateDecision) -> AggregateDecision,
{
    if let Some(bad) = theta_high_values
        .iter()
        .find(|h| !(theta_low <= **h && **h <= 1.0))
    {
        return Err(Error::InvalidThresholds {
            low: theta_low,
            high: *bad,
        });
    }
    let mut cache: BTreeMap<String, AggregateDecision> = BTreeMap::new();
    let n = primaries.len();
    let mut rows = Vec::with_capacity(theta_high_values.len());
    for &theta_high in theta_high_values {
        let mut em = 0.0;
        let mut rerouted = 0usize;
        for p in primaries {
            let a = p.agreement();
            if a >= theta_low && a < theta_high {
                rerouted += 1;
                let s = cache
                    .entry(p.question_id.clone())
                    .or_insert_with(|| secondary(p));
                em += s.em();
            } else {
                em += p.em();
            }
        }
        let denom = n.max(1) as f64;
        rows.push(SweepRow {
            theta_high,
            em: em / denom,
            rerouted,
            rerouted_pct: 100.0 * rerouted as f64 / denom,
        });
    }
    Ok(rows)
}
