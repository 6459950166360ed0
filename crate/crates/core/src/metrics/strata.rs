//! Voted and oracle EM split by how strongly the samples agreed.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::vote::AggregateDecision;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumLabel {
    High,
    Medium,
    Low,
}

impl StratumLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StratumLabel::High => "High",
            StratumLabel::Medium => "Medium",
            StratumLabel::Low => "Low",
        }
    }
}

/// One agreement band. EM fields are `None` for an empty band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStratum {
    pub label: StratumLabel,
    pub lower: f64,
    pub upper: f64,
    /// Only the top band includes its upper edge.
    pub upper_inclusive: bool,
    pub n: usize,
    pub em_voted: Option<f64>,
    pub oracle: Option<f64>,
}

impl AgreementStratum {
    pub fn contains(&self, agreement: f64) -> bool {
        agreement >= self.lower
            && (agreement < self.upper || (self.upper_inclusive && agreement <= self.upper))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumInput {
    pub agreement: f64,
    pub em: f64,
    pub oracle: bool,
}

impl From<&AggregateDecision> for StratumInput {
    fn from(d: &AggregateDecision) -> Self {
        Self {
            agreement: d.agreement(),
            em: d.em(),
            oracle: d.oracle_hit,
        }
    }
}

/// High `[high, 1]`, Medium `[low, high)`, Low `[0, low)`.
pub fn stratify(
    inputs: impl IntoIterator<Item = StratumInput>,
    (low, high): (f64, f64),
) -> Result<Vec<AgreementStratum>> {
    if !(0.0 < low && low < high && high < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "strata bounds must satisfy 0 < {low} < {high} < 1"
        )));
    }
    let mut strata = alloc::vec![
        (StratumLabel::High, high, 1.0, true),
        (StratumLabel::Medium, low, high, false),
        (StratumLabel::Low, 0.0, low, false),
    ]
    .into_iter()
    .map(|(label, lower, upper, upper_inclusive)| AgreementStratum {
        label,
        lower,
        upper,
        upper_inclusive,
        n: 0,
        em_voted: None,
        oracle: None,
    })
    .collect::<Vec<_>>();
    let mut sums = [(0.0f64, 0usize); 3];
    for input in inputs {
        let slot = if input.agreement >= high {
            0
        } else if input.agreement >= low {
            1
        } else {
            2
        };
        strata[slot].n += 1;
        sums[slot].0 += input.em;
        sums[slot].1 += usize::from(input.oracle);
    }
    for (s, (em, oracle)) in strata.iter_mut().zip(sums) {
        if s.n > 0 {
            s.em_voted = Some(em / s.n as f64);
            s.oracle = Some(oracle as f64 / s.n as f64);
        }
    }
    Ok(strata)
}

pub fn stratify_by_agreement(
    decisions: &[AggregateDecision],
    bounds: (f64, f64),
) -> Result<Vec<AgreementStratum>> {
    stratify(decisions.iter().map(StratumInput::from), bounds)
}
