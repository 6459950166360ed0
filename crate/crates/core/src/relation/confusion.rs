use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::labels::RelationLabels;
use super::scoring::{predictions_by_doc, RelationInstance, RelationPrediction};
use crate::{Error, Result};

/// Square count matrix; row = predicted label, column = gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if counts.len() != n || counts.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(alloc::format!(
                "confusion matrix must be {n}x{n}"
            )));
        }
        Ok(Self { labels, counts })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of scored (prediction, gold) pairs.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, predicted: &str, gold: &str) -> u64 {
        let find = |l: &str| self.labels.iter().position(|x| x == l);
        match (find(predicted), find(gold)) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionBuild {
    pub matrix: ConfusionMatrix,
    /// Pairs dropped because a label did not resolve to the vocabulary.
    pub unresolved: usize,
    pub unparsed: usize,
}

/// Count resolved (predicted, gold) pairs. Labels are sorted.
pub fn build_confusion(
    instances: &[RelationInstance],
    predictions: &[RelationPrediction],
    labels: &RelationLabels,
) -> Result<ConfusionBuild> {
    let by_doc = predictions_by_doc(instances, predictions)?;
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut unresolved = 0;
    let mut unparsed = 0;
    for inst in instances {
        let Some(pred) = by_doc.get(inst.doc_id.as_str()) else {
            continue;
        };
        let Some(raw) = pred.predicted_relation.as_deref() else {
            unparsed += 1;
            continue;
        };
        match (labels.resolve(raw).canonical(), labels.resolve(&inst.gold_relation).canonical()) {
            (Some(p), Some(g)) => *pairs.entry((String::from(p), String::from(g))).or_insert(0) += 1,
            _ => unresolved += 1,
        }
    }
    let names: Vec<String> = pairs
        .keys()
        .flat_map(|(p, g)| [p.clone(), g.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut counts = alloc::vec![alloc::vec![0u64; names.len()]; names.len()];
    for ((p, g), c) in &pairs {
        counts[index[p.as_str()]][index[g.as_str()]] += c;
    }
    Ok(ConfusionBuild {
        matrix: ConfusionMatrix::new(names, counts)?,
        unresolved,
        unparsed,
    })
}
