//! Cost/accuracy trade-off filtering.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPoint {
    pub name: String,
    pub relative_cost: f64,
    pub em: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vram_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_count: Option<u32>,
}

impl ScenarioPoint {
    pub fn new(name: impl Into<String>, relative_cost: f64, em: f64) -> Result<Self> {
        let p = Self { name: name.into(), relative_cost, em, vram_gb: None, model_count: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_cost > 0.0 && self.relative_cost.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "`{}`: relative cost must be positive",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.em) {
            return Err(Error::InvalidArgument(alloc::format!("`{}`: EM must lie in [0, 1]", self.name)));
        }
        Ok(())
    }

    /// No worse on both axes and strictly better on one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.relative_cost <= other.relative_cost
            && self.em >= other.em
            && (self.relative_cost < other.relative_cost || self.em > other.em)
    }
}

/// `true` for each point no other point dominates.
pub fn pareto_mask(points: &[ScenarioPoint]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].relative_cost.total_cmp(&points[b].relative_cost));
    let mut keep = alloc::vec![false; points.len()];
    let mut best_cheaper = f64::NEG_INFINITY;
    let mut start = 0;
    while start < order.len() {
        let cost = points[order[start]].relative_cost;
        let end = start + order[start..].iter().take_while(|&&i| points[i].relative_cost == cost).count();
        let group_best = order[start..end].iter().map(|&i| points[i].em).fold(f64::NEG_INFINITY, f64::max);
        for &i in &order[start..end] {
            keep[i] = points[i].em == group_best && points[i].em > best_cheaper;
        }
        best_cheaper = best_cheaper.max(group_best);
        start = end;
    }
    keep
}

/// Non-dominated points in input order. Exact duplicates are all kept.
pub fn pareto_frontier(points: &[ScenarioPoint]) -> Vec<ScenarioPoint> {
    points
        .iter()
        .zip(pareto_mask(points))
        .filter(|(_, keep)| *keep)
        .map(|(p, _)| p.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    fn brute_force(points: &[ScenarioPoint]) -> Vec<bool> {
        points.iter().map(|p| !points.iter().any(|q| q.dominates(p))).collect()
    }

    fn table9() -> Vec<ScenarioPoint> {
        [
            ("qwen", 1.0, 0.406),
            ("oracle-qwen", 130.0, 0.446),
            ("cascade", 2.5, 0.462),
            ("diverse-vote", 7.5, 0.482),
            ("oracle-all", 130.0, 0.520),
            ("v5a", 12.0, 0.524),
            ("v5b", 12.0, 0.552),
            ("v5c", 12.0, 0.588),
        ]
        .iter()
        .map(|(n, c, e)| ScenarioPoint::new(*n, *c, *e).unwrap())
        .collect()
    }

    #[test]
    fn table9_frontier() {
        let pts = table9();
        let front: Vec<(f64, f64)> = pareto_frontier(&pts).iter().map(|p| (p.relative_cost, p.em)).collect();
        assert_eq!(front, [(1.0, 0.406), (2.5, 0.462), (7.5, 0.482), (12.0, 0.588)]);
        assert_eq!(pareto_mask(&pts), brute_force(&pts));
    }

    #[test]
    fn single_and_duplicates() {
        let p = ScenarioPoint::new("a", 2.0, 0.5).unwrap();
        assert_eq!(pareto_frontier(&[p.clone()]), [p.clone()]);
        assert_eq!(pareto_frontier(&[p.clone(), p.clone()]).len(), 2);
        assert!(ScenarioPoint::new("z", 0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn matches_pairwise_dominance(raw in proptest::collection::vec((1u8..8, 0u8..6), 0..40)) {
            let pts: Vec<ScenarioPoint> = raw
                .iter()
                .enumerate()
                .map(|(i, (c, e))| ScenarioPoint::new(format!("p{i}"), f64::from(*c) * 0.5, f64::from(*e) / 5.0).unwrap())
                .collect();
            prop_assert_eq!(pareto_mask(&pts), brute_force(&pts));
        }
    }
}
