//! Spectral clustering of relation confusions.

mod eigen;
mod kmeans;
mod silhouette;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::relation::{ConfusionMatrix, SynonymDictionary, SynonymGroup};
use crate::{Error, Result};

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use kmeans::{kmeans, relabel_dense, RESTARTS};
pub use silhouette::silhouette_score;

/// Symmetric nonnegative label affinities with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    pub labels: Vec<String>,
    pub weights: Vec<Vec<f64>>,
}

impl AffinityMatrix {
    pub fn new(labels: Vec<String>, weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if weights.len() != n || weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("affinity must be {n}x{n}")));
        }
        for i in 0..n {
            if weights[i][i] != 0.0 {
                return Err(Error::InvalidArgument("affinity diagonal must be zero".into()));
            }
            for j in 0..n {
                let w = weights[i][j];
                if !(w >= 0.0 && w.is_finite()) || w != weights[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "affinity must be symmetric and nonnegative at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { labels, weights })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Symmetric normalized Laplacian; isolated nodes get zero rows.
    pub fn normalized_laplacian(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let inv_sqrt: Vec<f64> = self
            .weights
            .iter()
            .map(|r| {
                let d: f64 = r.iter().sum();
                if d > 0.0 { 1.0 / sqrt(d) } else { 0.0 }
            })
            .collect();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let norm = inv_sqrt[i] * self.weights[i][j] * inv_sqrt[j];
                l[i][j] = if i == j { if inv_sqrt[i] > 0.0 { 1.0 - norm } else { 0.0 } } else { -norm };
            }
        }
        l
    }
}

/// A = C + Cᵀ with the diagonal zeroed.
pub fn symmetrize(confusion: &ConfusionMatrix) -> AffinityMatrix {
    let n = confusion.len();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i][j] = (confusion.counts[i][j] + confusion.counts[j][i]) as f64;
            }
        }
    }
    AffinityMatrix { labels: confusion.labels.clone(), weights: w }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    pub labels: Vec<String>,
    /// Cluster id per label, dense in `0..k`.
    pub assignment: Vec<usize>,
    pub silhouette: f64,
}

impl Clustering {
    /// Labels grouped by cluster id.
    pub fn clusters(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.k];
        for (label, &c) in self.labels.iter().zip(&self.assignment) {
            out[c].push(label.clone());
        }
        out
    }

    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| self.assignment[i])
    }

    /// Each multi-label cluster becomes a synonym group.
    pub fn to_dictionary(&self, version: &str) -> SynonymDictionary {
        let groups = self
            .clusters()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .map(|(i, c)| SynonymGroup { name: format!("cluster-{i}"), labels: c.into_iter().collect() })
            .collect();
        SynonymDictionary::new(version, groups).expect("clusters are disjoint")
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, labels: n });
    }
    Ok(())
}

fn embed(affinity: &AffinityMatrix, k: usize) -> Vec<Vec<f64>> {
    let eig = symmetric_eigen(&affinity.normalized_laplacian());
    (0..affinity.len())
        .map(|i| {
            let row: Vec<f64> = eig.vectors[..k].iter().map(|v| v[i]).collect();
            let norm = sqrt(row.iter().map(|x| x * x).sum());
            if norm > 0.0 { row.into_iter().map(|x| x / norm).collect() } else { row }
        })
        .collect()
}

fn score(affinity: &AffinityMatrix, assignment: &[usize]) -> f64 {
    silhouette_score(&affinity.weights, assignment).unwrap_or(0.0)
}

/// Normalized spectral clustering into `k` groups.
pub fn spectral_cluster(affinity: &AffinityMatrix, k: usize, seed: u64) -> Result<Clustering> {
    check_k(k, affinity.len())?;
    if affinity.weights.iter().flatten().all(|w| *w == 0.0) {
        return Err(Error::DegenerateAffinity);
    }
    let assignment = kmeans(&embed(affinity, k), k, seed);
    Ok(Clustering {
        k,
        labels: affinity.labels.clone(),
        silhouette: score(affinity, &assignment),
        assignment,
    })
}

/// Highest-silhouette clustering over `k_range`; ties keep the smaller k.
pub fn select_k(
    affinity: &AffinityMatrix,
    k_range: core::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<Clustering> {
    let mut best: Option<Clustering> = None;
    for k in k_range.clone() {
        let c = spectral_cluster(affinity, k, seed)?;
        if best.as_ref().is_none_or(|b| c.silhouette > b.silhouette + 1e-12) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::InvalidK { k: *k_range.start(), labels: affinity.len() })
}

/// For each manual group, the best Jaccard overlap with any cluster;
/// averaged over groups.
pub fn mean_jaccard(clusters: &Clustering, manual: &SynonymDictionary) -> Result<f64> {
    if manual.is_empty() {
        return Err(Error::InvalidDictionary("no synonym groups to compare".into()));
    }
    let members = clusters.clusters();
    let sets: Vec<BTreeSet<&str>> =
        members.iter().map(|c| c.iter().map(String::as_str).collect()).collect();
    let mut total = 0.0;
    for g in manual.groups() {
        let group: BTreeSet<&str> = g.labels.iter().map(String::as_str).collect();
        let best = sets
            .iter()
            .map(|c| {
                let inter = c.intersection(&group).count();
                let union = c.union(&group).count();
                if union == 0 { 0.0 } else { inter as f64 / union as f64 }
            })
            .fold(0.0, f64::max);
        total += best;
    }
    Ok(total / manual.groups().len() as f64)
}
