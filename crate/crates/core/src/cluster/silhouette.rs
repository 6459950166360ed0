use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Mean silhouette with distance `max_weight - weight`.
///
/// A point alone in its cluster scores 0, as does a point whose intra and
/// nearest-cluster distances are both 0.
pub fn silhouette_score(weights: &[Vec<f64>], assignment: &[usize]) -> Result<f64> {
    let n = assignment.len();
    if weights.len() != n {
        return Err(Error::InputMismatch("assignment length differs from affinity size".into()));
    }
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignment {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::UndefinedSilhouette);
    }
    let max_w = weights
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, w)| *w))
        .fold(0.0f64, f64::max);

    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += max_w - weights[i][j];
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}
