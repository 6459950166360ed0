//! Seeded k-means with farthest-point initialization.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 300;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn farthest_point_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let mut far = 0;
        for (i, d) in min_d.iter().enumerate() {
            if *d > min_d[far] {
                far = i;
            }
        }
        let c = points[far].clone();
        for (m, p) in min_d.iter_mut().zip(points) {
            *m = m.min(dist2(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    let k = centers.len();
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (a, p) in assignment.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        // an emptied cluster takes the point farthest from its own center
        for c in 0..k {
            if !assignment.contains(&c) {
                let mut far = 0;
                let mut far_d = -1.0;
                for (i, p) in points.iter().enumerate() {
                    let owner = assignment[i];
                    let alone = assignment.iter().filter(|&&a| a == owner).count() == 1;
                    let d = dist2(p, &centers[owner]);
                    if !alone && d > far_d {
                        far = i;
                        far_d = d;
                    }
                }
                assignment[far] = c;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assignment.iter().zip(points) {
            counts[*a] += 1;
            for (s, x) in sums[*a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((center, sum), n) in centers.iter_mut().zip(sums).zip(counts) {
            *center = sum.into_iter().map(|s| s / n as f64).collect();
        }
        if !changed {
            break;
        }
    }
    let sse = assignment.iter().zip(points).map(|(a, p)| dist2(p, &centers[*a])).sum();
    (assignment, sse)
}

/// Renumber cluster ids in order of first appearance.
pub fn relabel_dense(assignment: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    assignment
        .iter()
        .map(|a| match map.iter().find(|(old, _)| old == a) {
            Some((_, new)) => *new,
            None => {
                let new = map.len();
                map.push((*a, new));
                new
            }
        })
        .collect()
}

/// Best of `RESTARTS` runs by within-cluster sum of squares. Requires
/// `1 <= k <= points.len()`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..RESTARTS {
        let centers = farthest_point_init(points, k, &mut rng);
        let (assignment, sse) = lloyd(points, centers);
        if best.as_ref().is_none_or(|(_, b)| sse < *b - 1e-12) {
            best = Some((assignment, sse));
        }
    }
    relabel_dense(&best.expect("at least one restart").0)
}
