//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[j]` is the eigenvector for `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                s += x * x;
            }
        }
    }
    sqrt(s)
}

/// Diagonalize a symmetric matrix. The caller guarantees symmetry.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> SymmetricEigen {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>();
    let tol = 1e-30 * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off * off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]).then(i.cmp(&j)));
    SymmetricEigen {
        values: order.iter().map(|&i| a[i][i]).collect(),
        vectors: order.iter().map(|&j| v.iter().map(|row| row[j]).collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(m: &[Vec<f64>], e: &SymmetricEigen) -> f64 {
        let mut worst: f64 = 0.0;
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            for (row, vi) in m.iter().zip(v) {
                let mv: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                worst = worst.max((mv - lambda * vi).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = symmetric_eigen(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!(residual(&m, &e) < 1e-12);
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let m = vec![vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 2.0]];
        assert_eq!(symmetric_eigen(&m).values, [-1.0, 2.0, 3.0]);
    }

    fn symmetric(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1..=max).prop_flat_map(|n| {
            proptest::collection::vec(-10.0f64..10.0, n * n).prop_map(move |raw| {
                let mut m = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..=i {
                        m[i][j] = raw[i * n + j];
                        m[j][i] = raw[i * n + j];
                    }
                }
                m
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn eigenpairs_reconstruct(m in symmetric(64)) {
            let e = symmetric_eigen(&m);
            prop_assert!(residual(&m, &e) < 1e-8);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            for v in &e.vectors {
                let norm: f64 = v.iter().map(|x| x * x).sum();
                prop_assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }
}
