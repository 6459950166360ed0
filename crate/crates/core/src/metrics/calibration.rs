//! Calibration of self-reported confidence: ECE and ROC AUC.

use alloc::vec::Vec;

use crate::math::floor;
use crate::{Error, Result};

fn check_inputs(confidences: &[f64], correct: &[bool]) -> Result<()> {
    if confidences.is_empty() {
        return Err(Error::InvalidSeries("no predictions".into()));
    }
    if confidences.len() != correct.len() {
        return Err(Error::InvalidSeries("confidences and outcomes differ in length".into()));
    }
    if confidences.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::InvalidSeries("confidence outside [0, 1]".into()));
    }
    Ok(())
}

/// Expected calibration error over `bins` equal-width bins on [0, 1].
///
/// Bin `b` covers `[b/bins, (b+1)/bins)`; the last bin is closed so a
/// confidence of exactly 1 lands in it.
pub fn ece(confidences: &[f64], correct: &[bool], bins: usize) -> Result<f64> {
    check_inputs(confidences, correct)?;
    if bins == 0 {
        return Err(Error::InvalidArgument("ECE needs at least one bin".into()));
    }
    let mut count = alloc::vec![0usize; bins];
    let mut conf_sum = alloc::vec![0.0f64; bins];
    let mut hits = alloc::vec![0usize; bins];
    for (c, ok) in confidences.iter().zip(correct) {
        let b = (floor(c * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        conf_sum[b] += c;
        hits[b] += usize::from(*ok);
    }
    let n = confidences.len() as f64;
    Ok((0..bins)
        .filter(|b| count[*b] > 0)
        .map(|b| {
            let m = count[b] as f64;
            (m / n) * (hits[b] as f64 / m - conf_sum[b] / m).abs()
        })
        .sum())
}

/// Rank-based ROC AUC (Mann-Whitney U); tied scores contribute one half.
pub fn auc_roc(confidences: &[f64], correct: &[bool]) -> Result<f64> {
    check_inputs(confidences, correct)?;
    let positives = correct.iter().filter(|c| **c).count();
    let negatives = correct.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..confidences.len()).collect();
    order.sort_by(|&a, &b| confidences[a].total_cmp(&confidences[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && confidences[order[j + 1]] == confidences[order[i]] {
            j += 1;
        }
        // ranks are 1-based; a tie group shares the average of its ranks
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        positive_rank_sum += avg_rank * order[i..=j].iter().filter(|&&k| correct[k]).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}
