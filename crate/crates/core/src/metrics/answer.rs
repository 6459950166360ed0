use alloc::collections::BTreeMap;

use crate::normalize::{answer_tokens, normalize_answer};
use crate::sample::SampleResponse;

/// 1.0 iff both strings normalize to the same answer, else 0.0.
pub fn exact_match(prediction: &str, gold: &str) -> f64 {
    if normalize_answer(prediction) == normalize_answer(gold) {
        1.0
    } else {
        0.0
    }
}

/// Token-level F1 with multiset overlap over normalized tokens.
///
/// Two empty answers score 1, a single empty side scores 0.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let pred = answer_tokens(prediction);
    let gold = answer_tokens(gold);
    match (pred.is_empty(), gold.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut remaining: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &gold {
        *remaining.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for t in &pred {
        if let Some(c) = remaining.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred.len() as f64;
    let recall = common as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Partial credit with no exact match: the answer is probably an alias or
/// a different granularity of the gold answer.
pub fn flag_format_mismatch(em: f64, f1: f64) -> bool {
    em == 0.0 && f1 > 0.0
}

/// Mean reasoning-chain length over parseable samples; 0 when there are none.
pub fn mean_chain_length<'a>(samples: impl IntoIterator<Item = &'a SampleResponse>) -> f64 {
    let (total, count) = samples
        .into_iter()
        .filter_map(SampleResponse::parsed)
        .fold((0usize, 0usize), |(t, c), p| (t + p.reasoning_chain.len(), c + 1));
    if count == 0 {
        0.0
    } else {
        total as f64 / count as f64
    }
}
