//! Majority voting over sampled answers and per-question decisions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::metrics::answer::{exact_match, token_f1};
use crate::normalize::normalize_answer;
use crate::sample::SampleResponse;
use crate::{Error, Result};

/// Outcome of a majority vote over normalized answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult {
    pub winner: String,
    /// `counts[winner] / Σ counts`.
    pub agreement: f64,
    pub counts: BTreeMap<String, usize>,
    pub tie_broken: bool,
}

impl VoteResult {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Majority vote; ties go to the answer that appeared first.
pub fn majority_vote<S: AsRef<str>>(answers: &[S]) -> Result<VoteResult> {
    if answers.is_empty() {
        return Err(Error::NoValidSamples);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut first_seen: Vec<&str> = Vec::new();
    for a in answers {
        let a = a.as_ref();
        let slot = counts.entry(String::from(a)).or_insert(0);
        if *slot == 0 {
            first_seen.push(a);
        }
        *slot += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    let mut leaders = first_seen.iter().filter(|a| counts[**a] == best);
    let winner = String::from(*leaders.next().expect("at least one answer"));
    let tie_broken = leaders.next().is_some();
    Ok(VoteResult {
        agreement: best as f64 / answers.len() as f64,
        winner,
        counts,
        tie_broken,
    })
}

/// True iff some answer exactly matches `gold` after normalization.
pub fn oracle_hit<S: AsRef<str>>(answers: &[S], gold: &str) -> bool {
    answers.iter().any(|a| exact_match(a.as_ref(), gold) == 1.0)
}

/// Self-consistency result for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateDecision {
    pub question_id: String,
    /// Absent when every sample was unparsed.
    pub vote: Option<VoteResult>,
    pub oracle_hit: bool,
    pub samples: Vec<SampleResponse>,
    /// Normalized gold answer.
    pub gold: String,
}

impl AggregateDecision {
    /// Vote over the parseable samples; unparsed samples stay in `samples`
    /// so they still count toward the unparsed rate.
    pub fn from_samples(
        question_id: impl Into<String>,
        gold: &str,
        samples: Vec<SampleResponse>,
    ) -> Self {
        let answers: Vec<String> = samples
            .iter()
            .filter_map(SampleResponse::parsed)
            .map(|p| normalize_answer(&p.answer))
            .collect();
        let gold = normalize_answer(gold);
        Self {
            question_id: question_id.into(),
            vote: majority_vote(&answers).ok(),
            oracle_hit: oracle_hit(&answers, &gold),
            samples,
            gold,
        }
    }

    pub fn winner(&self) -> Option<&str> {
        self.vote.as_ref().map(|v| v.winner.as_str())
    }

    /// Zero when no sample was parseable.
    pub fn agreement(&self) -> f64 {
        self.vote.as_ref().map_or(0.0, |v| v.agreement)
    }

    pub fn em(&self) -> f64 {
        self.winner().map_or(0.0, |w| exact_match(w, &self.gold))
    }

    pub fn f1(&self) -> f64 {
        self.winner().map_or(0.0, |w| token_f1(w, &self.gold))
    }

    pub fn unparsed_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_unparsed()).count()
    }

    /// Normalized answers of the parseable samples, in sample order.
    pub fn answers(&self) -> Vec<String> {
        self.samples
            .iter()
            .filter_map(SampleResponse::parsed)
            .map(|p| normalize_answer(&p.answer))
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sample::{ParseFailure, ParseFailureReason, ParsedOutput};
    use alloc::string::ToString;
    use proptest::prelude::*;

    pub(crate) fn sample(i: usize, answer: Option<&str>) -> SampleResponse {
        SampleResponse {
            endpoint: "test".to_string(),
            sample_index: i,
            raw_text: String::new(),
            parsed: match answer {
                Some(a) => Ok(ParsedOutput {
                    answer: a.to_string(),
                    ..Default::default()
                }),
                None => Err(ParseFailure::new(ParseFailureReason::NoObjectFound, "")),
            },
            latency_ms: 0,
        }
    }

    pub(crate) fn decision(id: &str, gold: &str, answers: &[Option<&str>]) -> AggregateDecision {
        let samples = answers.iter().enumerate().map(|(i, a)| sample(i, *a)).collect();
        AggregateDecision::from_samples(id, gold, samples)
    }

    #[test]
    fn vote_examples() {
        let v = majority_vote(&["a", "a", "a", "b", "c"]).unwrap();
        assert_eq!(v.winner, "a");
        assert_eq!(v.agreement, 0.6);
        assert!(!v.tie_broken);

        let v = majority_vote(&["x", "x", "y", "x", "x"]).unwrap();
        assert_eq!(v.agreement, 0.8);

        let v = majority_vote(&["a", "a", "b", "b", "c"]).unwrap();
        assert_eq!(v.winner, "a");
        assert!(v.tie_broken);

        let v = majority_vote(&["b", "a", "a", "b"]).unwrap();
        assert_eq!(v.winner, "b");

        assert_eq!(majority_vote::<&str>(&[]), Err(Error::NoValidSamples));
    }

    #[test]
    fn oracle_examples() {
        assert!(oracle_hit(&["wrong", "Paris", "nope"], "paris"));
        assert!(!oracle_hit::<&str>(&[], "paris"));
        // three models times five samples pooled into one candidate list
        let mut pooled = alloc::vec!["x"; 14];
        pooled.push("The Answer");
        assert!(oracle_hit(&pooled, "answer"));
    }

    #[test]
    fn decision_confident_but_wrong() {
        let d = decision("q", "Paris", &[Some("Lyon"); 5]);
        assert_eq!(d.agreement(), 1.0);
        assert_eq!(d.em(), 0.0);
        assert!(!d.oracle_hit);
    }

    #[test]
    fn decision_gold_majority() {
        let d = decision("q", "Paris", &[Some("paris"), Some("Lyon"), Some("Paris."), Some("Nice"), Some("PARIS")]);
        assert_eq!(d.winner(), Some("paris"));
        assert_eq!(d.agreement(), 0.6);
        assert_eq!(d.em(), 1.0);
    }

    #[test]
    fn unparsed_samples_are_excluded_from_vote_but_counted() {
        let d = decision("q", "a", &[Some("a"), None, Some("b"), None, Some("a")]);
        assert_eq!(d.unparsed_count(), 2);
        assert_eq!(d.vote.as_ref().unwrap().total(), 3);
        assert!((d.agreement() - 2.0 / 3.0).abs() < 1e-15);

        let all_failed = decision("q", "a", &[None, None]);
        assert!(all_failed.vote.is_none());
        assert_eq!(all_failed.agreement(), 0.0);
        assert_eq!(all_failed.em(), 0.0);
    }

    proptest! {
        #[test]
        fn agreement_is_a_fraction_of_parseable(answers in proptest::collection::vec("[abc]", 1..10)) {
            let v = majority_vote(&answers).unwrap();
            let n = answers.len();
            let m = v.counts[&v.winner];
            prop_assert_eq!(v.agreement, m as f64 / n as f64);
            prop_assert!(v.counts.values().all(|c| *c <= m));
            prop_assert_eq!(v.total(), n);
            let all_same = answers.iter().all(|a| a == &answers[0]);
            prop_assert_eq!(v.agreement == 1.0, all_same);
        }

        #[test]
        fn untied_vote_is_permutation_invariant(
            answers in proptest::collection::vec("[abc]", 1..10),
            seed in any::<u64>(),
        ) {
            let v = majority_vote(&answers).unwrap();
            let mut shuffled = answers.clone();
            // deterministic Fisher-Yates driven by the seed
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let w = majority_vote(&shuffled).unwrap();
            prop_assert_eq!(&v.counts, &w.counts);
            prop_assert_eq!(v.agreement, w.agreement);
            if !v.tie_broken {
                prop_assert_eq!(v.winner, w.winner);
            }
        }

        #[test]
        fn vote_never_beats_oracle(
            answers in proptest::collection::vec(proptest::option::of("[abc]"), 1..8),
            gold in "[abc]",
        ) {
            let refs: Vec<Option<&str>> = answers.iter().map(|a| a.as_deref()).collect();
            let d = decision("q", &gold, &refs);
            let ceiling = if d.oracle_hit { 1.0 } else { 0.0 };
            prop_assert!(d.em() <= ceiling);
        }
    }
}
