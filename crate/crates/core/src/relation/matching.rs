//! Four-rule soft matcher for relation labels.
//!
//! Rules are tried in order and the first that fires is reported:
//! 1. property-code resolution makes the labels equal,
//! 2. normalized labels are equal,
//! 3. one label contains the other, or they share an underscore-separated
//!    word of at least four characters,
//! 4. both labels sit in the same synonym group.
//!
//! Rule 3 is deliberately loose: `place_of_birth` and `date_of_birth` share
//! `birth` and match. Reports keep the rule id so such matches can be audited.

use alloc::string::String;
use serde::{Deserialize, Serialize};

use super::dictionary::SynonymDictionary;
use super::labels::{normalize_label, RelationLabels};

const MIN_SHARED_WORD: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum MatchRule {
    CodeResolution = 1,
    Normalized = 2,
    Lexical = 3,
    Synonym = 4,
}

impl MatchRule {
    pub const ALL: [MatchRule; 4] = [
        MatchRule::CodeResolution,
        MatchRule::Normalized,
        MatchRule::Lexical,
        MatchRule::Synonym,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }
}

impl From<MatchRule> for u8 {
    fn from(r: MatchRule) -> u8 {
        r as u8
    }
}

impl TryFrom<u8> for MatchRule {
    type Error = &'static str;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        MatchRule::ALL
            .get(usize::from(v).wrapping_sub(1))
            .copied()
            .ok_or("match rule must be 1..=4")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched: bool,
    pub rule: Option<MatchRule>,
}

impl MatchResult {
    const NONE: MatchResult = MatchResult {
        matched: false,
        rule: None,
    };

    fn by(rule: MatchRule) -> Self {
        Self {
            matched: true,
            rule: Some(rule),
        }
    }
}

fn shares_significant_word(a: &str, b: &str) -> bool {
    a.split('_')
        .filter(|w| w.chars().count() >= MIN_SHARED_WORD)
        .any(|w| b.split('_').any(|v| v == w))
}

/// Soft match using every rule.
pub fn soft_match(
    predicted: &str,
    gold: &str,
    dict: &SynonymDictionary,
    labels: &RelationLabels,
) -> MatchResult {
    match_up_to(predicted, gold, dict, labels, MatchRule::Synonym)
}

/// Soft match using only rules up to and including `last_rule`.
pub fn match_up_to(
    predicted: &str,
    gold: &str,
    dict: &SynonymDictionary,
    labels: &RelationLabels,
    last_rule: MatchRule,
) -> MatchResult {
    let p_code = labels.code_label(predicted);
    let g_code = labels.code_label(gold);
    let p = p_code.map_or_else(|| normalize_label(predicted), String::from);
    let g = g_code.map_or_else(|| normalize_label(gold), String::from);
    if p.is_empty() || g.is_empty() {
        return MatchResult::NONE;
    }
    let candidates = [
        (MatchRule::CodeResolution, p == g && (p_code.is_some() || g_code.is_some())),
        (MatchRule::Normalized, p == g),
        (
            MatchRule::Lexical,
            p.contains(g.as_str()) || g.contains(p.as_str()) || shares_significant_word(&p, &g),
        ),
        (MatchRule::Synonym, dict.same_group(&p, &g)),
    ];
    candidates
        .iter()
        .filter(|(rule, _)| *rule <= last_rule)
        .find(|(_, hit)| *hit)
        .map_or(MatchResult::NONE, |(rule, _)| MatchResult::by(*rule))
}
