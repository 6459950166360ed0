//! Answer normalization used by every string comparison in the crate.

use alloc::string::String;
use alloc::vec::Vec;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercase, strip ASCII punctuation, drop the articles `a`/`an`/`the`
/// and collapse whitespace.
///
/// ```
/// use consensus_core::normalize_answer;
/// assert_eq!(normalize_answer("The Eiffel Tower!"), "eiffel tower");
/// assert_eq!(normalize_answer("U.S.A."), "usa");
/// ```
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let stripped: String = lowered.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    let words: Vec<&str> = stripped
        .split_whitespace()
        .filter(|w| !ARTICLES.contains(w))
        .collect();
    words.join(" ")
}

/// Whitespace tokens of the normalized answer.
pub fn answer_tokens(text: &str) -> Vec<String> {
    normalize_answer(text)
        .split_whitespace()
        .map(String::from)
        .collect()
}
