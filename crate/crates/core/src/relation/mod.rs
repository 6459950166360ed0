//! Relation-extraction scoring with soft label matching.

pub mod confusion;
pub mod dictionary;
pub mod labels;
pub mod matching;
pub mod scoring;

pub use confusion::{build_confusion, ConfusionBuild, ConfusionMatrix};
pub use dictionary::{SynonymDictionary, SynonymGroup};
pub use labels::{normalize_label, RelationLabels, Resolution};
pub use matching::{soft_match, MatchResult, MatchRule};
pub use scoring::{score_extraction, ExtractionScore, RelationInstance, RelationPrediction};
