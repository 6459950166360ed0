//! Prompt bundles for the two task families.

use consensus_core::OutputSchema;
use serde::{Deserialize, Serialize};

use crate::dataset::QuestionRecord;
use consensus_core::relation::RelationInstance;

pub const EXTRACTION_SYSTEM_PROMPT: &str = include_str!("../resources/extraction_prompt.txt");
pub const MULTIHOP_SYSTEM_PROMPT: &str = include_str!("../resources/multihop_prompt.txt");

/// Everything sent to a model for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub question_id: String,
    pub system: String,
    pub user: String,
    pub schema: OutputSchema,
}

impl PromptBundle {
    pub fn multihop(record: &QuestionRecord) -> Self {
        let mut user = String::new();
        if let Some(context) = &record.context {
            user.push_str("Context:\n");
            for (title, sentences) in context {
                user.push_str(&format!("[{title}] {}\n", sentences.join(" ")));
            }
            user.push('\n');
        }
        user.push_str("Question: ");
        user.push_str(&record.question);
        Self {
            question_id: record.id.clone(),
            system: MULTIHOP_SYSTEM_PROMPT.to_string(),
            user,
            schema: OutputSchema::Answer,
        }
    }

    pub fn extraction(instance: &RelationInstance) -> Self {
        Self {
            question_id: instance.doc_id.clone(),
            system: EXTRACTION_SYSTEM_PROMPT.to_string(),
            user: format!("Text: {}\nHead: {}\nTail: {}", instance.text, instance.head, instance.tail),
            schema: OutputSchema::Relation,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.system.trim().is_empty() && self.user.trim().is_empty()
    }
}
