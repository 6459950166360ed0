use std::collections::BTreeMap;
use std::sync::Arc;

use consensus_core::OutputSchema;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError, ChatRequest};

/// Script entry that makes the simulator emit text with no JSON object.
pub const UNPARSED_TOKEN: &str = "!unparsed";
/// Script entry replaced by the question's gold answer.
pub const GOLD_TOKEN: &str = "@gold";

/// Answers for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimScript {
    /// Sample `i` answers `answers[i % len]`.
    Multiset(Vec<String>),
    /// Each sample draws from these weights with the request seed.
    Categorical(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimProfile {
    /// Used for questions without their own script.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<SimScript>,
    #[serde(default)]
    pub questions: BTreeMap<String, SimScript>,
    /// Self-reported confidence attached to every answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl SimProfile {
    pub fn always(answer: &str) -> Self {
        Self { default: Some(SimScript::Multiset(vec![answer.into()])), ..Self::default() }
    }

    pub fn with_question(mut self, id: &str, script: SimScript) -> Self {
        self.questions.insert(id.into(), script);
        self
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic stand-in for a model server.
pub struct SimBackend {
    profile: SimProfile,
    golds: Arc<BTreeMap<String, String>>,
}

impl SimBackend {
    pub fn new(profile: SimProfile, golds: Arc<BTreeMap<String, String>>) -> Self {
        Self { profile, golds }
    }

    fn pick(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let qid = &request.prompt.question_id;
        let script = self
            .profile
            .questions
            .get(qid)
            .or(self.profile.default.as_ref())
            .ok_or_else(|| BackendError::Transport(format!("simulator has no script for `{qid}`")))?;
        let entry = match script {
            SimScript::Multiset(answers) if !answers.is_empty() => answers[request.sample_index % answers.len()].clone(),
            SimScript::Categorical(weights) if weights.values().any(|w| *w > 0.0) => {
                let total: f64 = weights.values().filter(|w| **w > 0.0).sum();
                let mut rng = ChaCha8Rng::seed_from_u64(request.options.seed ^ fnv1a(qid.as_bytes()));
                let mut u = rng.random::<f64>() * total;
                let mut chosen = None;
                for (answer, w) in weights.iter().filter(|(_, w)| **w > 0.0) {
                    chosen = Some(answer);
                    if u < *w {
                        break;
                    }
                    u -= w;
                }
                chosen.expect("positive weight exists").clone()
            }
            _ => return Err(BackendError::Transport(format!("empty simulator script for `{qid}`"))),
        };
        if entry == GOLD_TOKEN {
            return self
                .golds
                .get(qid)
                .cloned()
                .ok_or_else(|| BackendError::Transport(format!("simulator has no gold for `{qid}`")));
        }
        Ok(entry)
    }
}

impl Backend for SimBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let answer = self.pick(request)?;
        let content = if answer == UNPARSED_TOKEN {
            format!("{{{}: ", request.prompt.schema.required_field())
        } else {
            let mut payload = match request.prompt.schema {
                OutputSchema::Answer => json!({
                    "answer": answer,
                    "reasoning_chain": ["recall the bridge entity", "answer from it"],
                }),
                OutputSchema::Relation => json!({ "relation": answer }),
            };
            if let Some(c) = self.profile.confidence {
                payload["confidence"] = json!(c);
            }
            payload.to_string()
        };
        Ok(json!({
            "model": request.endpoint.model_id,
            "created_at": "1970-01-01T00:00:00Z",
            "message": {"role": "assistant", "content": content},
            "done": true,
        })
        .to_string())
    }
}
