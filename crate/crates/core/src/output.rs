//! Recovery of a JSON object from free-form model text.
//!
//! Models often wrap their JSON in prose. The scanner walks every `{` in
//! order and returns the first one that opens a syntactically valid JSON
//! object; brace depth is tracked with string and escape awareness so the
//! candidate end is exactly where a JSON lexer would close the object.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde_json::{Map, Value};

use crate::sample::{ParseFailure, ParseFailureReason, ParsedOutput};

/// Which fields a task requires from the model's JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputSchema {
    /// `{"answer", "reasoning_chain"?, "confidence"?}`
    Answer,
    /// `{"relation", "confidence"?}`
    Relation,
}

impl OutputSchema {
    pub fn required_field(self) -> &'static str {
        match self {
            OutputSchema::Answer => "answer",
            OutputSchema::Relation => "relation",
        }
    }

    /// JSON schema sent to backends that support constrained decoding.
    pub fn json_schema(self) -> Value {
        match self {
            OutputSchema::Answer => serde_json::json!({
                "type": "object",
                "properties": {
                    "reasoning_chain": {"type": "array", "items": {"type": "string"}},
                    "answer": {"type": "string"},
                    "confidence": {"type": "number", "minimum": 0, "maximum": 1}
                },
                "required": ["reasoning_chain", "answer", "confidence"]
            }),
            OutputSchema::Relation => serde_json::json!({
                "type": "object",
                "properties": {
                    "relation": {"type": "string"},
                    "confidence": {"type": "number", "minimum": 0, "maximum": 1}
                },
                "required": ["relation", "confidence"]
            }),
        }
    }
}

/// End offset (exclusive) of the balanced object opening at `start`, if
/// the braces close before the text ends.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    debug_assert_eq!(bytes[start], b'{');
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + offset + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// First JSON object embedded in `text`, with the reason it failed otherwise.
pub fn first_json_object(text: &str) -> Result<Map<String, Value>, ParseFailure> {
    let bytes = text.as_bytes();
    let mut saw_candidate = false;
    for start in bytes.iter().enumerate().filter(|(_, b)| **b == b'{').map(|(i, _)| i) {
        let Some(end) = balanced_end(bytes, start) else {
            continue;
        };
        saw_candidate = true;
        if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(&text[start..end]) {
            return Ok(map);
        }
    }
    if saw_candidate {
        Err(ParseFailure::new(
            ParseFailureReason::InvalidStructure,
            "balanced braces found but no valid JSON object",
        ))
    } else {
        Err(ParseFailure::new(ParseFailureReason::NoObjectFound, "no JSON object in output"))
    }
}

fn scalar_text(field: &str, value: &Value) -> Result<String, ParseFailure> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(ParseFailure::new(
            ParseFailureReason::InvalidStructure,
            format!("`{field}` is not a scalar"),
        )),
    }
}

fn confidence_of(map: &Map<String, Value>) -> Result<Option<f64>, ParseFailure> {
    match map.get("confidence") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => match n.as_f64() {
            Some(c) if (0.0..=1.0).contains(&c) => Ok(Some(c)),
            _ => Err(ParseFailure::new(
                ParseFailureReason::InvalidStructure,
                "`confidence` outside [0, 1]",
            )),
        },
        Some(_) => Err(ParseFailure::new(
            ParseFailureReason::InvalidStructure,
            "`confidence` is not a number",
        )),
    }
}

fn chain_of(map: &Map<String, Value>) -> Result<Vec<String>, ParseFailure> {
    match map.get("reasoning_chain") {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|step| scalar_text("reasoning_chain", step))
            .collect(),
        Some(_) => Err(ParseFailure::new(
            ParseFailureReason::InvalidStructure,
            "`reasoning_chain` is not a list",
        )),
    }
}

/// Parse model text into a [`ParsedOutput`]; failure is a value, never a panic.
pub fn parse_structured_output(
    raw_text: &str,
    schema: OutputSchema,
) -> Result<ParsedOutput, ParseFailure> {
    let map = first_json_object(raw_text)?;
    let required = schema.required_field();
    if !map.contains_key(required) || map[required].is_null() {
        return Err(ParseFailure::new(
            ParseFailureReason::MissingField,
            format!("missing `{required}`"),
        ));
    }
    let relation = match map.get("relation") {
        None | Some(Value::Null) => None,
        Some(v) => Some(scalar_text("relation", v)?),
    };
    let answer = match map.get("answer") {
        None | Some(Value::Null) => relation.clone().unwrap_or_default(),
        Some(v) => scalar_text("answer", v)?,
    };
    Ok(ParsedOutput {
        answer,
        reasoning_chain: chain_of(&map)?,
        confidence: confidence_of(&map)?,
        relation,
    })
}

impl ParsedOutput {
    /// Canonical JSON form; `parse_structured_output` inverts it.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ParsedOutput serializes")
    }
}
