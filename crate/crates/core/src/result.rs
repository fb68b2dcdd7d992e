//! Recogniser output shared by every recogniser.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseStatus {
    Ok,
    Partial,
    Garbage,
}

impl ParseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseStatus::Ok => "ok",
            ParseStatus::Partial => "partial",
            ParseStatus::Garbage => "garbage",
        }
    }
}

/// Token counts of one model call. Built only through [`TokenUsage::new`]
/// so the total is always prompt + completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawUsage")]
pub struct TokenUsage {
    prompt: u64,
    completion: u64,
    total: u64,
}

// The stored total is ignored on input and recomputed.
#[derive(Deserialize)]
struct RawUsage {
    prompt: u64,
    completion: u64,
}

impl From<RawUsage> for TokenUsage {
    fn from(r: RawUsage) -> Self {
        TokenUsage::new(r.prompt, r.completion)
    }
}

impl TokenUsage {
    pub fn new(prompt: u64, completion: u64) -> Self {
        TokenUsage {
            prompt,
            completion,
            total: prompt + completion,
        }
    }

    pub fn prompt(&self) -> u64 {
        self.prompt
    }

    pub fn completion(&self) -> u64 {
        self.completion
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Score of one hypothesis. Landmark scores carry `matched`/`total`, so
/// `score` is only a rendering of an exact fraction there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalScore {
    pub index: usize,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matched: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub recognizer: String,
    pub bundle_id: String,
    pub scores: Vec<GoalScore>,
    pub predicted: BTreeSet<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reasoning: Option<String>,
    /// Seconds spent recognising. For the landmark recogniser this excludes
    /// extraction, which is reported in `extract_time`.
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extract_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub usage: Option<TokenUsage>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parse_status: Option<ParseStatus>,
    /// Set when the scores were renormalised or failed the sum check.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub scores_flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl RecognitionResult {
    pub fn empty(recognizer: &str, bundle_id: &str) -> Self {
        RecognitionResult {
            recognizer: recognizer.to_string(),
            bundle_id: bundle_id.to_string(),
            scores: Vec::new(),
            predicted: BTreeSet::new(),
            reasoning: None,
            wall_time: 0.0,
            extract_time: None,
            usage: None,
            cost: None,
            parse_status: None,
            scores_flagged: false,
            error: None,
        }
    }

    pub fn spread(&self) -> usize {
        self.predicted.len()
    }
}
