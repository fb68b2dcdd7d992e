//! Zero-shot recognition with a chat-completion model: one prompt per
//! problem, the reply parsed into scores and a most-likely set.

mod client;
mod prompt;
mod provider;
mod response;
mod transcript;

pub use client::{decode_completion, ChatClient, ChatRequest, ChatResponse, ClientError, HttpClient};
pub use prompt::{build_prompt, PromptBundle, TEMPLATE};
pub use provider::{ProviderConfig, ProviderError, ProviderSet};
pub use response::{
    parse_response, predicted_set, render_response, validate_scores, ParsedResponse, SUM_TOLERANCE, TIE_EPSILON,
};
pub use transcript::{request_hash, write_entry, RecordingClient, ReplayClient, TranscriptEntry};

use crate::bundle::RecognitionBundle;
use crate::result::{GoalScore, ParseStatus, RecognitionResult};

/// Runs one problem. Client failures do not propagate: they produce a
/// garbage result carrying the error text, so a run can continue.
pub fn recognize_llm(bundle: &RecognitionBundle, provider: &ProviderConfig, client: &dyn ChatClient) -> RecognitionResult {
    let prompt = build_prompt(bundle);
    let request = ChatRequest::new(provider, prompt.prompt);
    let mut result = RecognitionResult::empty(&provider.recognizer_id(), &bundle.id);
    let response = match client.complete(&request) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{}: {}: {e}", bundle.id, provider.name);
            result.parse_status = Some(ParseStatus::Garbage);
            result.error = Some(e.to_string());
            return result;
        }
    };
    apply_response(&mut result, &response.content, bundle);
    result.wall_time = response.latency;
    if let Some(u) = response.usage {
        result.usage = Some(u);
        result.cost = Some(provider.cost(u.prompt(), u.completion()));
    }
    result
}

/// Parses a reply and fills scores, prediction, reasoning and status.
pub fn apply_response(result: &mut RecognitionResult, text: &str, bundle: &RecognitionBundle) {
    let parsed = validate_scores(parse_response(text, &bundle.hypotheses));
    result.predicted = predicted_set(&parsed);
    result.scores = parsed
        .scores
        .iter()
        .enumerate()
        .filter_map(|(index, s)| {
            s.map(|score| GoalScore {
                index,
                score,
                matched: None,
                total: None,
            })
        })
        .collect();
    result.reasoning = (!parsed.reasoning.is_empty()).then(|| parsed.reasoning.clone());
    result.parse_status = Some(parsed.status);
    result.scores_flagged = parsed.flagged;
}
