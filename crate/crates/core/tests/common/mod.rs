#![allow(dead_code)]

use std::path::{Path, PathBuf};

use goalrec::bundle::RecognitionBundle;
use goalrec::eval::{load_suite, RecognizerSpec, RunConfig};
use goalrec::landmarks::extract_for_template;
use goalrec::obs_gen::Observability;
use goalrec::recognizer_llm::{
    build_prompt, render_response, request_hash, write_entry, ChatRequest, ChatResponse, ParsedResponse,
    ProviderSet, TranscriptEntry,
};
use goalrec::recognizer_lm::{argmax_set, lm_score};
use goalrec::result::{ParseStatus, TokenUsage};

pub const DOMAINS: [&str; 4] = ["blocks-world", "campus", "driverlog", "dwr"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn domain_file(name: &str) -> PathBuf {
    let file = if name == "blocks-world" { "blocks-world" } else { name };
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("domains/{file}.pddl"))
}

pub fn providers() -> ProviderSet {
    ProviderSet::load(&fixtures().join("replay/providers.toml")).expect("fixture providers load")
}

pub fn replay_config(out: &Path, run_id: &str) -> RunConfig {
    RunConfig {
        bench_root: fixtures().join("bench"),
        domains: DOMAINS.iter().map(|d| d.to_string()).collect(),
        observability: Observability::ALL.to_vec(),
        recognizers: vec![RecognizerSpec::Llm("mock".into())],
        seed: 0,
        jobs: 4,
        out: out.to_path_buf(),
        run_id: run_id.to_string(),
        providers: Some(providers()),
        replay: Some(fixtures().join("replay/transcripts")),
        record: None,
        lm_cache: None,
    }
}

pub fn bench_bundles() -> Vec<RecognitionBundle> {
    let mut cfg = replay_config(Path::new("unused"), "unused");
    cfg.recognizers = vec![RecognizerSpec::Lm];
    let (bundles, failures) = load_suite(&cfg).expect("bench loads");
    assert!(failures.is_empty(), "{failures:?}");
    bundles
}

fn id_hash(id: &str) -> u64 {
    id.bytes().fold(17u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64))
}

/// A stand-in model: most replies follow the output format with scores
/// proportional to observed landmarks, some drop the goal list, and some
/// are unusable.
pub fn mock_reply(b: &RecognitionBundle) -> String {
    let h = id_hash(&b.id);
    match h % 10 {
        0 => return "[:answer A]\n".into(),
        1 => return String::new(),
        _ => {}
    }
    let lms = extract_for_template(&b.domain, &b.template, &b.hypotheses).unwrap();
    let scores: Vec<_> = lms.sets.iter().map(|l| lm_score(l, &b.observations)).collect();
    let raw: Vec<f64> = scores.iter().map(|s| s.to_f64() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    let best = argmax_set(&scores);
    let parsed = ParsedResponse {
        scores: raw.iter().map(|r| Some(r / sum)).collect(),
        most_likely: if h % 10 == 2 { Default::default() } else { best },
        reasoning: format!("The {} observed actions match these goals best.", b.observations.len()),
        status: ParseStatus::Ok,
        flagged: false,
    };
    render_response(&parsed, &b.hypotheses)
}

/// Writes one transcript entry per bench bundle for the `mock` provider.
pub fn write_mock_transcripts(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let provider = providers().get("mock").unwrap().clone();
    for b in bench_bundles() {
        let request = ChatRequest::new(&provider, build_prompt(&b).prompt);
        let content = mock_reply(&b);
        let h = id_hash(&b.id);
        let entry = TranscriptEntry {
            request_hash: request_hash(&request),
            model: provider.model.clone(),
            response: ChatResponse {
                usage: Some(TokenUsage::new(request.prompt.len() as u64 / 4, content.len() as u64 / 4)),
                content,
                latency: 1.0 + (h % 100) as f64 / 100.0,
            },
        };
        write_entry(dir, &entry).unwrap();
    }
}
