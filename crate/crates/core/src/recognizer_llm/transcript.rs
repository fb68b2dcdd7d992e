//! Record/replay of model calls, keyed by a hash of the request. One JSON
//! file per request: `<hash>.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::client::{ChatClient, ChatRequest, ChatResponse, ClientError};

pub fn request_hash(request: &ChatRequest) -> String {
    let canonical = serde_json::to_string(&request.body()).expect("request serialises");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request_hash: String,
    pub model: String,
    pub response: ChatResponse,
}

fn entry_path(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("{hash}.json"))
}

/// Answers from a transcript directory only; a miss is an error.
pub struct ReplayClient {
    dir: PathBuf,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayClient { dir: dir.into() }
    }
}

impl ChatClient for ReplayClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let hash = request_hash(request);
        let path = entry_path(&self.dir, &hash);
        let text = fs::read_to_string(&path).map_err(|_| ClientError::ReplayMiss(hash.clone()))?;
        let entry: TranscriptEntry =
            serde_json::from_str(&text).map_err(|e| ClientError::Transcript(format!("{}: {e}", path.display())))?;
        Ok(entry.response)
    }
}

/// Forwards to `inner` and stores every successful response.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: ChatClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RecordingClient { inner, dir })
    }
}

pub fn write_entry(dir: &Path, entry: &TranscriptEntry) -> std::io::Result<PathBuf> {
    let path = entry_path(dir, &entry.request_hash);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let json = serde_json::to_string_pretty(entry).expect("entry serialises");
    tmp.write_all(json.as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

impl<C: ChatClient> ChatClient for RecordingClient<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let response = self.inner.complete(request)?;
        let entry = TranscriptEntry {
            request_hash: request_hash(request),
            model: request.model.clone(),
            response: response.clone(),
        };
        write_entry(&self.dir, &entry).map_err(|e| ClientError::Transcript(e.to_string()))?;
        Ok(response)
    }
}
