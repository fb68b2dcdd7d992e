use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("{path}: {msg}")]
    Load { path: String, msg: String },
    #[error("provider {name}: {msg}")]
    Invalid { name: String, msg: String },
    #[error("unknown provider {0}")]
    Unknown(String),
}

fn default_timeout() -> f64 {
    120.0
}
fn default_attempts() -> u32 {
    3
}
fn default_concurrency() -> usize {
    4
}

/// One chat-completion endpoint. The key itself is never stored; only the
/// name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub name: String,
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// USD per million prompt tokens.
    #[serde(default)]
    pub price_in: f64,
    /// USD per million completion tokens.
    #[serde(default)]
    pub price_out: f64,
    #[serde(default)]
    pub temperature: f64,
    /// Ask for the reasoning before the scores. Reserved; not implemented.
    #[serde(default)]
    pub reasoning_first: bool,
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        let bad = |msg: &str| {
            Err(ProviderError::Invalid {
                name: self.name.clone(),
                msg: msg.to_string(),
            })
        };
        if !(self.price_in >= 0.0 && self.price_out >= 0.0) {
            return bad("prices must be nonnegative");
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.reasoning_first {
            return bad("reasoning_first is not supported");
        }
        Ok(())
    }

    pub fn recognizer_id(&self) -> String {
        format!("llm:{}", self.name)
    }

    pub fn cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        prompt_tokens as f64 * self.price_in / 1e6 + completion_tokens as f64 * self.price_out / 1e6
    }
}

/// Named providers, read from a TOML or JSON file whose top-level keys are
/// provider names.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProviderSet(pub BTreeMap<String, ProviderConfig>);

impl ProviderSet {
    pub fn parse(text: &str, json: bool) -> Result<Self, String> {
        let mut map: BTreeMap<String, ProviderConfig> = if json {
            serde_json::from_str(text).map_err(|e| e.to_string())?
        } else {
            toml::from_str(text).map_err(|e| e.to_string())?
        };
        for (name, cfg) in map.iter_mut() {
            cfg.name = name.clone();
            cfg.validate().map_err(|e| e.to_string())?;
        }
        Ok(ProviderSet(map))
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let err = |msg: String| ProviderError::Load {
            path: path.display().to_string(),
            msg,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json).map_err(err)
    }

    pub fn get(&self, name: &str) -> Result<&ProviderConfig, ProviderError> {
        self.0.get(name).ok_or_else(|| ProviderError::Unknown(name.to_string()))
    }
}
