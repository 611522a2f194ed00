use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::prompting::{Author, ChatMessage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSettings {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            model: "gpt-4".to_string(),
            temperature: 0.3,
            max_tokens: 4096,
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("request failed: {0}")]
    Http(String),
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("replay fixture {dir} has no response number {index}")]
    Exhausted { dir: String, index: usize },
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("cancelled")]
    Cancelled,
}

/// Something that answers a chat history with text.
pub trait LlmProvider: Send + Sync {
    fn send(&self, history: &[ChatMessage], settings: &ProviderSettings) -> Result<String, ProviderError>;

    /// Whether messages with the system author are understood. When not, the
    /// orchestrator folds them into the first user message.
    fn supports_system_role(&self) -> bool {
        true
    }
}

/// Client for OpenAI-style `chat/completions` endpoints.
pub struct HttpChatProvider {
    endpoint: String,
    api_key: Option<String>,
    system_role: bool,
    retries: u32,
}

impl HttpChatProvider {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        HttpChatProvider { endpoint: endpoint.into(), api_key, system_role: true, retries: 3 }
    }

    pub fn without_system_role(mut self) -> Self {
        self.system_role = false;
        self
    }

    pub fn request_body(history: &[ChatMessage], settings: &ProviderSettings) -> serde_json::Value {
        let messages: Vec<_> = history
            .iter()
            .map(|m| {
                let role = match m.author {
                    Author::System => "system",
                    Author::User => "user",
                    Author::Assistant => "assistant",
                };
                json!({ "role": role, "content": m.content })
            })
            .collect();
        json!({
            "model": settings.model,
            "temperature": settings.temperature,
            "max_tokens": settings.max_tokens,
            "messages": messages,
        })
    }

    pub fn response_text(body: &serde_json::Value) -> Result<String, ProviderError> {
        body.pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                let mut shown = body.to_string();
                shown.truncate(300);
                ProviderError::BadResponse(shown)
            })
    }
}

impl LlmProvider for HttpChatProvider {
    fn send(&self, history: &[ChatMessage], settings: &ProviderSettings) -> Result<String, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| ProviderError::Http(e.to_string()))?;
        let body = Self::request_body(history, settings);
        let mut delay = Duration::from_secs(1);
        let mut attempt = 0;
        loop {
            let mut req = client.post(&self.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let resp = req.send().map_err(|e| {
                if e.is_timeout() {
                    ProviderError::Timeout(settings.timeout)
                } else {
                    ProviderError::Http(e.to_string())
                }
            })?;
            let status = resp.status();
            if (status.as_u16() == 429 || status.is_server_error()) && attempt < self.retries {
                attempt += 1;
                tracing::warn!(%status, ?delay, "provider busy, retrying");
                std::thread::sleep(delay);
                delay *= 2;
                continue;
            }
            if !status.is_success() {
                let text = resp.text().unwrap_or_default();
                return Err(ProviderError::Http(format!("{status}: {}", text.chars().take(300).collect::<String>())));
            }
            let json: serde_json::Value = resp.json().map_err(|e| ProviderError::BadResponse(e.to_string()))?;
            return Self::response_text(&json);
        }
    }

    fn supports_system_role(&self) -> bool {
        self.system_role
    }
}

/// Answers with recorded responses read from a directory of numbered files
/// (`01.txt`, `02.txt`, ...), one per call, in order.
#[derive(Debug)]
pub struct ReplayProvider {
    dir: PathBuf,
    files: Vec<PathBuf>,
    cursor: AtomicUsize,
}

fn leading_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

impl ReplayProvider {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        let mut files: Vec<(u64, PathBuf)> = fs::read_dir(&dir)?
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .filter_map(|p| leading_number(&p).map(|n| (n, p)))
            .collect();
        files.sort();
        Ok(ReplayProvider { dir, files: files.into_iter().map(|(_, p)| p).collect(), cursor: AtomicUsize::new(0) })
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Responses handed out so far.
    pub fn consumed(&self) -> usize {
        self.cursor.load(Ordering::SeqCst).min(self.files.len())
    }
}

impl LlmProvider for ReplayProvider {
    fn send(&self, _history: &[ChatMessage], _settings: &ProviderSettings) -> Result<String, ProviderError> {
        let i = self.cursor.fetch_add(1, Ordering::SeqCst);
        let exhausted = || ProviderError::Exhausted { dir: self.dir.display().to_string(), index: i + 1 };
        let path = self.files.get(i).ok_or_else(exhausted)?;
        fs::read_to_string(path).map_err(|e| ProviderError::Http(format!("{}: {e}", path.display())))
    }
}

/// Test double: hands out a fixed list of responses and records the history
/// of every call.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    responses: Mutex<VecDeque<String>>,
    repeat: Option<String>,
    calls: Mutex<Vec<Vec<ChatMessage>>>,
}

impl ScriptedProvider {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        ScriptedProvider {
            responses: Mutex::new(responses.into_iter().map(Into::into).collect()),
            ..Default::default()
        }
    }

    /// Answers every call with `response`.
    pub fn repeating(response: impl Into<String>) -> Self {
        ScriptedProvider { repeat: Some(response.into()), ..Default::default() }
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }

    pub fn calls(&self) -> Vec<Vec<ChatMessage>> {
        self.calls.lock().unwrap().clone()
    }
}

impl LlmProvider for ScriptedProvider {
    fn send(&self, history: &[ChatMessage], _settings: &ProviderSettings) -> Result<String, ProviderError> {
        self.calls.lock().unwrap().push(history.to_vec());
        if let Some(next) = self.responses.lock().unwrap().pop_front() {
            return Ok(next);
        }
        self.repeat.clone().ok_or(ProviderError::Exhausted { dir: "script".into(), index: self.call_count() })
    }
}
