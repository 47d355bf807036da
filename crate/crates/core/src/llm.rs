//! Provider-agnostic chat-completion transport with deterministic
//! record/replay.
//!
//! Three modes: `Http` posts to a chat-completion endpoint speaking the
//! prevailing open inference-server JSON convention, `Replay` serves
//! responses from a cassette file keyed by request id, and `Record` does
//! both — live call first, then an appended cassette entry. Cassettes are
//! JSON-lines and append-only, which makes every response-dependent test
//! and pipeline run reproducible offline.
//!
//! The API key is read from [`API_KEY_ENV`] at send time, lives only on the
//! request it authorizes, and is never logged, stored, or embedded in any
//! error message or cassette record.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable overriding the configured endpoint URL.
pub const ENDPOINT_ENV: &str = "MOLGATE_LLM_ENDPOINT";
/// Environment variable holding the bearer token, if the endpoint needs one.
pub const API_KEY_ENV: &str = "MOLGATE_API_KEY";

/// One chat-completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub prompt: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(
        prompt: impl Into<String>,
        model: impl Into<String>,
        temperature: f64,
        max_tokens: u32,
    ) -> Self {
        ChatRequest { prompt: prompt.into(), model: model.into(), temperature, max_tokens }
    }

    /// Stable identifier hashed from (prompt, model, temperature):
    /// length-framed SHA-256, hex-encoded. Identical inputs always produce
    /// the same id, across runs and platforms.
    pub fn request_id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.prompt.len() as u64).to_le_bytes());
        hasher.update(self.prompt.as_bytes());
        hasher.update((self.model.len() as u64).to_le_bytes());
        hasher.update(self.model.as_bytes());
        hasher.update(self.temperature.to_le_bytes());
        hex(&hasher.finalize())
    }
}

/// A completed exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    /// Wall-clock seconds spent; 0.0 for cassette replays.
    pub latency: f64,
    /// 1-based try that succeeded; never exceeds max_retries + 1.
    pub attempt: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportMode {
    Http,
    Replay,
    Record,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportConfig {
    pub mode: TransportMode,
    /// Required for Http and Record, unless [`ENDPOINT_ENV`] is set.
    pub endpoint: Option<String>,
    /// Required for Replay and Record.
    pub cassette_path: Option<PathBuf>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    /// Concurrent live requests allowed across all threads.
    pub max_in_flight: usize,
}

impl TransportConfig {
    fn defaults(mode: TransportMode) -> Self {
        TransportConfig {
            mode,
            endpoint: None,
            cassette_path: None,
            timeout: Duration::from_secs(30),
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            max_in_flight: 4,
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        TransportConfig { endpoint: Some(endpoint.into()), ..Self::defaults(TransportMode::Http) }
    }

    pub fn replay(cassette: impl Into<PathBuf>) -> Self {
        TransportConfig {
            cassette_path: Some(cassette.into()),
            ..Self::defaults(TransportMode::Replay)
        }
    }

    pub fn record(endpoint: impl Into<String>, cassette: impl Into<PathBuf>) -> Self {
        TransportConfig {
            endpoint: Some(endpoint.into()),
            cassette_path: Some(cassette.into()),
            ..Self::defaults(TransportMode::Record)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out after {0:.1}s")]
    Timeout(f64),
    #[error("transient failures exhausted {0} attempts")]
    TransientExhausted(u32),
    #[error("cassette has no entry for request {0}")]
    CassetteMiss(String),
    #[error("malformed provider reply: {0}")]
    MalformedProviderReply(String),
    #[error("invalid transport config: {0}")]
    InvalidConfig(String),
    #[error("cassette {path}: {reason}")]
    CassetteIo { path: String, reason: String },
}

/// Transport-level outcome below the retry loop.
#[derive(Debug)]
pub enum SendError {
    Timeout,
    /// Worth retrying: connection failures, 429, 5xx.
    Transient(String),
    /// Not worth retrying: client errors, local setup failures.
    Fatal(String),
}

/// The raw HTTP leg, injectable for tests.
pub trait HttpSender: Send + Sync {
    /// Posts `body` (a JSON chat-completion payload) and returns the raw
    /// response body on HTTP success.
    fn send(
        &self,
        endpoint: &str,
        body: &str,
        api_key: Option<&str>,
        timeout: Duration,
    ) -> Result<String, SendError>;
}

/// Production sender.
pub struct ReqwestSender;

impl HttpSender for ReqwestSender {
    fn send(
        &self,
        endpoint: &str,
        body: &str,
        api_key: Option<&str>,
        timeout: Duration,
    ) -> Result<String, SendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| SendError::Fatal(format!("client setup: {e}")))?;
        let mut request = client
            .post(endpoint)
            .header("Content-Type", "application/json")
            .body(body.to_string());
        if let Some(key) = api_key {
            request = request.bearer_auth(key);
        }
        match request.send() {
            Err(e) if e.is_timeout() => Err(SendError::Timeout),
            Err(e) => Err(SendError::Transient(format!("connection: {e}"))),
            Ok(response) => {
                let status = response.status();
                let text = response
                    .text()
                    .map_err(|e| SendError::Transient(format!("body read: {e}")))?;
                if status.is_success() {
                    Ok(text)
                } else if status.as_u16() == 429 || status.is_server_error() {
                    Err(SendError::Transient(format!("status {status}")))
                } else {
                    Err(SendError::Fatal(format!("status {status}")))
                }
            }
        }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

/// Minimal chat-completion body: `model`, `messages`, `temperature`,
/// `max_tokens`, nothing provider-specific.
#[derive(Serialize)]
struct WireBody<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

fn parse_reply(raw: &str) -> Result<String, LlmError> {
    let value: serde_json::Value = serde_json::from_str(raw)
        .map_err(|e| LlmError::MalformedProviderReply(format!("not JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| {
            LlmError::MalformedProviderReply("missing choices[0].message.content".into())
        })
}

/// One cassette line.
#[derive(Debug, Serialize, Deserialize)]
struct CassetteEntry {
    request_id: String,
    prompt_digest: String,
    response_text: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn prompt_digest(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex(&hasher.finalize())
}

fn cassette_io(path: &Path, e: impl std::fmt::Display) -> LlmError {
    LlmError::CassetteIo { path: path.display().to_string(), reason: e.to_string() }
}

/// Load a cassette as request_id → response_text. On duplicate ids the
/// later (most recently appended) entry wins.
fn read_cassette(path: &Path) -> Result<HashMap<String, String>, LlmError> {
    let raw = std::fs::read_to_string(path).map_err(|e| cassette_io(path, e))?;
    let mut entries = HashMap::new();
    for (lineno, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let entry: CassetteEntry = serde_json::from_str(line)
            .map_err(|e| cassette_io(path, format!("line {}: {e}", lineno + 1)))?;
        entries.insert(entry.request_id, entry.response_text);
    }
    Ok(entries)
}

static CASSETTE_APPEND: Mutex<()> = Mutex::new(());

fn append_cassette(path: &Path, entry: &CassetteEntry) -> Result<(), LlmError> {
    let _guard = CASSETTE_APPEND.lock().unwrap_or_else(|e| e.into_inner());
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| cassette_io(path, e))?;
    let line = serde_json::to_string(entry).expect("cassette entry serializes");
    writeln!(file, "{line}").map_err(|e| cassette_io(path, e))
}

/// Sleep inserted before retry `retry_index` (1-based). Doubles each time,
/// so delays are non-decreasing across attempts.
fn backoff_delay(base: Duration, retry_index: u32) -> Duration {
    base * 2u32.saturating_pow(retry_index.saturating_sub(1)).min(1 << 10)
}

/// Process-wide bound on concurrent live requests.
struct InFlightPermit;

fn in_flight() -> &'static (Mutex<usize>, Condvar) {
    static GATE: OnceLock<(Mutex<usize>, Condvar)> = OnceLock::new();
    GATE.get_or_init(|| (Mutex::new(0), Condvar::new()))
}

fn acquire_permit(limit: usize) -> InFlightPermit {
    let (lock, cv) = in_flight();
    let mut count = lock.lock().unwrap_or_else(|e| e.into_inner());
    while *count >= limit.max(1) {
        count = cv.wait(count).unwrap_or_else(|e| e.into_inner());
    }
    *count += 1;
    InFlightPermit
}

impl Drop for InFlightPermit {
    fn drop(&mut self) {
        let (lock, cv) = in_flight();
        *lock.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        cv.notify_one();
    }
}

fn http_roundtrip(
    req: &ChatRequest,
    cfg: &TransportConfig,
    sender: &dyn HttpSender,
) -> Result<ChatResponse, LlmError> {
    let endpoint = std::env::var(ENDPOINT_ENV)
        .ok()
        .filter(|v| !v.is_empty())
        .or_else(|| cfg.endpoint.clone())
        .ok_or_else(|| LlmError::InvalidConfig("live mode needs an endpoint".into()))?;
    let api_key = std::env::var(API_KEY_ENV).ok().filter(|v| !v.is_empty());
    let body = WireBody {
        model: &req.model,
        messages: vec![WireMessage { role: "user", content: &req.prompt }],
        temperature: req.temperature,
        max_tokens: req.max_tokens,
    };
    let body = serde_json::to_string(&body).expect("wire body serializes");

    let _permit = acquire_permit(cfg.max_in_flight);
    let start = Instant::now();
    let max_attempts = cfg.max_retries.saturating_add(1).max(1);
    let mut last = SendError::Transient("no attempt made".into());
    for attempt in 1..=max_attempts {
        if attempt > 1 {
            std::thread::sleep(backoff_delay(cfg.backoff_base, attempt - 1));
        }
        match sender.send(&endpoint, &body, api_key.as_deref(), cfg.timeout) {
            Ok(raw) => {
                let text = parse_reply(&raw)?;
                return Ok(ChatResponse {
                    text,
                    latency: start.elapsed().as_secs_f64(),
                    attempt,
                });
            }
            Err(SendError::Fatal(reason)) => {
                return Err(LlmError::MalformedProviderReply(reason));
            }
            Err(e) => last = e,
        }
    }
    match last {
        SendError::Timeout => Err(LlmError::Timeout(cfg.timeout.as_secs_f64())),
        _ => Err(LlmError::TransientExhausted(max_attempts)),
    }
}

/// Run one exchange through the configured transport with an injected
/// sender. [`complete`] is the production entry point.
pub fn complete_with(
    req: &ChatRequest,
    cfg: &TransportConfig,
    sender: &dyn HttpSender,
) -> Result<ChatResponse, LlmError> {
    match cfg.mode {
        TransportMode::Replay => {
            let path = cfg
                .cassette_path
                .as_ref()
                .ok_or_else(|| LlmError::InvalidConfig("replay mode needs a cassette".into()))?;
            let entries = read_cassette(path)?;
            let id = req.request_id();
            match entries.get(&id) {
                Some(text) => Ok(ChatResponse { text: text.clone(), latency: 0.0, attempt: 1 }),
                None => Err(LlmError::CassetteMiss(id)),
            }
        }
        TransportMode::Http => http_roundtrip(req, cfg, sender),
        TransportMode::Record => {
            let path = cfg
                .cassette_path
                .clone()
                .ok_or_else(|| LlmError::InvalidConfig("record mode needs a cassette".into()))?;
            let response = http_roundtrip(req, cfg, sender)?;
            append_cassette(
                &path,
                &CassetteEntry {
                    request_id: req.request_id(),
                    prompt_digest: prompt_digest(&req.prompt),
                    response_text: response.text.clone(),
                },
            )?;
            Ok(response)
        }
    }
}

/// Run one exchange through the configured transport.
pub fn complete(req: &ChatRequest, cfg: &TransportConfig) -> Result<ChatResponse, LlmError> {
    complete_with(req, cfg, &ReqwestSender)
}
