//! Chat model backends.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::messages::{Message, ModelTurn, Role, TokenUsage, ToolCallRequest};
use crate::config::LlmConfig;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("chat backend unreachable: {0}")]
    Transport(String),
    #[error("chat backend returned HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("unreadable chat response: {0}")]
    Response(String),
    #[error("script exhausted after {0} turns")]
    ScriptExhausted(usize),
}

/// A function declaration sent to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    /// JSON schema of the arguments object.
    pub parameters: Value,
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, messages: &[Message], tools: &[ToolSpec]) -> Result<ModelTurn, BackendError>;

    /// Model identifier recorded in provenance.
    fn model_id(&self) -> String;
}

/// Plays back a fixed sequence of turns, ignoring what it is sent.
pub struct ScriptedBackend {
    turns: Mutex<VecDeque<ModelTurn>>,
    /// Served forever once the queue is empty.
    repeat: Option<ModelTurn>,
    served: Mutex<usize>,
    model: String,
}

impl ScriptedBackend {
    pub fn new(turns: impl IntoIterator<Item = ModelTurn>) -> Self {
        ScriptedBackend {
            turns: Mutex::new(turns.into_iter().collect()),
            repeat: None,
            served: Mutex::new(0),
            model: "scripted".into(),
        }
    }

    /// Answers every request with `turn`.
    pub fn repeating(turn: ModelTurn) -> Self {
        ScriptedBackend { repeat: Some(turn), ..Self::new([]) }
    }

    /// The assistant turns of a saved transcript, in order.
    pub fn from_transcript(transcript: &[Message]) -> Self {
        Self::new(transcript.iter().filter_map(ModelTurn::from_message))
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _: &[Message], _: &[ToolSpec]) -> Result<ModelTurn, BackendError> {
        let mut served = self.served.lock().unwrap_or_else(|e| e.into_inner());
        let next = self.turns.lock().unwrap_or_else(|e| e.into_inner()).pop_front();
        match next.or_else(|| self.repeat.clone()) {
            Some(t) => {
                *served += 1;
                Ok(t)
            }
            None => Err(BackendError::ScriptExhausted(*served)),
        }
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// Any server speaking the OpenAI chat-completions protocol with tools.
pub struct OpenAiBackend {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    temperature: f32,
    api_key: Option<String>,
    retries: u32,
    backoff: Duration,
}

impl OpenAiBackend {
    pub fn new(cfg: &LlmConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(OpenAiBackend {
            client,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            api_key: std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty()),
            retries: cfg.retries,
            backoff: Duration::from_millis(500),
        })
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn request_body(&self, messages: &[Message], tools: &[ToolSpec]) -> Value {
        let msgs: Vec<Value> = messages.iter().map(wire_message).collect();
        let tools: Vec<Value> = tools
            .iter()
            .map(|t| json!({"type": "function", "function": {"name": t.name, "description": t.description, "parameters": t.parameters}}))
            .collect();
        json!({"model": self.model, "temperature": self.temperature, "messages": msgs, "tools": tools, "tool_choice": "auto"})
    }

    fn once(&self, body: &Value) -> Result<ModelTurn, BackendError> {
        let mut req = self.client.post(&self.url).json(body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Http { status: status.as_u16(), message: text.chars().take(500).collect() });
        }
        parse_completion(&text)
    }
}

impl ChatBackend for OpenAiBackend {
    fn complete(&self, messages: &[Message], tools: &[ToolSpec]) -> Result<ModelTurn, BackendError> {
        let body = self.request_body(messages, tools);
        let mut attempt = 0;
        loop {
            match self.once(&body) {
                Err(e) if attempt < self.retries && transient(&e) => {
                    log::debug!("chat request failed, retrying: {e}");
                    std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

fn transient(e: &BackendError) -> bool {
    match e {
        BackendError::Transport(_) => true,
        BackendError::Http { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

fn wire_message(m: &Message) -> Value {
    let role = match m.role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        Role::Tool => "tool",
    };
    let mut v = json!({"role": role, "content": m.content});
    if !m.tool_calls.is_empty() {
        v["tool_calls"] = m
            .tool_calls
            .iter()
            .map(|c| json!({"id": c.id, "type": "function", "function": {"name": c.name, "arguments": c.arguments}}))
            .collect();
    }
    if let Some(id) = &m.tool_call_id {
        v["tool_call_id"] = json!(id);
    }
    v
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tool_calls: Vec<WireCall>,
}

#[derive(Deserialize)]
struct WireCall {
    #[serde(default)]
    id: String,
    function: WireFunction,
}

#[derive(Deserialize)]
struct WireFunction {
    name: String,
    #[serde(default)]
    arguments: Option<Value>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

pub fn parse_completion(text: &str) -> Result<ModelTurn, BackendError> {
    let c: Completion = serde_json::from_str(text).map_err(|e| BackendError::Response(e.to_string()))?;
    let choice = c.choices.into_iter().next().ok_or_else(|| BackendError::Response("no choices".into()))?;
    let tool_calls = choice
        .message
        .tool_calls
        .into_iter()
        .enumerate()
        .map(|(i, w)| ToolCallRequest {
            id: if w.id.is_empty() { format!("call_{i}") } else { w.id },
            name: w.function.name,
            arguments: match w.function.arguments {
                Some(Value::String(s)) => s,
                Some(v) => v.to_string(),
                None => String::new(),
            },
        })
        .collect();
    let usage = c
        .usage
        .map(|u| TokenUsage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens })
        .unwrap_or_default();
    Ok(ModelTurn { content: choice.message.content.unwrap_or_default(), tool_calls, usage })
}
