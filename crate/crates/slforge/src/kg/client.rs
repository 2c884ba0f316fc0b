use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use slforge_core::sparql::{declare_used_prefixes, parse_query_with, serialize_query, PrefixTable};

use super::results::{parse_graph, parse_results_json, JsonOutcome, ResultTable};
use crate::config::EndpointConfig;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum KgError {
    #[error("timeout")]
    Timeout,
    #[error("endpoint error (HTTP {status}): {message}")]
    EndpointError { status: u16, message: String },
    #[error("out of memory: {message}")]
    MemoryError { message: String },
    #[error("malformed response: {message}")]
    MalformedResponse { message: String },
    #[error("endpoint unavailable: {message}")]
    Unavailable { message: String },
}

impl KgError {
    pub fn class(&self) -> &'static str {
        match self {
            KgError::Timeout => "timeout",
            KgError::EndpointError { .. } => "endpoint-error",
            KgError::MemoryError { .. } => "memory",
            KgError::MalformedResponse { .. } => "malformed-response",
            KgError::Unavailable { .. } => "unavailable",
        }
    }

    /// The endpoint could not be asked, as opposed to refusing the query.
    pub fn is_unavailable(&self) -> bool {
        matches!(self, KgError::Unavailable { .. })
    }
}

/// Anything that answers SPARQL queries.
pub trait Endpoint: Sync {
    /// Runs `sparql`, keeping at most `max_rows` rows.
    fn execute_with(&self, sparql: &str, timeout: Duration, max_rows: usize) -> Result<ResultTable, KgError>;

    fn default_timeout(&self) -> Duration;

    fn execute(&self, sparql: &str, max_rows: usize) -> Result<ResultTable, KgError> {
        self.execute_with(sparql, self.default_timeout(), max_rows)
    }
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn enter(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// SPARQL protocol client: form-encoded POST, JSON results preferred.
pub struct HttpEndpoint {
    client: reqwest::blocking::Client,
    url: String,
    timeout: Duration,
    retries: u32,
    backoff: Duration,
    table: PrefixTable,
    gate: Gate,
}

const ACCEPT: &str = "application/sparql-results+json, application/n-triples;q=0.9, text/turtle;q=0.8";
const MESSAGE_CAP: usize = 500;

impl HttpEndpoint {
    pub fn new(cfg: &EndpointConfig, table: PrefixTable) -> Result<Self, KgError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(None)
            .user_agent(concat!("slforge/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| KgError::Unavailable { message: e.to_string() })?;
        Ok(HttpEndpoint {
            client,
            url: cfg.url.clone(),
            timeout: cfg.timeout(),
            retries: cfg.retries,
            backoff: Duration::from_millis(cfg.backoff_ms),
            table,
            gate: Gate::new(cfg.max_in_flight),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn once(&self, text: &str, timeout: Duration, max_rows: usize) -> Result<ResultTable, KgError> {
        let _slot = self.gate.enter();
        let resp = self
            .client
            .post(&self.url)
            .header(reqwest::header::ACCEPT, ACCEPT)
            .form(&[("query", text)])
            .timeout(timeout)
            .send()
            .map_err(transport)?;
        let status = resp.status();
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_ascii_lowercase();
        let body = resp.bytes().map_err(transport)?;
        if !status.is_success() {
            return Err(classify_failure(status.as_u16(), &String::from_utf8_lossy(&body)));
        }
        if content_type.contains("n-triples") || content_type.contains("turtle") {
            return parse_graph(&body, content_type.contains("turtle"), max_rows)
                .map_err(|message| KgError::MalformedResponse { message });
        }
        match parse_results_json(&body, max_rows) {
            Ok(JsonOutcome::Table(t)) => Ok(t),
            Ok(JsonOutcome::Exception(e)) => Err(classify_failure(status.as_u16(), &e)),
            Err(message) => Err(KgError::MalformedResponse { message }),
        }
    }
}

impl Endpoint for HttpEndpoint {
    fn execute_with(&self, sparql: &str, timeout: Duration, max_rows: usize) -> Result<ResultTable, KgError> {
        let text = standalone_query(sparql, &self.table);
        let mut attempt = 0;
        loop {
            match self.once(&text, timeout, max_rows) {
                Err(KgError::EndpointError { status, message }) if status >= 500 && attempt < self.retries => {
                    log::debug!("retrying after HTTP {status}: {message}");
                    std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn default_timeout(&self) -> Duration {
        self.timeout
    }
}

/// The query with `PREFIX` declarations for every prefix it uses, so that
/// endpoints without the query service's built-in prefixes accept it.
/// Unparseable text is sent as is.
pub fn standalone_query(sparql: &str, table: &PrefixTable) -> String {
    match parse_query_with(sparql, table) {
        Ok(mut q) => {
            declare_used_prefixes(&mut q);
            serialize_query(&q)
        }
        Err(_) => sparql.to_string(),
    }
}

fn transport(e: reqwest::Error) -> KgError {
    if e.is_timeout() {
        KgError::Timeout
    } else {
        KgError::Unavailable { message: e.to_string() }
    }
}

fn cap(s: &str) -> String {
    let s = s.trim();
    match s.char_indices().nth(MESSAGE_CAP) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

/// Sorts an error response into the error classes by status and message.
pub fn classify_failure(status: u16, body: &str) -> KgError {
    let lower = body.to_ascii_lowercase();
    let memory = ["out of memory", "outofmemory", "memory limit", "insufficient memory", "resource exhausted"];
    let timeout = ["timeout", "timed out", "time limit"];
    if memory.iter().any(|m| lower.contains(m)) {
        KgError::MemoryError { message: cap(body) }
    } else if status == 408 || status == 504 || timeout.iter().any(|t| lower.contains(t)) {
        KgError::Timeout
    } else if status == 502 || status == 503 {
        KgError::Unavailable { message: format!("HTTP {status}: {}", cap(body)) }
    } else {
        KgError::EndpointError { status, message: cap(body) }
    }
}
