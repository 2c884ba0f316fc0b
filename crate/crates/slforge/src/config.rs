//! Pipeline configuration: one TOML file plus environment overrides.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use slforge_core::sparql::PrefixTable;
use slforge_core::split::SplitRatios;

pub const ENV_ENDPOINT: &str = "SLF_ENDPOINT";
pub const ENV_TIMEOUT: &str = "SLF_TIMEOUT_S";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    Ratios([f64; 3]),
    #[error("environment variable {name}: {message}")]
    Env { name: &'static str, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub timeout_s: f64,
    /// Upper bound on concurrent requests to the endpoint.
    pub max_in_flight: usize,
    /// Extra attempts after a transient 5xx response.
    pub retries: u32,
    pub backoff_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "http://localhost:7001".into(),
            timeout_s: 60.0,
            max_in_flight: 8,
            retries: 1,
            backoff_ms: 500,
        }
    }
}

impl EndpointConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// `openai` (any OpenAI-compatible chat API) or `script`.
    pub backend: String,
    pub base_url: String,
    pub model: String,
    pub temperature: f32,
    pub api_key_env: String,
    pub timeout_s: f64,
    pub retries: u32,
    /// Model turns per entry id, played back by the `script` backend.
    pub script: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            backend: "openai".into(),
            base_url: "http://localhost:8000/v1".into(),
            model: "Qwen/Qwen3-Next-80B-A3B-Instruct".into(),
            temperature: 0.2,
            api_key_env: "SLF_LLM_API_KEY".into(),
            timeout_s: 300.0,
            retries: 2,
            script: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// `openai` or `hashing`.
    pub backend: String,
    pub base_url: String,
    pub model: String,
    pub batch_size: usize,
    pub api_key_env: String,
    pub timeout_s: f64,
    /// Output size of the hashing embedder.
    pub dim: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            backend: "openai".into(),
            base_url: "http://localhost:8001/v1".into(),
            model: "Qwen/Qwen3-Embedding-0.6B".into(),
            batch_size: 64,
            api_key_env: "SLF_EMBED_API_KEY".into(),
            timeout_s: 120.0,
            dim: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_steps: usize,
    /// Verification rounds granted after a failed final query.
    pub reiterations: usize,
    pub max_rows: usize,
    pub cell_width: usize,
    /// Candidates listed by the search functions.
    pub search_k: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 20, reiterations: 2, max_rows: 30, cell_width: 120, search_k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnrichConfig {
    pub language: String,
    pub chunk_size: usize,
    pub label_predicate: String,
    pub alias_predicate: String,
    pub description_predicate: String,
    pub property_class: String,
    /// Name of the knowledge graph in agent instructions.
    pub kg_name: String,
}

impl Default for EnrichConfig {
    fn default() -> Self {
        EnrichConfig {
            language: "en".into(),
            chunk_size: 100,
            label_predicate: "http://www.w3.org/2000/01/rdf-schema#label".into(),
            alias_predicate: "http://www.w3.org/2004/02/skos/core#altLabel".into(),
            description_predicate: "http://schema.org/description".into(),
            property_class: "http://wikiba.se/ontology#Property".into(),
            kg_name: "Wikidata".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratios: SplitRatios,
    pub seed: u64,
    /// `threshold` or `hdbscan`.
    pub clustering: String,
    pub similarity: f64,
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub cluster_dim: usize,
    pub viz_dim: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratios: SplitRatios::default(),
            seed: 42,
            clustering: "threshold".into(),
            similarity: 0.95,
            min_cluster_size: 2,
            min_samples: 2,
            cluster_dim: 50,
            viz_dim: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory holding the intermediate files of every stage.
    pub work_dir: PathBuf,
    /// TOML table of prefix label to namespace merged over the built-in one.
    pub prefixes: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths { work_dir: PathBuf::from("work"), prefixes: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub endpoint: EndpointConfig,
    pub llm: LlmConfig,
    pub embedding: EmbeddingConfig,
    pub limits: Limits,
    pub enrich: EnrichConfig,
    pub split: SplitConfig,
    pub paths: Paths,
    pub workers: usize,
}

impl PipelineConfig {
    /// Reads `path`, applies environment overrides and validates.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|message| ConfigError::Parse { path: path.into(), message })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_relative(dir);
        }
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults plus environment overrides, for runs without a config file.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.work_dir);
        if let Some(p) = &mut self.paths.prefixes {
            fix(p);
        }
        if let Some(p) = &mut self.llm.script {
            fix(p);
        }
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(url) = get(ENV_ENDPOINT) {
            self.endpoint.url = url;
        }
        if let Some(t) = get(ENV_TIMEOUT) {
            self.endpoint.timeout_s = t.trim().parse().map_err(|_| ConfigError::Env {
                name: ENV_TIMEOUT,
                message: format!("not a number of seconds: {t:?}"),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.split.ratios.is_valid() {
            return Err(ConfigError::Ratios(self.split.ratios.as_array()));
        }
        if let Some(p) = &self.paths.prefixes {
            if !p.exists() {
                return Err(ConfigError::MissingPath { field: "paths.prefixes", path: p.clone() });
            }
        }
        if let Some(p) = &self.llm.script {
            if !p.exists() {
                return Err(ConfigError::MissingPath { field: "llm.script", path: p.clone() });
            }
        }
        if !(self.endpoint.timeout_s > 0.0 && self.endpoint.timeout_s.is_finite()) {
            return Err(ConfigError::Invalid("endpoint.timeout_s must be positive".into()));
        }
        if self.limits.max_steps == 0 {
            return Err(ConfigError::Invalid("limits.max_steps must be at least 1".into()));
        }
        if !matches!(self.llm.backend.as_str(), "openai" | "script") {
            return Err(ConfigError::Invalid(format!("llm.backend: unknown backend {:?}", self.llm.backend)));
        }
        if self.llm.backend == "script" && self.llm.script.is_none() {
            return Err(ConfigError::Invalid("llm.backend = \"script\" needs llm.script".into()));
        }
        if !matches!(self.embedding.backend.as_str(), "openai" | "hashing") {
            return Err(ConfigError::Invalid(format!("embedding.backend: unknown backend {:?}", self.embedding.backend)));
        }
        if !matches!(self.split.clustering.as_str(), "threshold" | "hdbscan") {
            return Err(ConfigError::Invalid(format!("split.clustering: unknown method {:?}", self.split.clustering)));
        }
        if self.split.min_cluster_size < 2 {
            return Err(ConfigError::Invalid("split.min_cluster_size must be at least 2".into()));
        }
        if self.embedding.batch_size == 0 || self.enrich.chunk_size == 0 {
            return Err(ConfigError::Invalid("batch and chunk sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.workers
        }
    }

    /// The built-in prefix table with the configured overrides applied.
    pub fn prefix_table(&self) -> Result<PrefixTable, ConfigError> {
        match &self.paths.prefixes {
            None => Ok(PrefixTable::wikidata()),
            Some(p) => load_prefix_table(p),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrefixFile {
    #[serde(default)]
    replace: bool,
    prefixes: std::collections::BTreeMap<String, String>,
}

/// Reads a TOML prefix file:
///
/// ```toml
/// replace = false          # true: start from an empty table
/// [prefixes]
/// wd = "http://www.wikidata.org/entity/"
/// ```
pub fn load_prefix_table(path: &Path) -> Result<PrefixTable, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let file: PrefixFile = toml::from_str(&text)
        .map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
    let mut table = if file.replace { PrefixTable::empty() } else { PrefixTable::wikidata() };
    for (label, ns) in file.prefixes {
        table.insert(label, ns);
    }
    Ok(table)
}
