//! Question embeddings.

use std::time::Duration;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use slforge_core::digest::sha256;
use slforge_core::split::{mean_embedding, SplitError};

use crate::config::EmbeddingConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding backend: {0}")]
    Backend(String),
    #[error("embedding of text {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("pair {0} has no questions")]
    NoQuestions(usize),
}

pub trait Embedder: Sync {
    /// One vector per text, in order.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError>;
}

/// Feature hashing of lowercase word unigrams and bigrams, L2-normalized.
/// Needs no service; similar wordings give similar vectors.
pub struct HashingEmbedder {
    pub dim: usize,
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

impl HashingEmbedder {
    fn one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim.max(1)];
        let w = words(text);
        let grams = w.iter().cloned().chain(w.windows(2).map(|p| format!("{} {}", p[0], p[1])));
        for g in grams {
            let h = sha256(g.as_bytes());
            let slot = u64::from_le_bytes(h[..8].try_into().unwrap_or_default()) as usize % v.len();
            v[slot] += if h[8] & 1 == 0 { 1.0 } else { -1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError> {
        Ok(texts.iter().map(|t| self.one(t)).collect())
    }
}

/// OpenAI-compatible `/embeddings` endpoint.
pub struct HttpEmbedder {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    #[serde(default)]
    index: Option<usize>,
    embedding: Vec<f32>,
}

impl HttpEmbedder {
    pub fn new(cfg: &EmbeddingConfig) -> Result<Self, EmbedError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| EmbedError::Backend(e.to_string()))?;
        Ok(HttpEmbedder {
            client,
            url: format!("{}/embeddings", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            api_key: std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty()),
        })
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let mut req = self.client.post(&self.url).json(&json!({"model": self.model, "input": texts}));
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| EmbedError::Backend(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().map_err(|e| EmbedError::Backend(e.to_string()))?;
        if !status.is_success() {
            return Err(EmbedError::Backend(format!("HTTP {status}: {}", body.chars().take(300).collect::<String>())));
        }
        let mut r: EmbeddingResponse = serde_json::from_str(&body).map_err(|e| EmbedError::Backend(e.to_string()))?;
        if r.data.len() != texts.len() {
            return Err(EmbedError::Backend(format!("{} embeddings for {} texts", r.data.len(), texts.len())));
        }
        r.data.sort_by_key(|d| d.index.unwrap_or(0));
        Ok(r.data.into_iter().map(|d| d.embedding).collect())
    }
}

/// The mean question embedding of every pair, in input order. Batches run
/// on the current rayon pool; the result does not depend on its size.
pub fn embed_pairs(questions: &[Vec<String>], embedder: &dyn Embedder, batch_size: usize) -> Result<Vec<Vec<f32>>, EmbedError> {
    if let Some(i) = questions.iter().position(Vec::is_empty) {
        return Err(EmbedError::NoQuestions(i));
    }
    let texts: Vec<String> = questions.iter().flatten().cloned().collect();
    let batches: Vec<Vec<Vec<f32>>> = texts
        .par_chunks(batch_size.max(1))
        .map(|b| {
            let out = embedder.embed(b)?;
            if out.len() != b.len() {
                return Err(EmbedError::Backend(format!("{} embeddings for {} texts", out.len(), b.len())));
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let flat: Vec<Vec<f32>> = batches.into_iter().flatten().collect();
    let expected = flat.first().map_or(0, Vec::len);
    if let Some(index) = flat.iter().position(|v| v.len() != expected) {
        return Err(EmbedError::DimensionMismatch { index, expected, found: flat[index].len() });
    }
    let mut out = Vec::with_capacity(questions.len());
    let mut at = 0;
    for q in questions {
        let mean = mean_embedding(&flat[at..at + q.len()]).map_err(|e| match e {
            SplitError::DimensionMismatch { index, expected, found } => {
                EmbedError::DimensionMismatch { index: at + index, expected, found }
            }
            other => EmbedError::Backend(other.to_string()),
        })?;
        out.push(mean);
        at += q.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<Vec<f32>>);

    impl Embedder for Fixed {
        fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError> {
            Ok(texts.iter().map(|t| self.0[t.parse::<usize>().unwrap()].clone()).collect())
        }
    }

    fn qs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|q| q.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn mean_of_questions() {
        let e = Fixed(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(embed_pairs(&qs(&[&["0", "1"]]), &e, 1).unwrap(), vec![vec![0.5, 0.5]]);
        assert_eq!(embed_pairs(&qs(&[&["1"]]), &e, 8).unwrap(), vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn dimension_mismatch() {
        let e = Fixed(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]);
        let err = embed_pairs(&qs(&[&["0"], &["1"]]), &e, 1).unwrap_err();
        assert_eq!(err, EmbedError::DimensionMismatch { index: 1, expected: 3, found: 4 });
    }

    #[test]
    fn hashing_is_deterministic_and_normalized() {
        let h = HashingEmbedder { dim: 64 };
        let a = h.embed(&["Who wrote Hamlet?".into()]).unwrap();
        let b = h.embed(&["who wrote hamlet".into()]).unwrap();
        assert_eq!(a, b);
        let n: f32 = a[0].iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-5);
    }

    #[test]
    fn empty_pairs_are_rejected() {
        let h = HashingEmbedder { dim: 8 };
        assert_eq!(embed_pairs(&qs(&[&["a"], &[]]), &h, 4), Err(EmbedError::NoQuestions(1)));
    }
}
