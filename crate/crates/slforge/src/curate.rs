//! Dataset pairs: validation against the endpoint and file formats.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use slforge_core::digest::sha256_hex;
use slforge_core::split::Split;
use slforge_core::sparql::{parse_query_with, PrefixTable};

use crate::agent::{OutcomeKind, TranscriptRecord};
use crate::kg::Endpoint;
use crate::records::{read_jsonl, AtomicFile, RecordError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvalidKind {
    Parse,
    Execute,
    Empty,
}

/// Written as `valid`, `pending`, `invalid:parse`, `invalid:execute` or
/// `invalid:empty`. `pending` covers pairs not yet validated and pairs whose
/// validation was deferred because the endpoint was unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Validation {
    Pending,
    Valid,
    Invalid(InvalidKind),
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Validation::Pending => "pending",
            Validation::Valid => "valid",
            Validation::Invalid(InvalidKind::Parse) => "invalid:parse",
            Validation::Invalid(InvalidKind::Execute) => "invalid:execute",
            Validation::Invalid(InvalidKind::Empty) => "invalid:empty",
        })
    }
}

impl FromStr for Validation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "pending" => Validation::Pending,
            "valid" => Validation::Valid,
            "invalid:parse" => Validation::Invalid(InvalidKind::Parse),
            "invalid:execute" => Validation::Invalid(InvalidKind::Execute),
            "invalid:empty" => Validation::Invalid(InvalidKind::Empty),
            _ => return Err(format!("unknown validation status {s:?}")),
        })
    }
}

impl Serialize for Validation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Validation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub interval: String,
    pub raw_hash: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPair {
    pub id: String,
    pub questions: Vec<String>,
    pub sparql: String,
    pub provenance: Provenance,
    pub validation: Validation,
    #[serde(default)]
    pub cluster_id: Option<u64>,
    #[serde(default)]
    pub split: Option<Split>,
    #[serde(default)]
    pub embedding_2d: Option<[f32; 2]>,
}

/// Stable id: hex SHA-256 over the raw hash and the cleaned query.
pub fn pair_id(raw_hash: &str, sparql: &str) -> String {
    sha256_hex(format!("{raw_hash}\n{sparql}").as_bytes())
}

impl DatasetPair {
    pub fn new(questions: Vec<String>, sparql: String, provenance: Provenance) -> Self {
        DatasetPair {
            id: pair_id(&provenance.raw_hash, &sparql),
            questions,
            sparql,
            provenance,
            validation: Validation::Pending,
            cluster_id: None,
            split: None,
            embedding_2d: None,
        }
    }

    /// The pair of an answered session; `None` for other outcomes.
    pub fn from_transcript(r: &TranscriptRecord) -> Option<Self> {
        match &r.outcome.kind {
            OutcomeKind::Answered { questions, cleaned_sparql } => Some(DatasetPair::new(
                questions.clone(),
                cleaned_sparql.clone(),
                Provenance { interval: r.interval.clone(), raw_hash: r.id.clone(), model: r.model.clone() },
            )),
            _ => None,
        }
    }
}

/// Parse, execute, non-empty, in that order. ASK results always count as
/// non-empty. An unavailable endpoint leaves the pair `Pending`.
pub fn validate_query(sparql: &str, endpoint: &dyn Endpoint, table: &PrefixTable, timeout: std::time::Duration) -> Validation {
    if parse_query_with(sparql, table).is_err() {
        return Validation::Invalid(InvalidKind::Parse);
    }
    match endpoint.execute_with(sparql, timeout, 1) {
        Err(e) if e.is_unavailable() => Validation::Pending,
        Err(_) => Validation::Invalid(InvalidKind::Execute),
        Ok(t) if t.is_empty_result() => Validation::Invalid(InvalidKind::Empty),
        Ok(_) => Validation::Valid,
    }
}

pub fn validate_pair(pair: &DatasetPair, endpoint: &dyn Endpoint, table: &PrefixTable, timeout: std::time::Duration) -> Validation {
    validate_query(&pair.sparql, endpoint, table, timeout)
}

/// One JSON object per line.
pub fn export_pairs(pairs: &[DatasetPair], path: &Path) -> Result<(), RecordError> {
    let mut f = AtomicFile::create(path)?;
    for p in pairs {
        f.write_record(p)?;
    }
    f.commit()
}

/// Reads pairs written by [`export_pairs`]. Unknown or missing fields are
/// schema errors carrying the line number.
pub fn import_pairs(path: &Path) -> Result<Vec<DatasetPair>, RecordError> {
    read_jsonl(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgqaRecord {
    pub id: String,
    pub questions: Vec<String>,
    pub sparql: String,
}

/// Writes `train.jsonl`, `validation.jsonl` and `test.jsonl` into `dir`.
/// Only valid pairs with a split are written. Returns the count per split.
pub fn export_kgqa<'a>(pairs: impl IntoIterator<Item = &'a DatasetPair>, dir: &Path) -> Result<[usize; 3], RecordError> {
    let mut files = Vec::new();
    for s in Split::ALL {
        files.push(AtomicFile::create(&dir.join(format!("{}.jsonl", s.name())))?);
    }
    let mut counts = [0; 3];
    for p in pairs {
        let (Some(split), Validation::Valid) = (p.split, p.validation) else { continue };
        let i = Split::ALL.iter().position(|s| *s == split).unwrap_or(0);
        files[i].write_record(&KgqaRecord { id: p.id.clone(), questions: p.questions.clone(), sparql: p.sparql.clone() })?;
        counts[i] += 1;
    }
    for f in files {
        f.commit()?;
    }
    Ok(counts)
}
