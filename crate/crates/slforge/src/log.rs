//! Raw query-log rows: decoding, interval labels and first-occurrence dedup.

use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slforge_core::digest::to_hex;
use slforge_core::preprocess::{raw_hash, Deduplicator};
use slforge_core::sparql::PrefixTable;

/// Which delimited columns hold what. Column indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub query: usize,
    pub timestamp: usize,
    pub category: usize,
    pub delimiter: char,
    /// Decode `+` as a space, as in form-encoded logs.
    pub plus_as_space: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap { query: 0, timestamp: 1, category: 2, delimiter: '\t', plus_as_space: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogEntry {
    pub raw_query: String,
    pub timestamp: DateTime<Utc>,
    pub interval: String,
    pub category: String,
    /// Hex SHA-256 of the canonical serialization (or trimmed text).
    pub raw_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeCause {
    MissingColumn(&'static str),
    BadPercentEncoding { offset: usize },
    NotUtf8,
    BadTimestamp(String),
    EmptyQuery,
}

impl fmt::Display for DecodeCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeCause::MissingColumn(c) => write!(f, "missing {c} column"),
            DecodeCause::BadPercentEncoding { offset } => write!(f, "bad percent-encoding at byte {offset}"),
            DecodeCause::NotUtf8 => f.write_str("decoded query is not UTF-8"),
            DecodeCause::BadTimestamp(t) => write!(f, "unparseable timestamp {t:?}"),
            DecodeCause::EmptyQuery => f.write_str("empty query"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("row {row}: {cause}")]
pub struct DecodeError {
    /// One-based line number in the source file.
    pub row: usize,
    pub cause: DecodeCause,
}

/// Strict percent-decoding: `%` must be followed by two hex digits.
pub fn percent_decode(s: &str, plus_as_space: bool) -> Result<String, DecodeCause> {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'%' => {
                let hex = b.get(i + 1..i + 3).and_then(|h| std::str::from_utf8(h).ok());
                let byte = hex
                    .filter(|h| h.bytes().all(|c| c.is_ascii_hexdigit()))
                    .and_then(|h| u8::from_str_radix(h, 16).ok())
                    .ok_or(DecodeCause::BadPercentEncoding { offset: i })?;
                out.push(byte);
                i += 3;
            }
            b'+' if plus_as_space => {
                out.push(b' ');
                i += 1;
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    String::from_utf8(out).map_err(|_| DecodeCause::NotUtf8)
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0)).map(|t| t.and_utc())
}

/// The seven publication intervals of the Wikidata SPARQL logs.
pub const INTERVALS: [(&str, &str, &str); 7] = [
    ("I1", "2017-06-12", "2017-07-09"),
    ("I2", "2017-07-10", "2017-08-06"),
    ("I3", "2017-08-07", "2017-09-03"),
    ("I4", "2017-12-03", "2017-12-30"),
    ("I5", "2018-01-01", "2018-01-28"),
    ("I6", "2018-01-29", "2018-02-25"),
    ("I7", "2018-02-26", "2018-03-25"),
];

pub fn interval_of(ts: &DateTime<Utc>) -> Option<&'static str> {
    let day = ts.date_naive();
    INTERVALS.iter().find_map(|(label, from, to)| {
        let from = NaiveDate::parse_from_str(from, "%Y-%m-%d").unwrap();
        let to = NaiveDate::parse_from_str(to, "%Y-%m-%d").unwrap();
        (from <= day && day <= to).then_some(*label)
    })
}

/// Decodes one delimited row. `row` is the one-based line number used in
/// errors. The interval comes from `interval` when given, else from the
/// timestamp (`unknown` outside all seven intervals).
pub fn decode_log_line(
    line: &str,
    row: usize,
    map: &ColumnMap,
    interval: Option<&str>,
    table: &PrefixTable,
) -> Result<LogEntry, DecodeError> {
    let err = |cause| DecodeError { row, cause };
    let cols: Vec<&str> = line.trim_end_matches(['\n', '\r']).split(map.delimiter).collect();
    let col = |i: usize, name| cols.get(i).copied().ok_or(err(DecodeCause::MissingColumn(name)));
    let raw = col(map.query, "query")?;
    let ts_text = col(map.timestamp, "timestamp")?;
    let category = col(map.category, "category")?;
    let raw_query = percent_decode(raw, map.plus_as_space).map_err(err)?;
    if raw_query.trim().is_empty() {
        return Err(err(DecodeCause::EmptyQuery));
    }
    let timestamp = parse_timestamp(ts_text).ok_or_else(|| err(DecodeCause::BadTimestamp(ts_text.into())))?;
    let interval = interval.map(str::to_string).unwrap_or_else(|| interval_of(&timestamp).unwrap_or("unknown").into());
    let raw_hash = to_hex(&raw_hash(&raw_query, table));
    Ok(LogEntry { raw_query, timestamp, interval, category: category.trim().into(), raw_hash })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestCounts {
    pub rows: u64,
    pub decoded: u64,
    pub filtered: u64,
    pub errors: u64,
    pub duplicates: u64,
    pub kept: u64,
}

/// Decodes a log stream, drops rows of other categories, and keeps the first
/// entry per `raw_hash`. A first line whose timestamp column reads
/// `timestamp` is a header and skipped. Row errors go to `on_error`.
pub struct LogReader<'a> {
    pub map: ColumnMap,
    pub category: Option<String>,
    pub interval: Option<String>,
    pub table: &'a PrefixTable,
}

impl LogReader<'_> {
    /// Rows are decoded in parallel chunks; admission into `dedup` runs
    /// sequentially in input order.
    pub fn read(
        &self,
        input: impl BufRead,
        dedup: &mut Deduplicator,
        counts: &mut IngestCounts,
        mut on_entry: impl FnMut(LogEntry) -> std::io::Result<()>,
        mut on_error: impl FnMut(DecodeError),
    ) -> std::io::Result<()> {
        const CHUNK: usize = 4096;
        let mut lines = input.lines().enumerate();
        loop {
            let mut chunk = Vec::with_capacity(CHUNK);
            for (i, line) in lines.by_ref() {
                let line = line?;
                let row = i + 1;
                if line.trim().is_empty() || (row == 1 && is_header(&line, &self.map)) {
                    continue;
                }
                chunk.push((row, line));
                if chunk.len() == CHUNK {
                    break;
                }
            }
            if chunk.is_empty() {
                return Ok(());
            }
            let decoded: Vec<_> = chunk
                .par_iter()
                .map(|(row, line)| decode_log_line(line, *row, &self.map, self.interval.as_deref(), self.table))
                .collect();
            for result in decoded {
                counts.rows += 1;
                let entry = match result {
                    Ok(e) => e,
                    Err(e) => {
                        counts.errors += 1;
                        on_error(e);
                        continue;
                    }
                };
                counts.decoded += 1;
                if self.category.as_deref().is_some_and(|c| c != entry.category) {
                    counts.filtered += 1;
                    continue;
                }
                if dedup.admit(hash_bytes(&entry.raw_hash)) {
                    counts.kept += 1;
                    on_entry(entry)?;
                } else {
                    counts.duplicates += 1;
                }
            }
        }
    }
}

fn hash_bytes(hex: &str) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (k, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).unwrap_or(0);
    }
    out
}

fn is_header(line: &str, map: &ColumnMap) -> bool {
    line.split(map.delimiter).nth(map.timestamp).is_some_and(|c| c.trim().eq_ignore_ascii_case("timestamp"))
}
