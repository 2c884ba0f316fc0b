//! Query results in memory, parsed from the SPARQL JSON results format or
//! from N-Triples/Turtle graph responses.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, DeserializeSeed, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Cell {
    Iri { value: String },
    Literal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lang: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
    Blank { value: String },
    Unbound,
}

impl Cell {
    pub fn iri(v: impl Into<String>) -> Self {
        Cell::Iri { value: v.into() }
    }

    pub fn literal(v: impl Into<String>) -> Self {
        Cell::Literal { value: v.into(), lang: None, datatype: None }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Cell::Iri { value } => Some(value),
            _ => None,
        }
    }

    /// The lexical value of IRIs, literals and blank nodes.
    pub fn text(&self) -> Option<&str> {
        match self {
            Cell::Iri { value } | Cell::Literal { value, .. } | Cell::Blank { value } => Some(value),
            Cell::Unbound => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultTable {
    pub variables: Vec<String>,
    /// One cell per variable in every row.
    pub rows: Vec<Vec<Cell>>,
    /// More rows existed than were kept.
    pub truncated: bool,
    pub total_row_count_hint: Option<u64>,
    /// Set for `ASK` results.
    pub boolean: Option<bool>,
}

impl ResultTable {
    pub fn ask(b: bool) -> Self {
        ResultTable { boolean: Some(b), ..Default::default() }
    }

    pub fn is_empty_result(&self) -> bool {
        self.boolean.is_none() && self.rows.is_empty()
    }

    /// Total number of result rows, as far as known.
    pub fn total_rows(&self) -> u64 {
        self.total_row_count_hint.unwrap_or(self.rows.len() as u64)
    }

    pub fn iris(&self) -> BTreeSet<String> {
        self.rows.iter().flatten().filter_map(|c| c.as_iri().map(str::to_string)).collect()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }
}

#[derive(Deserialize)]
struct RawTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(rename = "xml:lang")]
    lang: Option<String>,
    datatype: Option<String>,
}

impl RawTerm {
    fn into_cell(self) -> Result<Cell, String> {
        Ok(match self.kind.as_str() {
            "uri" => Cell::Iri { value: self.value },
            "literal" | "typed-literal" => Cell::Literal { value: self.value, lang: self.lang, datatype: self.datatype },
            "bnode" => Cell::Blank { value: self.value },
            other => return Err(format!("unknown term type {other:?}")),
        })
    }
}

type Binding = std::collections::HashMap<String, RawTerm>;

/// Keeps the first `max` bindings and counts the rest without building them.
struct Bindings {
    max: usize,
}

struct Kept {
    rows: Vec<Binding>,
    total: u64,
}

impl<'de> DeserializeSeed<'de> for Bindings {
    type Value = Kept;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Kept, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for Bindings {
    type Value = Kept;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of bindings")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Kept, A::Error> {
        let mut kept = Kept { rows: Vec::new(), total: 0 };
        loop {
            if kept.rows.len() < self.max {
                match seq.next_element::<Binding>()? {
                    Some(b) => kept.rows.push(b),
                    None => break,
                }
            } else if seq.next_element::<IgnoredAny>()?.is_none() {
                break;
            }
            kept.total += 1;
        }
        Ok(kept)
    }
}

struct ResultsSeed {
    max: usize,
}

impl<'de> DeserializeSeed<'de> for ResultsSeed {
    type Value = Kept;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Kept, D::Error> {
        d.deserialize_map(self)
    }
}

impl<'de> Visitor<'de> for ResultsSeed {
    type Value = Kept;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a results object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Kept, A::Error> {
        let mut kept = None;
        while let Some(key) = map.next_key::<String>()? {
            if key == "bindings" {
                kept = Some(map.next_value_seed(Bindings { max: self.max })?);
            } else {
                map.next_value::<IgnoredAny>()?;
            }
        }
        kept.ok_or_else(|| de::Error::missing_field("bindings"))
    }
}

#[derive(Deserialize)]
struct Head {
    #[serde(default)]
    vars: Vec<String>,
}

struct Document {
    head: Option<Head>,
    boolean: Option<bool>,
    results: Option<Kept>,
    /// Error object some engines send with status 200.
    exception: Option<String>,
}

struct DocumentSeed {
    max: usize,
}

impl<'de> DeserializeSeed<'de> for DocumentSeed {
    type Value = Document;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Document, D::Error> {
        d.deserialize_map(self)
    }
}

impl<'de> Visitor<'de> for DocumentSeed {
    type Value = Document;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a SPARQL JSON results document")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Document, A::Error> {
        let mut doc = Document { head: None, boolean: None, results: None, exception: None };
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "head" => doc.head = Some(map.next_value()?),
                "boolean" => doc.boolean = Some(map.next_value()?),
                "results" => doc.results = Some(map.next_value_seed(ResultsSeed { max: self.max })?),
                "exception" => doc.exception = Some(map.next_value::<serde_json::Value>()?.to_string()),
                _ => {
                    map.next_value::<IgnoredAny>()?;
                }
            }
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JsonOutcome {
    Table(ResultTable),
    /// The document is an engine error report rather than results.
    Exception(String),
}

/// Parses a SPARQL JSON results document keeping at most `max_rows` rows.
pub fn parse_results_json(body: &[u8], max_rows: usize) -> Result<JsonOutcome, String> {
    let mut de = serde_json::Deserializer::from_slice(body);
    let doc = DocumentSeed { max: max_rows }.deserialize(&mut de).map_err(|e| e.to_string())?;
    de.end().map_err(|e| e.to_string())?;
    if let Some(b) = doc.boolean {
        return Ok(JsonOutcome::Table(ResultTable::ask(b)));
    }
    let (Some(head), Some(kept)) = (doc.head, doc.results) else {
        return match doc.exception {
            Some(e) => Ok(JsonOutcome::Exception(e)),
            None => Err("neither boolean nor results present".into()),
        };
    };
    let mut rows = Vec::with_capacity(kept.rows.len());
    for mut b in kept.rows {
        let mut row = Vec::with_capacity(head.vars.len());
        for v in &head.vars {
            row.push(match b.remove(v) {
                Some(t) => t.into_cell()?,
                None => Cell::Unbound,
            });
        }
        rows.push(row);
    }
    let truncated = kept.total > rows.len() as u64;
    Ok(JsonOutcome::Table(ResultTable {
        variables: head.vars,
        rows,
        truncated,
        total_row_count_hint: Some(kept.total),
        boolean: None,
    }))
}

/// Parses an N-Triples or Turtle graph into a subject/predicate/object table.
pub fn parse_graph(body: &[u8], turtle: bool, max_rows: usize) -> Result<ResultTable, String> {
    use oxttl::{NTriplesParser, TurtleParser};
    let term_cell = |t: oxrdf::Term| -> Cell {
        match t {
            oxrdf::Term::NamedNode(n) => Cell::iri(n.into_string()),
            oxrdf::Term::BlankNode(b) => Cell::Blank { value: b.into_string() },
            oxrdf::Term::Literal(l) => {
                let (value, datatype, lang) = l.destruct();
                Cell::Literal { value, lang, datatype: datatype.map(|d| d.into_string()) }
            }
            #[allow(unreachable_patterns)]
            other => Cell::literal(other.to_string()),
        }
    };
    let mut table = ResultTable {
        variables: vec!["subject".into(), "predicate".into(), "object".into()],
        ..Default::default()
    };
    let mut total = 0u64;
    let mut push = |t: oxrdf::Triple| {
        if table.rows.len() < max_rows {
            table.rows.push(vec![term_cell(t.subject.into()), Cell::iri(t.predicate.into_string()), term_cell(t.object)]);
        }
        total += 1;
    };
    if turtle {
        for t in TurtleParser::new().for_slice(body) {
            push(t.map_err(|e| e.to_string())?);
        }
    } else {
        for t in NTriplesParser::new().for_slice(body) {
            push(t.map_err(|e| e.to_string())?);
        }
    }
    table.truncated = total > table.rows.len() as u64;
    table.total_row_count_hint = Some(total);
    Ok(table)
}
