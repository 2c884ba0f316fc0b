//! IRI labels for prompts, and the enriched input document of the agent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use slforge_core::preprocess::{
    detect_anonymization_markers, prune_unused_select_vars, strip_label_service, AnonymizationMarkers,
};
use slforge_core::sparql::{collect_iris, parse_query_with, serialize_query, ParseError, PrefixTable};

use super::client::{Endpoint, KgError};
use super::render::{render_iri, render_result_markdown, RenderOptions};
use crate::config::{EnrichConfig, Limits};
use crate::log::LogEntry;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IriInfo {
    pub iri: String,
    pub label: Option<String>,
    pub aliases: Vec<String>,
    pub description: Option<String>,
}

impl IriInfo {
    pub fn new(iri: impl Into<String>) -> Self {
        IriInfo { iri: iri.into(), ..Default::default() }
    }
}

const ENTITY: &str = "http://www.wikidata.org/entity/";

/// The entity IRI carrying the labels of `iri`. Wikidata property IRIs
/// (`wdt:P31`, `p:P31`, `ps:P31`, ...) are described by `wd:P31`.
pub fn subject_for_labels(iri: &str) -> String {
    if let Some(rest) = iri.strip_prefix("http://www.wikidata.org/prop/") {
        let local = rest.rsplit('/').next().unwrap_or(rest);
        if local.len() > 1 && local.starts_with('P') && local[1..].bytes().all(|b| b.is_ascii_digit()) {
            return format!("{ENTITY}{local}");
        }
    }
    iri.to_string()
}

/// Whether `iri` can be written as `<iri>` in a query.
fn writable(iri: &str) -> bool {
    !iri.is_empty() && !iri.chars().any(|c| c <= ' ' || "<>\"{}|^`\\".contains(c))
}

fn lang_filter(var: &str, lang: &str) -> String {
    format!("FILTER(LANGMATCHES(LANG(?{var}), \"{lang}\"))")
}

fn lookup_query(chunk: &[&String], cfg: &EnrichConfig) -> String {
    let mut q = String::from("SELECT ?iri ?label ?alias ?description WHERE {\n  VALUES (?iri ?subject) {");
    for iri in chunk {
        let _ = write!(q, " (<{iri}> <{}>)", subject_for_labels(iri));
    }
    let lang = cfg.language.replace('"', "");
    let _ = write!(
        q,
        " }}\n  OPTIONAL {{ ?subject <{}> ?label {} }}\n  OPTIONAL {{ ?subject <{}> ?alias {} }}\n  OPTIONAL {{ ?subject <{}> ?description {} }}\n}}",
        cfg.label_predicate,
        lang_filter("label", &lang),
        cfg.alias_predicate,
        lang_filter("alias", &lang),
        cfg.description_predicate,
        lang_filter("description", &lang),
    );
    q
}

/// Looks up labels, aliases and descriptions in the configured language,
/// `chunk_size` IRIs per request. Every input IRI is a key of the result;
/// unknown IRIs have empty fields. With several labels or descriptions the
/// lexicographically smallest is kept.
pub fn fetch_iri_info(
    endpoint: &dyn Endpoint,
    iris: &BTreeSet<String>,
    cfg: &EnrichConfig,
) -> Result<BTreeMap<String, IriInfo>, KgError> {
    let mut out: BTreeMap<String, IriInfo> = iris.iter().map(|i| (i.clone(), IriInfo::new(i.clone()))).collect();
    let ask: Vec<&String> = iris.iter().filter(|i| writable(i)).collect();
    for chunk in ask.chunks(cfg.chunk_size.max(1)) {
        let table = endpoint.execute(&lookup_query(chunk, cfg), usize::MAX)?;
        let col = |v: &str| table.column(v);
        let (Some(ci), cl, ca, cd) = (col("iri"), col("label"), col("alias"), col("description")) else {
            return Err(KgError::MalformedResponse { message: "lookup result lacks ?iri".into() });
        };
        let text = |row: &[super::results::Cell], c: Option<usize>| c.and_then(|c| row[c].text().map(str::to_string));
        for row in &table.rows {
            let Some(info) = row[ci].as_iri().and_then(|i| out.get_mut(i)) else { continue };
            if let Some(l) = text(row, cl) {
                if info.label.as_ref().is_none_or(|cur| l < *cur) {
                    info.label = Some(l);
                }
            }
            if let Some(d) = text(row, cd) {
                if info.description.as_ref().is_none_or(|cur| d < *cur) {
                    info.description = Some(d);
                }
            }
            if let Some(a) = text(row, ca) {
                if let Err(pos) = info.aliases.binary_search(&a) {
                    info.aliases.insert(pos, a);
                }
            }
        }
    }
    Ok(out)
}

/// Everything the agent sees about one log entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentInput {
    /// The entry's `raw_hash`.
    pub id: String,
    pub interval: String,
    pub original_query: String,
    pub preprocessed_query: String,
    pub markers: AnonymizationMarkers,
    pub document: String,
}

pub const SECTION_ORIGINAL: &str = "## Original query";
pub const SECTION_PREPROCESSED: &str = "## Preprocessed query";
pub const SECTION_IRIS: &str = "## IRIs";
pub const SECTION_RESULT: &str = "## Execution result";
pub const SECTION_MARKERS: &str = "## Anonymization markers";

/// Strips the label service, prunes unused projections, describes the
/// query's IRIs, runs it and renders the result. Endpoint failures are
/// written into the document; only an unparseable query is an error.
pub fn build_agent_input(
    entry: &LogEntry,
    endpoint: &dyn Endpoint,
    table: &PrefixTable,
    enrich: &EnrichConfig,
    limits: &Limits,
) -> Result<AgentInput, ParseError> {
    let parsed = parse_query_with(&entry.raw_query, table)?;
    let markers = detect_anonymization_markers(&parsed);
    let pre = prune_unused_select_vars(strip_label_service(parsed));
    let preprocessed_query = serialize_query(&pre);

    let mut doc = String::new();
    let _ = writeln!(doc, "{SECTION_ORIGINAL}\n\n```sparql\n{}\n```\n", entry.raw_query.trim());
    let _ = writeln!(doc, "{SECTION_PREPROCESSED}\n\n```sparql\n{preprocessed_query}\n```\n");

    let iris = collect_iris(&pre);
    let mut info = BTreeMap::new();
    let _ = writeln!(doc, "{SECTION_IRIS}\n");
    if iris.is_empty() {
        let _ = writeln!(doc, "(none)\n");
    } else {
        match fetch_iri_info(endpoint, &iris, enrich) {
            Ok(found) => {
                for i in found.values() {
                    let _ = writeln!(doc, "{}", describe(i, table));
                }
                doc.push('\n');
                info = found;
            }
            Err(e) => {
                let _ = writeln!(doc, "enrichment failed: {}\n", e.class());
            }
        }
    }

    let _ = writeln!(doc, "{SECTION_RESULT}\n");
    match endpoint.execute(&preprocessed_query, limits.max_rows) {
        Ok(result) => {
            let missing: BTreeSet<String> = result.iris().into_iter().filter(|i| !info.contains_key(i)).collect();
            if !missing.is_empty() {
                if let Ok(more) = fetch_iri_info(endpoint, &missing, enrich) {
                    info.extend(more);
                }
            }
            let opts = RenderOptions { max_rows: limits.max_rows, cell_width: limits.cell_width, prefixes: table };
            let _ = writeln!(doc, "{}\n", render_result_markdown(&result, &info, &opts));
        }
        Err(e) => {
            let _ = writeln!(doc, "execution failed: {}\n", e.class());
        }
    }

    if markers.has_literals || markers.has_variables {
        let _ = writeln!(doc, "{SECTION_MARKERS}\n");
        if markers.has_literals {
            let lits: Vec<_> = markers.anonymized_literals.iter().map(|m| format!("\"{}\"", m.lexical)).collect();
            let _ = writeln!(doc, "- anonymized string literals: {}", lits.join(", "));
        }
        if markers.has_variables {
            let vars: Vec<_> = markers.anonymized_variables.iter().map(|v| format!("?{v}")).collect();
            let _ = writeln!(doc, "- anonymized variable names: {}", vars.join(", "));
        }
    }

    Ok(AgentInput {
        id: entry.raw_hash.clone(),
        interval: entry.interval.clone(),
        original_query: entry.raw_query.clone(),
        preprocessed_query,
        markers,
        document: doc.trim_end().to_string() + "\n",
    })
}

fn describe(i: &IriInfo, table: &PrefixTable) -> String {
    let mut line = format!("- {}", render_iri(&i.iri, &BTreeMap::new(), table));
    match &i.label {
        Some(l) => {
            let _ = write!(line, ": label \"{l}\"");
        }
        None => line.push_str(": no label"),
    }
    if !i.aliases.is_empty() {
        let _ = write!(line, "; aliases {}", i.aliases.iter().map(|a| format!("\"{a}\"")).collect::<Vec<_>>().join(", "));
    }
    if let Some(d) = &i.description {
        let _ = write!(line, "; description \"{d}\"");
    }
    line
}
