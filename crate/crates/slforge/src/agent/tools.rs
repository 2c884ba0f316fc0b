//! The knowledge-graph functions offered to the model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde_json::{json, Value};
use slforge_core::sparql::{parse_query_with, PrefixTable};

use super::backend::ToolSpec;
use super::messages::{ToolCallRequest, ToolName};
use crate::config::{EnrichConfig, Limits};
use crate::kg::{fetch_iri_info, render_iri, render_result_markdown, Cell, Endpoint, IriInfo, KgError, RenderOptions, ResultTable};

/// Upper bound on candidates fetched before keyword filtering.
const CANDIDATES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hit {
    pub iri: String,
    /// The label or alias that matched.
    pub matched: String,
}

/// Keyword lookup of entities and properties by label and alias.
pub trait Search: Sync {
    fn entities(&self, keyword: &str, k: usize) -> Result<Vec<Hit>, KgError>;
    fn properties(&self, keyword: &str, k: usize) -> Result<Vec<Hit>, KgError>;
}

/// Case-insensitive substring search over labels and aliases, run as SPARQL.
pub struct SparqlSearch<'a> {
    pub endpoint: &'a dyn Endpoint,
    pub enrich: &'a EnrichConfig,
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Lower is better: exact, prefix, whole word, anywhere, no match.
pub fn match_rank(name: &str, keyword: &str) -> u8 {
    let name = name.to_lowercase();
    let kw = keyword.trim().to_lowercase();
    if name == kw {
        0
    } else if name.starts_with(&kw) {
        1
    } else if name.split(|c: char| !c.is_alphanumeric()).any(|w| w == kw) {
        2
    } else if name.contains(&kw) {
        3
    } else {
        4
    }
}

impl SparqlSearch<'_> {
    fn search(&self, keyword: &str, k: usize, properties: bool) -> Result<Vec<Hit>, KgError> {
        let kw = keyword.trim().to_lowercase();
        if kw.is_empty() {
            return Ok(Vec::new());
        }
        let e = self.enrich;
        let kind = if properties {
            format!("?item a <{}> .", e.property_class)
        } else {
            format!("FILTER NOT EXISTS {{ ?item a <{}> }}", e.property_class)
        };
        let q = format!(
            "SELECT ?item ?name ?alias WHERE {{\n  {{ ?item <{}> ?name BIND(0 AS ?alias) }} UNION {{ ?item <{}> ?name BIND(1 AS ?alias) }}\n  FILTER(LANGMATCHES(LANG(?name), \"{}\"))\n  FILTER(CONTAINS(LCASE(STR(?name)), \"{}\"))\n  {kind}\n}}\nLIMIT {CANDIDATES}",
            e.label_predicate,
            e.alias_predicate,
            escape_literal(&e.language),
            escape_literal(&kw),
        );
        let t = self.endpoint.execute(&q, CANDIDATES)?;
        let (ci, cn, ca) = (t.column("item"), t.column("name"), t.column("alias"));
        let (Some(ci), Some(cn)) = (ci, cn) else {
            return Err(KgError::MalformedResponse { message: "search result lacks ?item or ?name".into() });
        };
        let mut best: BTreeMap<String, (u8, bool, usize, String)> = BTreeMap::new();
        for row in &t.rows {
            let (Some(iri), Some(name)) = (row[ci].as_iri(), row[cn].text()) else { continue };
            let alias = ca.and_then(|c| row[c].text()).is_some_and(|a| a == "1");
            let key = (match_rank(name, &kw), alias, name.chars().count(), name.to_string());
            let slot = best.entry(iri.to_string()).or_insert_with(|| key.clone());
            if key < *slot {
                *slot = key;
            }
        }
        let mut hits: Vec<_> = best.into_iter().collect();
        hits.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(hits.into_iter().take(k).map(|(iri, (.., matched))| Hit { iri, matched }).collect())
    }
}

impl Search for SparqlSearch<'_> {
    fn entities(&self, keyword: &str, k: usize) -> Result<Vec<Hit>, KgError> {
        self.search(keyword, k, false)
    }

    fn properties(&self, keyword: &str, k: usize) -> Result<Vec<Hit>, KgError> {
        self.search(keyword, k, true)
    }
}

/// What the tools need besides their arguments.
pub struct ToolContext<'a> {
    pub endpoint: &'a dyn Endpoint,
    pub search: &'a dyn Search,
    pub table: &'a PrefixTable,
    pub enrich: &'a EnrichConfig,
    pub limits: &'a Limits,
}

impl ToolContext<'_> {
    fn render(&self, t: &ResultTable) -> String {
        let info = fetch_iri_info(self.endpoint, &t.iris(), self.enrich).unwrap_or_default();
        let opts = RenderOptions { max_rows: self.limits.max_rows, cell_width: self.limits.cell_width, prefixes: self.table };
        render_result_markdown(t, &info, &opts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolError(pub String);

impl From<KgError> for ToolError {
    fn from(e: KgError) -> Self {
        ToolError(format!("execution failed ({}): {e}", e.class()))
    }
}

type ToolResult = Result<String, ToolError>;

fn arg<'v>(args: &'v Value, name: &str) -> Result<&'v str, ToolError> {
    opt_arg(args, name).ok_or_else(|| ToolError(format!("missing string argument \"{name}\"")))
}

fn opt_arg<'v>(args: &'v Value, name: &str) -> Option<&'v str> {
    args.get(name).and_then(Value::as_str).filter(|s| !s.trim().is_empty())
}

/// Accepts `prefix:local`, `<iri>`, a bare `http(s)://` IRI, a variable or
/// a quoted literal, and returns it in query syntax.
fn term(s: &str) -> String {
    let s = s.trim();
    if (s.starts_with("http://") || s.starts_with("https://")) && !s.contains(['<', '>', ' ']) {
        format!("<{s}>")
    } else {
        s.to_string()
    }
}

/// Parses `text` so that malformed input fails before reaching the endpoint.
fn checked(text: String, table: &PrefixTable) -> Result<String, ToolError> {
    match parse_query_with(&text, table) {
        Ok(_) => Ok(text),
        Err(e) => Err(ToolError(format!("invalid query or term: {e}"))),
    }
}

/// Runs a tool other than ANS and CAN. Failures come back as text.
pub fn execute_tool(name: ToolName, args: &Value, ctx: &ToolContext) -> String {
    let out = match name {
        ToolName::Exe => exe(args, ctx),
        ToolName::Lst => lst(args, ctx),
        ToolName::Sen => search(args, ctx, false),
        ToolName::Spr => search(args, ctx, true),
        ToolName::Spe => spe(args, ctx),
        ToolName::Sop => sop(args, ctx),
        ToolName::Scn => scn(args, ctx),
        ToolName::Sac => sac(args, ctx),
        ToolName::Ans | ToolName::Can => Err(ToolError(format!("{} ends the session and is handled by the agent loop", name.function_name()))),
    };
    out.unwrap_or_else(|e| format!("error: {}", e.0))
}

/// Resolves the name and decodes the arguments of a requested call.
pub fn decode_call(call: &ToolCallRequest) -> Result<(ToolName, Value), String> {
    let name = ToolName::parse(&call.name).ok_or_else(|| {
        let known: Vec<_> = ToolName::ALL.iter().map(|t| t.function_name()).collect();
        format!("unknown function \"{}\"; available: {}", call.name, known.join(", "))
    })?;
    let text = if call.arguments.trim().is_empty() { "{}" } else { &call.arguments };
    match serde_json::from_str::<Value>(text) {
        Ok(v @ Value::Object(_)) => Ok((name, v)),
        Ok(_) => Err("arguments must be a JSON object".into()),
        Err(e) => Err(format!("arguments are not valid JSON: {e}")),
    }
}

fn exe(args: &Value, ctx: &ToolContext) -> ToolResult {
    let q = checked(arg(args, "sparql")?.to_string(), ctx.table)?;
    let t = ctx.endpoint.execute(&q, ctx.limits.max_rows)?;
    Ok(ctx.render(&t))
}

fn capped(mut t: ResultTable, k: usize) -> ResultTable {
    if t.rows.len() > k || t.truncated {
        t.rows.truncate(k);
        t.truncated = true;
        t.total_row_count_hint = None;
    }
    t
}

fn lst(args: &Value, ctx: &ToolContext) -> ToolResult {
    let s = opt_arg(args, "subject").map(term);
    let p = opt_arg(args, "property").map(term);
    let o = opt_arg(args, "object").map(term);
    let vars: Vec<&str> = [("?s", &s), ("?p", &p), ("?o", &o)].iter().filter(|(_, t)| t.is_none()).map(|(v, _)| *v).collect();
    let pattern = format!(
        "{} {} {}",
        s.as_deref().unwrap_or("?s"),
        p.as_deref().unwrap_or("?p"),
        o.as_deref().unwrap_or("?o")
    );
    let k = ctx.limits.max_rows;
    let q = if vars.is_empty() {
        format!("ASK {{ {pattern} }}")
    } else {
        format!("SELECT {} WHERE {{ {pattern} }} LIMIT {}", vars.join(" "), k + 1)
    };
    let q = checked(q, ctx.table)?;
    let t = ctx.endpoint.execute(&q, k + 1)?;
    Ok(ctx.render(&capped(t, k)))
}

fn search(args: &Value, ctx: &ToolContext, properties: bool) -> ToolResult {
    let kw = arg(args, "query")?;
    let k = ctx.limits.search_k;
    let hits = if properties { ctx.search.properties(kw, k)? } else { ctx.search.entities(kw, k)? };
    let iris: BTreeSet<String> = hits.iter().map(|h| h.iri.clone()).collect();
    let info = fetch_iri_info(ctx.endpoint, &iris, ctx.enrich)?;
    let lines: Vec<String> = hits
        .iter()
        .map(|h| {
            let mut line = describe(&h.iri, &info, ctx);
            if info.get(&h.iri).and_then(|i| i.label.as_deref()) != Some(h.matched.as_str()) {
                let _ = write!(line, " [matched \"{}\"]", h.matched);
            }
            line
        })
        .collect();
    Ok(numbered(lines, None, "matches"))
}

fn describe(iri: &str, info: &BTreeMap<String, IriInfo>, ctx: &ToolContext) -> String {
    let mut line = render_iri(iri, info, ctx.table);
    if let Some(d) = info.get(iri).and_then(|i| i.description.as_deref()) {
        let _ = write!(line, ": {d}");
    }
    line
}

fn numbered(lines: Vec<String>, total: Option<usize>, what: &str) -> String {
    if lines.is_empty() {
        return format!("no {what}");
    }
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let _ = writeln!(out, "{}. {l}", i + 1);
    }
    match total {
        Some(n) if n > lines.len() => {
            let _ = write!(out, "\n{} of {n} {what} shown", lines.len());
        }
        _ => {
            let _ = write!(out, "\n{} {what}", lines.len());
        }
    }
    out
}

/// Keeps the first-column values matching `keyword` (all when absent),
/// best matches first, and lists them with labels.
fn filter_candidates(t: &ResultTable, keyword: Option<&str>, ctx: &ToolContext, what: &str) -> ToolResult {
    let mut seen = BTreeSet::new();
    let cells: Vec<&Cell> = t.rows.iter().filter_map(|r| r.first()).filter(|c| seen.insert((*c).clone())).collect();
    let iris: BTreeSet<String> = cells.iter().filter_map(|c| c.as_iri().map(str::to_string)).collect();
    let info = fetch_iri_info(ctx.endpoint, &iris, ctx.enrich)?;
    let mut ranked: Vec<(u8, usize, &Cell)> = Vec::new();
    for (pos, c) in cells.into_iter().enumerate() {
        let rank = match keyword {
            None => 0,
            Some(kw) => {
                let names: Vec<String> = match c.as_iri() {
                    Some(iri) => {
                        let i = &info[iri];
                        i.label.iter().chain(&i.aliases).cloned().chain([ctx.table.compact(iri)]).collect()
                    }
                    None => c.text().map(str::to_string).into_iter().collect(),
                };
                names.iter().map(|n| match_rank(n, kw)).min().unwrap_or(4)
            }
        };
        if rank < 4 {
            ranked.push((rank, pos, c));
        }
    }
    ranked.sort_by_key(|(r, p, _)| (*r, *p));
    let total = ranked.len();
    let lines = ranked
        .into_iter()
        .take(ctx.limits.search_k)
        .map(|(_, _, c)| match c {
            Cell::Iri { value } => describe(value, &info, ctx),
            Cell::Literal { value, lang: Some(l), .. } => format!("\"{value}\"@{l}"),
            Cell::Literal { value, datatype: Some(d), .. } => format!("\"{value}\"^^{}", ctx.table.compact(d)),
            other => other.text().map(|v| format!("\"{v}\"")).unwrap_or_default(),
        })
        .collect();
    let suffix = if t.truncated { format!("{what} (first {CANDIDATES} candidates searched)") } else { what.to_string() };
    Ok(numbered(lines, Some(total), &suffix))
}

/// `wd:P31` as a predicate means `wdt:P31`.
fn as_predicate(p: &str, table: &PrefixTable) -> String {
    let t = term(p);
    let expanded = t
        .split_once(':')
        .and_then(|(label, local)| table.get(label).map(|ns| format!("{ns}{local}")))
        .unwrap_or_else(|| t.trim_matches(['<', '>']).to_string());
    match expanded.strip_prefix("http://www.wikidata.org/entity/") {
        Some(local) if local.starts_with('P') && local[1..].bytes().all(|b| b.is_ascii_digit()) && local.len() > 1 => {
            format!("<http://www.wikidata.org/prop/direct/{local}>")
        }
        _ => t,
    }
}

fn spe(args: &Value, ctx: &ToolContext) -> ToolResult {
    let e = term(arg(args, "entity")?);
    let q = checked(format!("SELECT DISTINCT ?p WHERE {{ {e} ?p ?o }} LIMIT {CANDIDATES}"), ctx.table)?;
    let t = ctx.endpoint.execute(&q, CANDIDATES)?;
    filter_candidates(&t, opt_arg(args, "query"), ctx, "properties")
}

fn sop(args: &Value, ctx: &ToolContext) -> ToolResult {
    let p = as_predicate(arg(args, "property")?, ctx.table);
    let q = checked(format!("SELECT DISTINCT ?o WHERE {{ ?s {p} ?o }} LIMIT {CANDIDATES}"), ctx.table)?;
    let t = ctx.endpoint.execute(&q, CANDIDATES)?;
    filter_candidates(&t, opt_arg(args, "query"), ctx, "objects")
}

fn scn(args: &Value, ctx: &ToolContext) -> ToolResult {
    let constraints: Vec<&str> = match args.get("constraints") {
        Some(Value::Array(a)) => a.iter().filter_map(Value::as_str).collect(),
        Some(Value::String(s)) => vec![s.as_str()],
        _ => Vec::new(),
    };
    if constraints.is_empty() {
        return Err(ToolError("missing argument \"constraints\": list of triple patterns over ?x".into()));
    }
    let body = constraints.iter().map(|c| c.trim().trim_end_matches('.')).collect::<Vec<_>>().join(" . ");
    let q = checked(format!("SELECT DISTINCT ?x WHERE {{ {body} }} LIMIT {CANDIDATES}"), ctx.table)?;
    let t = ctx.endpoint.execute(&q, CANDIDATES)?;
    filter_candidates(&t, opt_arg(args, "query"), ctx, "items")
}

fn sac(args: &Value, ctx: &ToolContext) -> ToolResult {
    let q = checked(arg(args, "sparql")?.to_string(), ctx.table)?;
    let t = ctx.endpoint.execute(&q, CANDIDATES)?;
    if t.boolean.is_some() {
        return Err(ToolError("the constraining query must be a SELECT query".into()));
    }
    filter_candidates(&t, opt_arg(args, "query"), ctx, "items")
}

fn spec(name: ToolName, description: &str, properties: Value, required: &[&str]) -> ToolSpec {
    ToolSpec {
        name: name.function_name().into(),
        description: description.into(),
        parameters: json!({"type": "object", "properties": properties, "required": required}),
    }
}

/// Declarations of all ten functions.
pub fn tool_specs(kg: &str) -> Vec<ToolSpec> {
    let s = |d: &str| json!({"type": "string", "description": d});
    vec![
        spec(ToolName::Exe, &format!("Execute a SPARQL query over {kg} and show the result as a table."), json!({"sparql": s("SPARQL query")}), &["sparql"]),
        spec(
            ToolName::Lst,
            "List triples matching the given subject, property and/or object. Omitted positions are unconstrained.",
            json!({"subject": s("IRI, e.g. wd:Q42"), "property": s("IRI, e.g. wdt:P31"), "object": s("IRI or literal")}),
            &[],
        ),
        spec(ToolName::Sen, &format!("Search {kg} entities by label or alias."), json!({"query": s("search keyword")}), &["query"]),
        spec(ToolName::Spr, &format!("Search {kg} properties by label or alias."), json!({"query": s("search keyword")}), &["query"]),
        spec(
            ToolName::Spe,
            "Search the properties used on a given entity, optionally filtered by keyword.",
            json!({"entity": s("entity IRI"), "query": s("optional keyword")}),
            &["entity"],
        ),
        spec(
            ToolName::Sop,
            "Search the objects occurring with a given property, optionally filtered by keyword.",
            json!({"property": s("property IRI"), "query": s("optional keyword")}),
            &["property"],
        ),
        spec(
            ToolName::Scn,
            "Search items ?x satisfying all given triple constraints, optionally filtered by keyword.",
            json!({"constraints": {"type": "array", "items": {"type": "string"}, "description": "triple patterns mentioning ?x, e.g. \"?x wdt:P31 wd:Q5\""}, "query": s("optional keyword")}),
            &["constraints"],
        ),
        spec(
            ToolName::Sac,
            "Search the items returned in the first column of a constraining SELECT query, optionally filtered by keyword.",
            json!({"sparql": s("constraining SELECT query"), "query": s("optional keyword")}),
            &["sparql"],
        ),
        spec(
            ToolName::Ans,
            "Finish with the cleaned SPARQL query and one to three questions it answers.",
            json!({"questions": {"type": "array", "items": {"type": "string"}, "minItems": 1, "maxItems": 3}, "sparql": s("cleaned SPARQL query")}),
            &["questions", "sparql"],
        ),
        spec(ToolName::Can, "Stop without a result and say why.", json!({"reason": s("why the query cannot be cleaned")}), &["reason"]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks() {
        assert_eq!(match_rank("Human", "human"), 0);
        assert_eq!(match_rank("human being", "human"), 1);
        assert_eq!(match_rank("modern human", "human"), 2);
        assert_eq!(match_rank("superhuman", "human"), 3);
        assert_eq!(match_rank("cat", "human"), 4);
    }

    #[test]
    fn predicates() {
        let t = PrefixTable::wikidata();
        assert_eq!(as_predicate("wd:P31", &t), "<http://www.wikidata.org/prop/direct/P31>");
        assert_eq!(as_predicate("wdt:P31", &t), "wdt:P31");
        assert_eq!(as_predicate("http://www.wikidata.org/entity/P17", &t), "<http://www.wikidata.org/prop/direct/P17>");
    }

    #[test]
    fn decoding_calls() {
        let c = ToolCallRequest { id: "1".into(), name: "nope".into(), arguments: "{}".into() };
        assert!(decode_call(&c).unwrap_err().contains("unknown function"));
        let c = ToolCallRequest { id: "1".into(), name: "EXE".into(), arguments: "{\"sparql\"".into() };
        assert!(decode_call(&c).unwrap_err().contains("not valid JSON"));
        let c = ToolCallRequest { id: "1".into(), name: "execute".into(), arguments: "[1]".into() };
        assert!(decode_call(&c).is_err());
        let c = ToolCallRequest { id: "1".into(), name: "execute".into(), arguments: "".into() };
        assert_eq!(decode_call(&c).unwrap().0, ToolName::Exe);
    }

    #[test]
    fn specs_cover_every_tool() {
        let names: Vec<_> = tool_specs("Wikidata").into_iter().map(|s| s.name).collect();
        assert_eq!(names.len(), ToolName::ALL.len());
        for t in ToolName::ALL {
            assert!(names.contains(&t.function_name().to_string()));
        }
    }
}
