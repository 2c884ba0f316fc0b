use std::collections::BTreeMap;

use slforge_core::sparql::PrefixTable;

use super::enrich::IriInfo;
use super::results::{Cell, ResultTable};

#[derive(Debug, Clone)]
pub struct RenderOptions<'a> {
    pub max_rows: usize,
    /// Longest cell in characters; longer cells end in an ellipsis.
    pub cell_width: usize,
    /// Used to shorten IRIs. An empty table prints them in full.
    pub prefixes: &'a PrefixTable,
}

impl<'a> RenderOptions<'a> {
    pub fn new(prefixes: &'a PrefixTable) -> Self {
        RenderOptions { max_rows: 30, cell_width: 120, prefixes }
    }
}

/// Formats `iri` compactly with its label, as `wd:Q5 (human)`.
pub fn render_iri(iri: &str, info: &BTreeMap<String, IriInfo>, prefixes: &PrefixTable) -> String {
    let short = prefixes.compact(iri);
    match info.get(iri).and_then(|i| i.label.as_deref()) {
        Some(label) => format!("{short} ({label})"),
        None => short,
    }
}

fn render_cell(cell: &Cell, info: &BTreeMap<String, IriInfo>, prefixes: &PrefixTable) -> String {
    match cell {
        Cell::Iri { value } => render_iri(value, info, prefixes),
        Cell::Literal { value, lang: Some(lang), .. } => format!("{value}@{lang}"),
        Cell::Literal { value, .. } => value.clone(),
        Cell::Blank { value } => format!("_:{value}"),
        Cell::Unbound => String::new(),
    }
}

fn fit(text: &str, width: usize) -> String {
    let mut s: String = text
        .chars()
        .map(|c| if c == '\n' || c == '\r' || c == '\t' { ' ' } else { c })
        .collect();
    if let Some((i, _)) = s.char_indices().nth(width) {
        s.truncate(i);
        if let Some((j, _)) = s.char_indices().last().filter(|_| width > 0) {
            s.truncate(j);
        }
        s.push('…');
    }
    s.replace('|', "\\|")
}

fn row_line(cells: impl IntoIterator<Item = String>) -> String {
    let mut line = String::from("|");
    for c in cells {
        line.push(' ');
        line.push_str(&c);
        line.push_str(" |");
    }
    line
}

fn plural(n: u64) -> &'static str {
    if n == 1 {
        "row"
    } else {
        "rows"
    }
}

/// Pipe-delimited markdown table of at most `max_rows` rows, followed by a
/// line with the row count (and how many are shown when cut short).
pub fn render_result_markdown(table: &ResultTable, info: &BTreeMap<String, IriInfo>, opts: &RenderOptions) -> String {
    if let Some(b) = table.boolean {
        return format!("| result |\n| --- |\n| {b} |");
    }
    let mut out = vec![
        row_line(table.variables.iter().map(|v| fit(&format!("?{v}"), opts.cell_width))),
        row_line(table.variables.iter().map(|_| "---".to_string())),
    ];
    let shown = table.rows.len().min(opts.max_rows);
    for row in &table.rows[..shown] {
        out.push(row_line(row.iter().map(|c| fit(&render_cell(c, info, opts.prefixes), opts.cell_width))));
    }
    let total = table.total_rows().max(table.rows.len() as u64);
    out.push(String::new());
    if table.truncated || shown < table.rows.len() {
        let more = if table.truncated && table.total_row_count_hint.is_none() { "+" } else { "" };
        out.push(format!("{shown} of {total}{more} rows shown"));
    } else {
        out.push(format!("{total} {}", plural(total)));
    }
    out.join("\n")
}
