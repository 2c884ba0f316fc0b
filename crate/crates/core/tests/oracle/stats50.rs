//! Expected statistics for `fixtures/stats50.tsv`, computed only from the
//! hand-written annotation columns of that file.

#![allow(dead_code)]

use std::collections::BTreeSet;

pub const FLAG_COLUMNS: [&str; 12] =
    ["filt", "opt", "un", "min", "val", "grp", "ord", "lim", "func", "agg", "paths", "subq"];

pub struct Row {
    pub query: String,
    pub form: String,
    pub triples: u64,
    pub advanced: bool,
    pub distinct: bool,
    pub flags: [bool; 12],
    pub pattern: String,
    /// Absolute IRIs.
    pub iris: BTreeSet<String>,
    /// (lexical, kind, tag-or-datatype)
    pub literals: BTreeSet<(String, String, String)>,
    pub languages: BTreeSet<String>,
}

pub fn fixture_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/stats50.tsv")
}

fn expand(prefixed: &str) -> String {
    let (p, local) = prefixed.split_once(':').expect("prefixed name");
    let ns = match p {
        "wd" => "http://www.wikidata.org/entity/",
        "wdt" => "http://www.wikidata.org/prop/direct/",
        "p" => "http://www.wikidata.org/prop/",
        "ps" => "http://www.wikidata.org/prop/statement/",
        "pq" => "http://www.wikidata.org/prop/qualifier/",
        "rdfs" => "http://www.w3.org/2000/01/rdf-schema#",
        "schema" => "http://schema.org/",
        "bd" => "http://www.bigdata.com/rdf#",
        "wikibase" => "http://wikiba.se/ontology#",
        other => panic!("fixture uses unexpected prefix {other}"),
    };
    format!("{ns}{local}")
}

fn literal(token: &str) -> (String, String, String) {
    let (kind, rest) = token.split_once(':').expect("kind:value");
    let xsd = "http://www.w3.org/2001/XMLSchema#";
    match kind {
        "plain" => (rest.into(), "plain".into(), String::new()),
        "lang" => {
            let (lex, tag) = rest.rsplit_once('@').expect("lexical@tag");
            (lex.into(), "lang".into(), tag.to_lowercase())
        }
        dt => (rest.into(), "typed".into(), format!("{xsd}{dt}")),
    }
}

pub fn load() -> Vec<Row> {
    let text = std::fs::read_to_string(fixture_path()).expect("fixture");
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let c: Vec<&str> = line.split('\t').collect();
            assert_eq!(c.len(), 21, "bad row: {line}");
            let bit = |s: &str| s == "1";
            let mut flags = [false; 12];
            for (i, f) in flags.iter_mut().enumerate() {
                *f = bit(c[5 + i]);
            }
            Row {
                query: c[0].into(),
                form: c[1].into(),
                triples: c[2].parse().unwrap(),
                advanced: bit(c[3]),
                distinct: bit(c[4]),
                flags,
                pattern: c[17].into(),
                iris: c[18].split_whitespace().map(expand).collect(),
                literals: c[19].split(';').filter(|s| !s.is_empty()).map(literal).collect(),
                languages: c[20].split_whitespace().map(String::from).collect(),
            }
        })
        .collect()
}

pub struct Expected {
    pub queries: u64,
    pub distinct_iris: u64,
    pub avg_triples: f64,
    pub advanced_pct: f64,
    pub select_pct: f64,
    pub ask_pct: f64,
    pub construct_pcts: [f64; 12],
    pub ent_dir: u64,
    pub stmt_qual: u64,
    pub r#ref: u64,
    pub reif: u64,
    pub adv: u64,
    pub cov: u64,
    pub dist_patterns: u64,
    pub uniq_pct: f64,
    pub lit: u64,
    pub lang: u64,
}

fn group_of(prefixed_ns: &str) -> Option<(&'static str, &'static str)> {
    // (label, group) for the namespaces the fixture uses.
    [
        ("http://www.wikidata.org/entity/", "wd", "ent_dir"),
        ("http://www.wikidata.org/prop/direct/", "wdt", "ent_dir"),
        ("http://www.wikidata.org/prop/statement/", "ps", "stmt_qual"),
        ("http://www.wikidata.org/prop/qualifier/", "pq", "stmt_qual"),
        ("http://wikiba.se/ontology#", "wikibase", "adv"),
    ]
    .iter()
    .find(|(ns, _, _)| {
        prefixed_ns.starts_with(ns) && !prefixed_ns[ns.len()..].contains('/')
    })
    .map(|(_, l, g)| (*l, *g))
    .or_else(|| {
        let ns = "http://www.wikidata.org/prop/";
        (prefixed_ns.starts_with(ns) && !prefixed_ns[ns.len()..].contains('/'))
            .then_some(("p", "stmt_qual"))
    })
}

pub fn expected(rows: &[Row]) -> Expected {
    let n = rows.len() as u64;
    let pct = |k: usize| k as f64 * 100.0 / n as f64;
    let iris: BTreeSet<&String> = rows.iter().flat_map(|r| &r.iris).collect();
    let mut groups = std::collections::BTreeMap::<&str, u64>::new();
    let mut covered = BTreeSet::new();
    for iri in &iris {
        if let Some((label, group)) = group_of(iri) {
            *groups.entry(group).or_default() += 1;
            covered.insert(label);
        }
    }
    let mut construct_pcts = [0.0; 12];
    for (i, p) in construct_pcts.iter_mut().enumerate() {
        *p = pct(rows.iter().filter(|r| r.flags[i]).count());
    }
    let patterns: BTreeSet<&String> = rows.iter().map(|r| &r.pattern).collect();
    let g = |k: &str| groups.get(k).copied().unwrap_or(0);
    Expected {
        queries: n,
        distinct_iris: iris.len() as u64,
        avg_triples: rows.iter().map(|r| r.triples).sum::<u64>() as f64 / n as f64,
        advanced_pct: pct(rows.iter().filter(|r| r.advanced).count()),
        select_pct: pct(rows.iter().filter(|r| r.form == "SELECT").count()),
        ask_pct: pct(rows.iter().filter(|r| r.form == "ASK").count()),
        construct_pcts,
        ent_dir: g("ent_dir"),
        stmt_qual: g("stmt_qual"),
        r#ref: g("ref"),
        reif: g("reif"),
        adv: g("adv"),
        cov: covered.len() as u64,
        dist_patterns: patterns.len() as u64,
        uniq_pct: pct(patterns.len()),
        lit: rows.iter().flat_map(|r| &r.literals).collect::<BTreeSet<_>>().len() as u64,
        lang: rows.iter().flat_map(|r| &r.languages).collect::<BTreeSet<_>>().len() as u64,
    }
}

/// Differences between a computed report and the oracle, empty when they
/// agree (counts exactly, percentages to 0.1 points).
pub fn compare(report: &slforge_core::analysis::StatsReport, e: &Expected) -> Vec<String> {
    let mut diffs = Vec::new();
    let mut count = |name: &str, got: u64, want: u64| {
        if got != want {
            diffs.push(format!("{name}: got {got}, expected {want}"));
        }
    };
    count("queries", report.queries, e.queries);
    count("distinct_iris", report.distinct_iris, e.distinct_iris);
    count("ent_dir", report.ent_dir, e.ent_dir);
    count("stmt_qual", report.stmt_qual, e.stmt_qual);
    count("ref", report.r#ref, e.r#ref);
    count("reif", report.reif, e.reif);
    count("adv", report.adv, e.adv);
    count("cov", report.cov, e.cov);
    count("dist_patterns", report.dist_patterns, e.dist_patterns);
    count("lit", report.lit, e.lit);
    count("lang", report.lang, e.lang);
    let mut pcts = vec![
        ("avg_triples", report.avg_triples, e.avg_triples, 0.005),
        ("advanced_pct", report.advanced_pct, e.advanced_pct, 0.05),
        ("select_pct", report.select_pct, e.select_pct, 0.05),
        ("ask_pct", report.ask_pct, e.ask_pct, 0.05),
        ("uniq_pct", report.uniq_pct, e.uniq_pct, 0.05),
    ];
    for (i, got) in report.construct_pcts().iter().enumerate() {
        pcts.push((FLAG_COLUMNS[i], *got, e.construct_pcts[i], 0.05));
    }
    for (name, got, want, tol) in pcts {
        if (got - want).abs() > tol {
            diffs.push(format!("{name}: got {got:.3}, expected {want:.3}"));
        }
    }
    diffs
}
