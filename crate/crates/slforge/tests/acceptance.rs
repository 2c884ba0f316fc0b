//! One PASS/FAIL line per acceptance criterion.
//!
//! Criterion 3 needs the published query-log dataset release; point `SLF_WDQL` at the
//! release file (or a directory of `.jsonl` files) to run it.

mod support;

#[path = "../../core/tests/oracle/stats50.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;
use slforge::agent::{
    run_s2q, AgentOutcome, ModelTurn, OutcomeKind, RunLimits, ScriptedBackend, SparqlSearch, ToolCallRequest, ToolContext,
};
use slforge::cli::{read_queries, PreprocessedEntry, QueryFormat};
use slforge::config::{EnrichConfig, Limits, SplitConfig};
use slforge::curate::{export_pairs, import_pairs, validate_pair, DatasetPair, KgqaRecord, Provenance};
use slforge::embed::embed_pairs;
use slforge::log::LogEntry;
use slforge::records::read_jsonl;
use slforge::split::cluster_and_split;
use slforge_core::analysis::{compute_corpus_stats, StatsReport};
use slforge_core::split::{cluster_sizes, Split};
use slforge_core::sparql::{parse_query, parse_query_with, serialize_query, PrefixTable};
use support::pipeline::{scripts, Work};
use support::{planted, FixtureServer, KG, LOG_1000, SYNTHETIC_KG};

enum Verdict {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn c1_parser() -> Outcome {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/parser_corpus.rq"))
        .map_err(|e| e.to_string())?;
    let corpus: Vec<&str> = text.split("\n#---\n").map(str::trim).filter(|s| !s.is_empty()).collect();
    check(corpus.len() >= 60, || format!("only {} queries", corpus.len()))?;
    let started = Instant::now();
    let mut failed = Vec::new();
    for (i, q) in corpus.iter().enumerate() {
        let ok = parse_query(q).ok().and_then(|ast| {
            let once = serialize_query(&ast);
            let again = parse_query(&once).ok()?;
            (again == ast && serialize_query(&again) == once).then_some(())
        });
        if ok.is_none() {
            failed.push(i);
        }
    }
    let took = started.elapsed();
    check(failed.is_empty(), || format!("queries {failed:?} do not round-trip"))?;
    check(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("{} queries round-trip in {took:.2?}", corpus.len()))
}

fn c2_stats() -> Outcome {
    let rows = oracle::load();
    let report = compute_corpus_stats(rows.iter().map(|r| r.query.as_str()), &PrefixTable::wikidata());
    let diffs = oracle::compare(&report, &oracle::expected(&rows));
    check(diffs.is_empty(), || diffs.join("; "))?;
    Ok(format!("{} queries match the hand-computed oracle", report.queries))
}

fn release_files(root: &Path) -> Vec<PathBuf> {
    if root.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(root)
            .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
            .unwrap_or_default();
        files.retain(|p| p.to_str().is_some_and(|s| s.ends_with(".jsonl") || s.ends_with(".jsonl.gz")));
        files.sort();
        files
    } else {
        vec![root.to_path_buf()]
    }
}

fn c3_published(root: &Path) -> Outcome {
    let started = Instant::now();
    let mut queries = Vec::new();
    for f in release_files(root) {
        queries.extend(read_queries(&f, QueryFormat::Auto).map_err(|e| e.to_string())?);
    }
    let r: StatsReport = compute_corpus_stats(queries.iter().map(String::as_str), &PrefixTable::wikidata());
    let mut bad = Vec::new();
    let mut within = |name: &str, got: f64, want: f64, tol: f64| {
        if (got - want).abs() > tol {
            bad.push(format!("{name} {got:.2} vs {want}"));
        }
    };
    within("queries", r.queries as f64, 200_186.0, 0.0);
    within("select", r.select_pct, 94.9, 0.3);
    within("ask", r.ask_pct, 5.1, 0.3);
    within("advanced", r.advanced_pct, 59.2, 0.3);
    within("avg triples", r.avg_triples, 3.18, 0.0318);
    within("distinct iris", r.distinct_iris as f64, 60_757.0, 607.57);
    let constructs = [62.5, 28.5, 5.0, 1.6, 7.3, 11.6, 19.7, 26.8, 59.1, 12.5, 16.9, 2.6];
    let got = [r.filt, r.opt, r.un, r.min, r.val, r.grp, r.ord, r.lim, r.func, r.agg, r.paths, r.subq];
    for ((name, g), w) in oracle::FLAG_COLUMNS.iter().zip(got).zip(constructs) {
        within(name, g, w, 0.5);
    }
    let took = started.elapsed();
    within("minutes", took.as_secs_f64() / 60.0, 0.0, 10.0);
    check(bad.is_empty(), || bad.join("; "))?;
    Ok(format!("{} queries reproduce the published numbers in {took:.0?}", r.queries))
}

fn c4_preprocess() -> Outcome {
    let w = Work::new("http://127.0.0.1:9/sparql");
    let r = w.run(&["ingest", "--input", LOG_1000]);
    let counts = &r.summary["counts"];
    check(counts["rows"] == 1000 && counts["duplicates"] == 400, || format!("counts {counts}"))?;
    let entries: Vec<LogEntry> = read_jsonl(&w.path("entries.jsonl")).map_err(|e| e.to_string())?;
    check(entries.len() == 600, || format!("{} entries", entries.len()))?;

    // The fourth column names each distinct query.
    let text = std::fs::read_to_string(LOG_1000).map_err(|e| e.to_string())?;
    let groups: BTreeSet<&str> = text.lines().skip(1).filter_map(|l| l.rsplit('\t').next()).collect();
    check(groups.len() == entries.len(), || format!("{} annotated groups", groups.len()))?;

    w.run(&["preprocess"]);
    let pre: Vec<PreprocessedEntry> = read_jsonl(&w.path("preprocessed.jsonl")).map_err(|e| e.to_string())?;
    let had = entries.iter().filter(|e| e.raw_query.contains("wikibase:label")).count();
    let table = PrefixTable::wikidata();
    let left = pre
        .iter()
        .filter(|p| p.preprocessed_query.contains("wikibase:label") || p.preprocessed_query.contains("http://wikiba.se/ontology#label"))
        .count();
    let unparsed = pre.iter().filter(|p| parse_query_with(&p.preprocessed_query, &table).is_err()).count();
    check(pre.len() == 600 && left == 0 && unparsed == 0, || {
        format!("{} outputs, {left} still use the label service, {unparsed} do not parse", pre.len())
    })?;
    Ok(format!("1000 rows dedup to 600; label service stripped from {had} queries; all re-parse"))
}

fn c5_agent() -> Outcome {
    let server = FixtureServer::start(&[KG]);
    let endpoint = server.endpoint();
    let (table, enrich, limits) = (PrefixTable::wikidata(), EnrichConfig::default(), Limits::default());
    let search = SparqlSearch { endpoint: &endpoint, enrich: &enrich };
    let ctx = ToolContext { endpoint: &endpoint, search: &search, table: &table, enrich: &enrich, limits: &limits };
    let doc = "## Original query\n\nASK { wd:Q42 wdt:P31 wd:Q5 }";
    let run = |turns: ScriptedBackend, max_steps| run_s2q(doc, &turns, &ctx, "Wikidata", RunLimits { max_steps, reiterations: 2 });
    let call = |name: &str, args| ModelTurn::calls(vec![ToolCallRequest::new("c1", name, args)]);
    let good = "SELECT ?person WHERE { ?person wdt:P31 wd:Q5 }";

    let answered = run(ScriptedBackend::new([call("answer", json!({"questions": ["Who is human?"], "sparql": good}))]), 20);
    let cancelled = run(ScriptedBackend::new([call("cancel", json!({"reason": "intent unrecoverable"}))]), 20);
    let budget = run(ScriptedBackend::repeating(call("execute", json!({"sparql": "ASK { wd:Q42 wdt:P31 wd:Q5 }"}))), 20);
    let shape = |o: &AgentOutcome| (o.step_count, o.transcript.len());
    check(matches!(answered.kind, OutcomeKind::Answered { .. }) && shape(&answered) == (1, 3), || format!("answered {answered:?}"))?;
    check(matches!(cancelled.kind, OutcomeKind::Cancelled { .. }) && shape(&cancelled) == (1, 3), || format!("cancelled {cancelled:?}"))?;
    check(matches!(budget.kind, OutcomeKind::Invalid { .. }) && shape(&budget) == (20, 42), || format!("budget {:?}", shape(&budget)))?;

    for o in [&answered, &cancelled, &budget] {
        let saved = serde_json::to_string(o).map_err(|e| e.to_string())?;
        let restored: AgentOutcome = serde_json::from_str(&saved).map_err(|e| e.to_string())?;
        let replayed = run(ScriptedBackend::from_transcript(&restored.transcript), 20);
        check(&replayed == o, || format!("replay of {:?} differs", o.kind))?;
    }
    Ok("answered 1/3, cancelled 1/3, budget 20/42 (steps/messages); replays identical".into())
}

#[derive(Deserialize)]
struct Case {
    expect: String,
    sparql: String,
}

fn c6_validation() -> Outcome {
    let server = FixtureServer::start(&[KG]);
    let endpoint = server.endpoint();
    let table = PrefixTable::wikidata();
    let cases: Vec<Case> =
        read_jsonl(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/validation_20.jsonl"))).map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (n, c) in cases.iter().enumerate() {
        let pair = DatasetPair::new(
            vec![format!("question {n}?")],
            c.sparql.clone(),
            Provenance { interval: "I1".into(), raw_hash: format!("{n:064x}"), model: "scripted".into() },
        );
        let v = validate_pair(&pair, &endpoint, &table, Duration::from_secs(10)).to_string();
        check(v == c.expect, || format!("{:?}: {v}, expected {}", c.sparql, c.expect))?;
        *counts.entry(v).or_default() += 1;
    }
    let want: BTreeMap<String, usize> = [("valid", 10), ("invalid:parse", 5), ("invalid:empty", 5)].map(|(k, v)| (k.to_string(), v)).into();
    check(counts == want, || format!("{counts:?}"))?;
    Ok("10 valid, 5 parse, 5 empty".into())
}

fn c7_split() -> Outcome {
    let p = planted(10_000, 128, 7);
    let cfg = SplitConfig::default();
    let run = |workers: usize, cfg: &SplitConfig| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let v = embed_pairs(&p.questions, &p, 64).map_err(|e| e.to_string())?;
            cluster_and_split(&v, cfg).map_err(|e| e.to_string())
        })
    };
    let r = run(4, &cfg)?;
    let mut split_of: BTreeMap<usize, Split> = BTreeMap::new();
    for (c, s) in r.cluster_ids.iter().zip(&r.splits) {
        check(*split_of.entry(*c).or_insert(*s) == *s, || format!("cluster {c} spans splits"))?;
    }
    let n = r.splits.len() as f64;
    let mut shares = Vec::new();
    for (s, target) in Split::ALL.iter().zip([0.8, 0.1, 0.1]) {
        let share = r.splits.iter().filter(|x| *x == s).count() as f64 / n;
        check((share - target).abs() <= 0.01, || format!("{s:?} share {share:.4}"))?;
        shares.push(format!("{:.1}", share * 100.0));
    }
    let clusters = cluster_sizes(&r.cluster_ids).len();
    check(r.dedup.len() == clusters, || format!("dedup {} vs {clusters} clusters", r.dedup.len()))?;
    check(run(4, &cfg)? == r, || "second run differs".into())?;
    for workers in [1, 2, 8] {
        check(run(workers, &cfg)? == r, || format!("{workers} workers differ"))?;
    }
    Ok(format!("{clusters} clusters, shares {}, dedup {}", shares.join("/"), r.dedup.len()))
}

fn c8_end_to_end() -> Outcome {
    let started = Instant::now();
    let server = FixtureServer::start(&[KG, SYNTHETIC_KG]);
    let w = Work::new(&server.url);
    w.run(&["ingest", "--input", LOG_1000]);
    w.run(&["preprocess"]);
    w.run(&["enrich"]);
    w.write_script(&scripts(&w.path("inputs.jsonl")));
    let g = w.run(&["generate"]);
    check(g.failed == 0, || format!("generate {}", g.summary))?;
    w.run(&["validate"]);
    w.run(&["split"]);
    let e = w.run(&["export"]);
    let took = started.elapsed();

    let dataset = w.path("export/dataset.jsonl");
    let pairs = import_pairs(&dataset).map_err(|e| e.to_string())?;
    check(!pairs.is_empty() && pairs.iter().all(|p| p.split.is_some() && p.cluster_id.is_some()), || "pairs lack splits".into())?;
    let copy = w.dir.path().join("copy.jsonl");
    export_pairs(&pairs, &copy).map_err(|e| e.to_string())?;
    let same = std::fs::read(&copy).map_err(|e| e.to_string())? == std::fs::read(&dataset).map_err(|e| e.to_string())?;
    check(same, || "import does not round-trip".into())?;
    let mut records = 0;
    for layout in ["kgqa", "kgqa_dedup"] {
        for s in Split::ALL {
            let r: Vec<KgqaRecord> =
                read_jsonl(&w.path(&format!("export/{layout}/{}.jsonl", s.name()))).map_err(|e| e.to_string())?;
            records += r.len();
        }
    }
    check(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("{} pairs, {records} KGQA records, {} clusters in {took:.1?}", pairs.len(), e.summary["clusters"]))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Verdict {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Verdict::Pass(detail),
        Ok(Err(why)) => Verdict::Fail(why),
        Err(panic) => Verdict::Fail(
            panic.downcast_ref::<String>().cloned().or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default(),
        ),
    }
}

fn main() {
    let criteria: Vec<(u8, &str, Box<dyn FnOnce() -> Verdict>)> = vec![
        (1, "parser conformance", Box::new(|| guarded(c1_parser))),
        (2, "statistics oracle", Box::new(|| guarded(c2_stats))),
        (
            3,
            "published statistics",
            Box::new(|| match std::env::var_os("SLF_WDQL") {
                Some(p) => guarded(|| c3_published(Path::new(&p))),
                None => Verdict::NotRun("SLF_WDQL is not set; the release must be downloaded".into()),
            }),
        ),
        (4, "preprocessing", Box::new(|| guarded(c4_preprocess))),
        (5, "agent determinism", Box::new(|| guarded(c5_agent))),
        (6, "validation filter", Box::new(|| guarded(c6_validation))),
        (7, "split invariants", Box::new(|| guarded(c7_split))),
        (8, "end to end", Box::new(|| guarded(c8_end_to_end))),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        match run() {
            Verdict::Pass(d) => println!("PASS {n} {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL {n} {name}: {d}");
            }
            Verdict::NotRun(d) => println!("FAIL {n} {name}: not run, {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
