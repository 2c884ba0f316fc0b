use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::constructs::{is_advanced, profile_constructs, ConstructProfile};
use super::literals::{collect_filter_languages, collect_literals};
use super::pattern::normalize_pattern;
use super::prefixes::PrefixProfile;
use crate::digest::Digest256;
use crate::sparql::ast::{FormKind, LiteralKey, Query};
use crate::sparql::parser::parse_query_with;
use crate::sparql::prefixes::PrefixTable;
use crate::sparql::visit::collect_iris;

/// Per-construct query counts, in Table-2 column order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstructCounts {
    pub filt: u64,
    pub opt: u64,
    pub un: u64,
    pub min: u64,
    pub val: u64,
    pub grp: u64,
    pub ord: u64,
    pub lim: u64,
    pub func: u64,
    pub agg: u64,
    pub paths: u64,
    pub subq: u64,
}

impl ConstructCounts {
    fn add_profile(&mut self, p: &ConstructProfile) {
        let b = |f: bool| f as u64;
        self.filt += b(p.filter);
        self.opt += b(p.optional);
        self.un += b(p.union);
        self.min += b(p.minus);
        self.val += b(p.values);
        self.grp += b(p.group_by);
        self.ord += b(p.order_by);
        self.lim += b(p.limit_or_offset);
        self.func += b(p.non_aggregate_functions);
        self.agg += b(p.aggregate_functions);
        self.paths += b(p.property_paths);
        self.subq += b(p.subqueries);
    }

    fn merge(&mut self, o: &ConstructCounts) {
        self.filt += o.filt;
        self.opt += o.opt;
        self.un += o.un;
        self.min += o.min;
        self.val += o.val;
        self.grp += o.grp;
        self.ord += o.ord;
        self.lim += o.lim;
        self.func += o.func;
        self.agg += o.agg;
        self.paths += o.paths;
        self.subq += o.subq;
    }

    pub fn as_array(&self) -> [u64; 12] {
        [
            self.filt, self.opt, self.un, self.min, self.val, self.grp, self.ord, self.lim,
            self.func, self.agg, self.paths, self.subq,
        ]
    }
}

pub const CONSTRUCT_COLUMNS: [&str; 12] =
    ["Filt", "Opt", "Un", "Min", "Val", "Grp", "Ord", "Lim", "Func", "Agg", "Paths", "Subq"];

/// Mergeable corpus accumulator. `merge` is associative and commutative, so
/// partial accumulators from any partition of a corpus combine to the same
/// result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub queries: u64,
    pub parse_failures: u64,
    pub triples: u64,
    pub advanced: u64,
    pub select: u64,
    pub ask: u64,
    pub construct: u64,
    pub describe: u64,
    pub distinct: u64,
    pub constructs: ConstructCounts,
    pub iris: BTreeSet<String>,
    /// Pattern digest to normalized text; a digest seen with two texts is a
    /// collision and is recorded in `pattern_collisions`.
    pub patterns: BTreeMap<Digest256, String>,
    pub pattern_collisions: u64,
    pub literals: BTreeSet<LiteralKey>,
    pub languages: BTreeSet<String>,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_query(&mut self, q: &Query) {
        let p = profile_constructs(q);
        self.queries += 1;
        self.triples += p.triples as u64;
        self.advanced += is_advanced(&p) as u64;
        match p.form {
            FormKind::Select => self.select += 1,
            FormKind::Ask => self.ask += 1,
            FormKind::Construct => self.construct += 1,
            FormKind::Describe => self.describe += 1,
        }
        self.distinct += p.distinct_flag as u64;
        self.constructs.add_profile(&p);
        self.iris.extend(collect_iris(q));
        let key = normalize_pattern(q);
        self.insert_pattern(key.digest, key.canonical);
        self.literals.extend(collect_literals(q));
        self.languages.extend(collect_filter_languages(q));
    }

    fn insert_pattern(&mut self, digest: Digest256, canonical: String) {
        match self.patterns.get(&digest) {
            Some(existing) if *existing != canonical => self.pattern_collisions += 1,
            Some(_) => {}
            None => {
                self.patterns.insert(digest, canonical);
            }
        }
    }

    /// Parses `text` and adds it, or counts a parse failure.
    pub fn add_text(&mut self, text: &str, table: &PrefixTable) -> bool {
        match parse_query_with(text, table) {
            Ok(q) => {
                self.add_query(&q);
                true
            }
            Err(_) => {
                self.parse_failures += 1;
                false
            }
        }
    }

    pub fn merge(&mut self, other: CorpusStats) {
        self.queries += other.queries;
        self.parse_failures += other.parse_failures;
        self.triples += other.triples;
        self.advanced += other.advanced;
        self.select += other.select;
        self.ask += other.ask;
        self.construct += other.construct;
        self.describe += other.describe;
        self.distinct += other.distinct;
        self.constructs.merge(&other.constructs);
        self.iris.extend(other.iris);
        self.pattern_collisions += other.pattern_collisions;
        for (d, c) in other.patterns {
            self.insert_pattern(d, c);
        }
        self.literals.extend(other.literals);
        self.languages.extend(other.languages);
    }

    pub fn report(&self, table: &PrefixTable) -> StatsReport {
        let n = self.queries;
        let pct = |k: u64| if n == 0 { 0.0 } else { k as f64 * 100.0 / n as f64 };
        let c = &self.constructs;
        let prefixes = PrefixProfile::from_iris(self.iris.iter().map(String::as_str), table);
        StatsReport {
            queries: n,
            parse_failures: self.parse_failures,
            distinct_iris: self.iris.len() as u64,
            total_triples: self.triples,
            avg_triples: if n == 0 { 0.0 } else { self.triples as f64 / n as f64 },
            advanced_pct: pct(self.advanced),
            select_pct: pct(self.select),
            ask_pct: pct(self.ask),
            construct_pct: pct(self.construct),
            describe_pct: pct(self.describe),
            distinct_pct: pct(self.distinct),
            filt: pct(c.filt),
            opt: pct(c.opt),
            un: pct(c.un),
            min: pct(c.min),
            val: pct(c.val),
            grp: pct(c.grp),
            ord: pct(c.ord),
            lim: pct(c.lim),
            func: pct(c.func),
            agg: pct(c.agg),
            paths: pct(c.paths),
            subq: pct(c.subq),
            ent_dir: prefixes.ent_dir as u64,
            stmt_qual: prefixes.stmt_qual as u64,
            r#ref: prefixes.r#ref as u64,
            reif: prefixes.reif as u64,
            adv: prefixes.adv as u64,
            ungrouped: prefixes.ungrouped as u64,
            cov: prefixes.coverage() as u64,
            covered_prefixes: prefixes.covered.into_iter().collect(),
            dist_patterns: self.patterns.len() as u64,
            uniq_pct: pct(self.patterns.len() as u64),
            pattern_collisions: self.pattern_collisions,
            lit: self.literals.len() as u64,
            lang: self.languages.len() as u64,
        }
    }
}

/// Corpus statistics, one field per table column. Percentages are over
/// parseable queries and lie in `[0, 100]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StatsReport {
    pub queries: u64,
    pub parse_failures: u64,
    pub distinct_iris: u64,
    pub total_triples: u64,
    pub avg_triples: f64,
    pub advanced_pct: f64,
    pub select_pct: f64,
    pub ask_pct: f64,
    pub construct_pct: f64,
    pub describe_pct: f64,
    pub distinct_pct: f64,
    pub filt: f64,
    pub opt: f64,
    pub un: f64,
    pub min: f64,
    pub val: f64,
    pub grp: f64,
    pub ord: f64,
    pub lim: f64,
    pub func: f64,
    pub agg: f64,
    pub paths: f64,
    pub subq: f64,
    pub ent_dir: u64,
    pub stmt_qual: u64,
    #[cfg_attr(feature = "serde", serde(rename = "ref"))]
    pub r#ref: u64,
    pub reif: u64,
    pub adv: u64,
    /// prn/wdata IRIs, which belong to no group.
    pub ungrouped: u64,
    /// Number of the 19 Wikidata prefixes covered.
    pub cov: u64,
    pub covered_prefixes: Vec<String>,
    pub dist_patterns: u64,
    pub uniq_pct: f64,
    pub pattern_collisions: u64,
    pub lit: u64,
    pub lang: u64,
}

impl StatsReport {
    pub fn construct_pcts(&self) -> [f64; 12] {
        [
            self.filt, self.opt, self.un, self.min, self.val, self.grp, self.ord, self.lim,
            self.func, self.agg, self.paths, self.subq,
        ]
    }
}

pub fn compute_corpus_stats<'a, I>(corpus: I, table: &PrefixTable) -> StatsReport
where
    I: IntoIterator<Item = &'a str>,
{
    let mut acc = CorpusStats::new();
    for text in corpus {
        acc.add_text(text, table);
    }
    acc.report(table)
}
