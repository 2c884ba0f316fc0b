//! Query repairs applied before agent input, and log deduplication keys.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::digest::{sha256, Digest256};
use crate::sparql::ast::*;
use crate::sparql::parser::parse_query_with;
use crate::sparql::prefixes::{PrefixTable, LABEL_SERVICE};
use crate::sparql::serialize::serialize_query;
use crate::sparql::visit::{modifier_variables, pattern_variables, walk_query, Scope, Visitor};

// ----- label service ------------------------------------------------------

fn is_label_service(el: &PatternElement) -> bool {
    matches!(el, PatternElement::Service { endpoint: Term::Iri(i), .. } if i.absolute == LABEL_SERVICE)
}

/// Removes every `SERVICE wikibase:label { ... }` clause at any depth.
/// Groups left empty by the removal are dropped, a `UNION` branch left empty
/// is dropped, and a `UNION` left with one branch becomes a plain group.
pub fn strip_label_service(mut q: Query) -> Query {
    strip_query(&mut q);
    q
}

fn strip_query(q: &mut Query) -> bool {
    match &mut q.pattern {
        Some(p) => strip_group(p),
        None => false,
    }
}

/// Returns whether anything was removed below `g`.
fn strip_group(g: &mut GroupPattern) -> bool {
    let els = match g {
        GroupPattern::SubSelect(q) => return strip_query(q),
        GroupPattern::Elements(els) => els,
    };
    let mut changed = false;
    let old = core::mem::take(els);
    for mut el in old {
        let mut collapsed = None;
        if is_label_service(&el) {
            changed = true;
            continue;
        }
        let keep = match &mut el {
            PatternElement::Group(inner)
            | PatternElement::Optional(inner)
            | PatternElement::Minus(inner)
            | PatternElement::Graph { pattern: inner, .. }
            | PatternElement::Service { pattern: inner, .. } => {
                let c = strip_group(inner);
                changed |= c;
                !(c && inner.is_empty())
            }
            PatternElement::Union(alts) => {
                let mut c = false;
                alts.retain_mut(|alt| {
                    let ci = strip_group(alt);
                    c |= ci;
                    !(ci && alt.is_empty())
                });
                changed |= c;
                if alts.len() == 1 && c {
                    collapsed = alts.pop();
                }
                !alts.is_empty() || collapsed.is_some()
            }
            PatternElement::Filter(e) | PatternElement::Bind(e, _) => {
                changed |= strip_expr(e);
                true
            }
            PatternElement::Triples(_) | PatternElement::Values(_) => true,
        };
        if !keep {
            continue;
        }
        if let Some(only) = collapsed {
            el = PatternElement::Group(only);
        }
        if let (PatternElement::Triples(next), Some(PatternElement::Triples(prev))) =
            (&mut el, els.last_mut())
        {
            prev.append(next);
            continue;
        }
        els.push(el);
    }
    changed
}

fn strip_expr(e: &mut Expression) -> bool {
    match e {
        Expression::Term(_) => false,
        Expression::Binary(_, l, r) => strip_expr(l) | strip_expr(r),
        Expression::Unary(_, x) => strip_expr(x),
        Expression::In { expr, list, .. } => {
            let mut c = strip_expr(expr);
            for i in list {
                c |= strip_expr(i);
            }
            c
        }
        Expression::Builtin(_, args) | Expression::FunctionCall { args, .. } => {
            args.iter_mut().fold(false, |c, a| strip_expr(a) | c)
        }
        Expression::Exists { pattern, .. } => strip_group(pattern),
        Expression::Aggregate(a) => a.arg.as_mut().is_some_and(|x| strip_expr(x)),
    }
}

// ----- projection pruning -------------------------------------------------

/// Drops top-level projected variables that occur nowhere in the pattern,
/// `VALUES`, `GROUP BY`, `HAVING` or `ORDER BY`. Expression projections are
/// kept. If nothing would remain the projection becomes `*`.
pub fn prune_unused_select_vars(mut q: Query) -> Query {
    let mut used = pattern_variables(&q);
    used.extend(modifier_variables(&q.modifiers));
    if let QueryForm::Select(sel) = &mut q.form {
        if let Some(items) = &mut sel.items {
            items.retain(|item| match item {
                SelectItem::Var(v) => used.contains(v),
                SelectItem::Expr(..) => true,
            });
            if items.is_empty() {
                sel.items = None;
            }
        }
    }
    q
}

// ----- anonymization markers ---------------------------------------------

/// A literal occurrence whose lexical form is `string<N>`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkedLiteral {
    /// Position among all literal occurrences of the query, in traversal order.
    pub occurrence: usize,
    pub lexical: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnonymizationMarkers {
    pub anonymized_literals: Vec<MarkedLiteral>,
    /// Distinct variable names of the form `v<N>`, in first-occurrence order.
    pub anonymized_variables: Vec<String>,
    pub has_literals: bool,
    pub has_variables: bool,
}

fn numbered(s: &str, stem: &str) -> bool {
    s.strip_prefix(stem)
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

pub fn detect_anonymization_markers(q: &Query) -> AnonymizationMarkers {
    struct Scan {
        m: AnonymizationMarkers,
        seen: BTreeSet<String>,
        literal_count: usize,
    }
    impl Visitor for Scan {
        fn literal(&mut self, lit: &Literal, _scope: Scope) {
            if numbered(&lit.lexical, "string") {
                self.m.anonymized_literals.push(MarkedLiteral {
                    occurrence: self.literal_count,
                    lexical: lit.lexical.clone(),
                });
            }
            self.literal_count += 1;
        }
        fn var(&mut self, v: &Var) {
            if numbered(v.name(), "v") && self.seen.insert(v.name().into()) {
                self.m.anonymized_variables.push(v.name().into());
            }
        }
    }
    let mut s = Scan { m: AnonymizationMarkers::default(), seen: BTreeSet::new(), literal_count: 0 };
    walk_query(&mut s, q);
    s.m.has_literals = !s.m.anonymized_literals.is_empty();
    s.m.has_variables = !s.m.anonymized_variables.is_empty();
    s.m
}

// ----- deduplication ------------------------------------------------------

/// The text two log queries are compared by: the canonical serialization if
/// the query parses, otherwise the trimmed raw text.
pub fn dedup_key(text: &str, table: &PrefixTable) -> String {
    match parse_query_with(text, table) {
        Ok(q) => serialize_query(&q),
        Err(_) => String::from(text.trim()),
    }
}

pub fn raw_hash(text: &str, table: &PrefixTable) -> Digest256 {
    sha256(dedup_key(text, table).as_bytes())
}

/// First-occurrence filter over hashes.
#[derive(Debug, Clone, Default)]
pub struct Deduplicator {
    seen: BTreeSet<Digest256>,
    pub input: u64,
    pub output: u64,
}

impl Deduplicator {
    pub fn new() -> Self {
        Self::default()
    }

    /// True the first time `hash` is offered.
    pub fn admit(&mut self, hash: Digest256) -> bool {
        self.input += 1;
        let fresh = self.seen.insert(hash);
        self.output += fresh as u64;
        fresh
    }
}

/// Keeps the first item per key, preserving input order.
pub fn deduplicate<T, I, F>(items: I, mut key: F) -> Vec<T>
where
    I: IntoIterator<Item = T>,
    F: FnMut(&T) -> Digest256,
{
    let mut d = Deduplicator::new();
    items.into_iter().filter(|t| d.admit(key(t))).collect()
}
