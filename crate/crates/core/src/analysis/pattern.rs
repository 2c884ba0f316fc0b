use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use crate::digest::{sha256, Digest256};
use crate::sparql::ast::{Iri, Literal, Query, Var};
use crate::sparql::prefixes::wikidata_prefix_of;
use crate::sparql::serialize::{serialize_with, IriRole, Render};

/// Structural fingerprint of a query with names and constants abstracted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternKey {
    pub canonical: String,
    pub digest: Digest256,
}

impl PatternKey {
    pub fn hex(&self) -> String {
        crate::digest::to_hex(&self.digest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placeholder {
    Ent,
    Prop,
    Iri,
    /// Kept as the absolute IRI.
    Verbatim,
}

fn classify(absolute: &str) -> Placeholder {
    match absolute {
        "ENT" => return Placeholder::Ent,
        "PROP" => return Placeholder::Prop,
        "IRI" => return Placeholder::Iri,
        _ => {}
    }
    match wikidata_prefix_of(absolute) {
        None => Placeholder::Iri,
        Some("wd" | "wds" | "wdv" | "wdref" | "wdata") => Placeholder::Ent,
        Some("wikibase") => Placeholder::Verbatim,
        Some(_) => Placeholder::Prop,
    }
}

struct Normalizer {
    vars: BTreeMap<String, usize>,
    bnodes: BTreeMap<String, usize>,
    reparseable: bool,
}

impl Normalizer {
    fn token(&self, out: &mut String, name: &str) {
        if self.reparseable {
            out.push('<');
            out.push_str(name);
            out.push('>');
        } else {
            out.push_str(name);
        }
    }
}

impl Render for Normalizer {
    fn var(&mut self, out: &mut String, var: &Var) {
        let next = self.vars.len() + 1;
        let id = *self.vars.entry(var.name().into()).or_insert(next);
        out.push_str(&format!("?v{id}"));
    }

    fn blank_node(&mut self, out: &mut String, label: &str) {
        let next = self.bnodes.len() + 1;
        let id = *self.bnodes.entry(label.into()).or_insert(next);
        out.push_str(&format!("_:b{id}"));
    }

    fn iri(&mut self, out: &mut String, iri: &Iri, role: IriRole) {
        let kind = match role {
            IriRole::Term | IriRole::Predicate => classify(&iri.absolute),
            _ => Placeholder::Verbatim,
        };
        match kind {
            Placeholder::Ent => self.token(out, "ENT"),
            Placeholder::Prop => self.token(out, "PROP"),
            Placeholder::Iri => self.token(out, "IRI"),
            Placeholder::Verbatim => {
                out.push('<');
                out.push_str(&iri.absolute);
                out.push('>');
            }
        }
    }

    fn literal(&mut self, out: &mut String, _lit: &Literal) {
        out.push_str(if self.reparseable { "\"LIT\"" } else { "LIT" });
    }

    fn prologue(&self) -> bool {
        false
    }
}

fn render(q: &Query, reparseable: bool) -> String {
    let mut n = Normalizer { vars: BTreeMap::new(), bnodes: BTreeMap::new(), reparseable };
    serialize_with(q, &mut n)
}

/// Serializes with variables renamed `?v1, ?v2, ...` in order of first
/// appearance, Wikidata entity IRIs as `ENT`, Wikidata property IRIs as
/// `PROP`, other IRIs as `IRI` and every literal as `LIT`. IRIs of the
/// `wikibase:` ontology, function names and service endpoints are kept.
pub fn normalize_pattern(q: &Query) -> PatternKey {
    let canonical = render(q, false);
    let digest = sha256(canonical.as_bytes());
    PatternKey { canonical, digest }
}

/// The same normalization written as parseable SPARQL (`<ENT>`, `"LIT"`),
/// so that normalizing it again yields the same key.
pub fn normalized_query_text(q: &Query) -> String {
    render(q, true)
}
