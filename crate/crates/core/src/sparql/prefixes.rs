use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// The 19 prefixes the Wikidata Query Service documents for its RDF model,
/// with their namespaces.
pub const WIKIDATA_PREFIXES: [(&str, &str); 19] = [
    ("wd", "http://www.wikidata.org/entity/"),
    ("wdt", "http://www.wikidata.org/prop/direct/"),
    ("p", "http://www.wikidata.org/prop/"),
    ("ps", "http://www.wikidata.org/prop/statement/"),
    ("pq", "http://www.wikidata.org/prop/qualifier/"),
    ("pr", "http://www.wikidata.org/prop/reference/"),
    ("prv", "http://www.wikidata.org/prop/reference/value/"),
    ("prn", "http://www.wikidata.org/prop/reference/value-normalized/"),
    ("psn", "http://www.wikidata.org/prop/statement/value-normalized/"),
    ("pqn", "http://www.wikidata.org/prop/qualifier/value-normalized/"),
    ("psv", "http://www.wikidata.org/prop/statement/value/"),
    ("pqv", "http://www.wikidata.org/prop/qualifier/value/"),
    ("wdno", "http://www.wikidata.org/prop/novalue/"),
    ("wdref", "http://www.wikidata.org/reference/"),
    ("wds", "http://www.wikidata.org/entity/statement/"),
    ("wdv", "http://www.wikidata.org/value/"),
    ("wdata", "http://www.wikidata.org/wiki/Special:EntityData/"),
    ("wdtn", "http://www.wikidata.org/prop/direct-normalized/"),
    ("wikibase", "http://wikiba.se/ontology#"),
];

/// Common vocabularies the query service predeclares besides the Wikidata ones.
pub const COMMON_PREFIXES: [(&str, &str); 16] = [
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("schema", "http://schema.org/"),
    ("bd", "http://www.bigdata.com/rdf#"),
    ("hint", "http://www.bigdata.com/queryHints#"),
    ("geo", "http://www.opengis.net/ont/geosparql#"),
    ("geof", "http://www.opengis.net/def/geosparql/function/"),
    ("mwapi", "https://www.mediawiki.org/ontology#API/"),
    ("gas", "http://www.bigdata.com/rdf/gas#"),
    ("prov", "http://www.w3.org/ns/prov#"),
    ("dct", "http://purl.org/dc/terms/"),
    ("ontolex", "http://www.w3.org/ns/lemon/ontolex#"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
];

/// The label service `SERVICE wikibase:label { ... }` endpoint.
pub const LABEL_SERVICE: &str = "http://wikiba.se/ontology#label";

/// Mapping from prefix label to namespace IRI used to resolve prefixed names
/// that a query does not declare itself.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrefixTable {
    map: BTreeMap<String, String>,
}

impl PrefixTable {
    pub fn empty() -> Self {
        PrefixTable::default()
    }

    /// The Wikidata prefixes plus the common vocabularies.
    pub fn wikidata() -> Self {
        let mut table = PrefixTable::default();
        for (label, ns) in WIKIDATA_PREFIXES.iter().chain(COMMON_PREFIXES.iter()) {
            table.insert(*label, *ns);
        }
        table
    }

    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        self.map.insert(label.into(), namespace.into());
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.map.get(label).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// The label whose namespace is the longest prefix of `iri`.
    pub fn label_for(&self, iri: &str) -> Option<&str> {
        self.map
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .max_by_key(|(_, ns)| ns.len())
            .map(|(label, _)| label.as_str())
    }

    /// Shortens `iri` to `label:local` when a namespace matches and the local
    /// part is a plain name; otherwise returns `<iri>`.
    pub fn compact(&self, iri: &str) -> String {
        if let Some(label) = self.label_for(iri) {
            let ns = &self.map[label];
            let local = &iri[ns.len()..];
            if is_simple_local(local) {
                let mut out = String::with_capacity(label.len() + 1 + local.len());
                out.push_str(label);
                out.push(':');
                out.push_str(local);
                return out;
            }
        }
        let mut out = String::from("<");
        out.push_str(iri);
        out.push('>');
        out
    }

    /// Namespace labels in sorted order.
    pub fn labels(&self) -> Vec<String> {
        self.map.keys().map(|k| k.to_string()).collect()
    }
}

fn is_simple_local(local: &str) -> bool {
    !local.is_empty()
        && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Which of the 19 Wikidata prefixes owns `iri`, by longest namespace match.
pub fn wikidata_prefix_of(iri: &str) -> Option<&'static str> {
    WIKIDATA_PREFIXES
        .iter()
        .filter(|(_, ns)| iri.starts_with(ns))
        .max_by_key(|(_, ns)| ns.len())
        .map(|(label, _)| *label)
}
