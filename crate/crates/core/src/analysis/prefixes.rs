use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::sparql::ast::Query;
use crate::sparql::prefixes::{PrefixTable, WIKIDATA_PREFIXES};
use crate::sparql::visit::collect_iris;

/// Namespace groups of the Wikidata RDF model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrefixGroup {
    /// wd, wdt
    EntDir,
    /// p, ps, pq
    StmtQual,
    /// pr, prv, wdref
    Ref,
    /// wds, wdv
    Reif,
    /// wdtn, psn, pqn, psv, pqv, wdno, wikibase
    Adv,
    /// prn, wdata: part of the 19 but in no group.
    Ungrouped,
}

pub fn prefix_group(label: &str) -> Option<PrefixGroup> {
    Some(match label {
        "wd" | "wdt" => PrefixGroup::EntDir,
        "p" | "ps" | "pq" => PrefixGroup::StmtQual,
        "pr" | "prv" | "wdref" => PrefixGroup::Ref,
        "wds" | "wdv" => PrefixGroup::Reif,
        "wdtn" | "psn" | "pqn" | "psv" | "pqv" | "wdno" | "wikibase" => PrefixGroup::Adv,
        "prn" | "wdata" => PrefixGroup::Ungrouped,
        _ => return None,
    })
}

/// Distinct IRIs per namespace group plus the Wikidata prefixes covered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrefixProfile {
    pub ent_dir: usize,
    pub stmt_qual: usize,
    pub r#ref: usize,
    pub reif: usize,
    pub adv: usize,
    pub ungrouped: usize,
    pub covered: BTreeSet<String>,
}

impl PrefixProfile {
    /// Assigns each IRI to the Wikidata prefix whose namespace (taken from
    /// `table`) is its longest match. IRIs outside all 19 namespaces are
    /// ignored. Counts are exact only if `iris` holds no duplicates.
    pub fn from_iris<'a>(iris: impl IntoIterator<Item = &'a str>, table: &PrefixTable) -> Self {
        let mut p = PrefixProfile::default();
        for iri in iris {
            let Some(label) = wikidata_label(iri, table) else { continue };
            match prefix_group(label) {
                Some(PrefixGroup::EntDir) => p.ent_dir += 1,
                Some(PrefixGroup::StmtQual) => p.stmt_qual += 1,
                Some(PrefixGroup::Ref) => p.r#ref += 1,
                Some(PrefixGroup::Reif) => p.reif += 1,
                Some(PrefixGroup::Adv) => p.adv += 1,
                Some(PrefixGroup::Ungrouped) => p.ungrouped += 1,
                None => continue,
            }
            p.covered.insert(label.into());
        }
        p
    }

    /// Number of the 19 prefixes covered.
    pub fn coverage(&self) -> usize {
        self.covered.len()
    }

    pub fn total(&self) -> usize {
        self.ent_dir + self.stmt_qual + self.r#ref + self.reif + self.adv + self.ungrouped
    }
}

fn wikidata_label<'t>(iri: &str, table: &'t PrefixTable) -> Option<&'t str> {
    table
        .iter()
        .filter(|(label, ns)| {
            !ns.is_empty()
                && iri.starts_with(ns)
                && WIKIDATA_PREFIXES.iter().any(|(l, _)| l == label)
        })
        .max_by_key(|(_, ns)| ns.len())
        .map(|(label, _)| label)
}

pub fn profile_prefixes(q: &Query, table: &PrefixTable) -> PrefixProfile {
    let iris = collect_iris(q);
    PrefixProfile::from_iris(iris.iter().map(String::as_str), table)
}
