use crate::sparql::ast::*;
use crate::sparql::visit::{count_triple_patterns, walk_query, Scope, Visitor};

/// Which SPARQL constructs a query uses, anywhere in its tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstructProfile {
    pub form: FormKind,
    pub triples: usize,
    pub filter: bool,
    pub optional: bool,
    pub union: bool,
    pub minus: bool,
    pub values: bool,
    pub group_by: bool,
    pub order_by: bool,
    pub limit_or_offset: bool,
    /// Built-in or IRI-named functions, and `BIND`.
    pub non_aggregate_functions: bool,
    pub aggregate_functions: bool,
    /// Any predicate other than a plain IRI, `a` or a variable.
    pub property_paths: bool,
    pub subqueries: bool,
    /// `DISTINCT` as a solution modifier of some `SELECT`.
    pub distinct_flag: bool,
    /// A non-aggregate function or `BIND` outside `FILTER` and `ORDER BY`.
    pub functions_outside_filter: bool,
    /// `SERVICE`, `GRAPH`, `FROM`, `REDUCED` or `HAVING`.
    pub other_advanced: bool,
}

impl ConstructProfile {
    fn new(form: FormKind) -> Self {
        ConstructProfile {
            form,
            triples: 0,
            filter: false,
            optional: false,
            union: false,
            minus: false,
            values: false,
            group_by: false,
            order_by: false,
            limit_or_offset: false,
            non_aggregate_functions: false,
            aggregate_functions: false,
            property_paths: false,
            subqueries: false,
            distinct_flag: false,
            functions_outside_filter: false,
            other_advanced: false,
        }
    }
}

impl Visitor for ConstructProfile {
    fn query(&mut self, q: &Query, nested: bool) {
        if nested {
            self.subqueries = true;
        }
        if let QueryForm::Select(sel) = &q.form {
            match sel.modifier {
                Some(SelectModifier::Distinct) => self.distinct_flag = true,
                Some(SelectModifier::Reduced) => self.other_advanced = true,
                None => {}
            }
        }
        if !q.dataset.is_empty() {
            self.other_advanced = true;
        }
        if q.values.is_some() {
            self.values = true;
        }
        let m = &q.modifiers;
        self.group_by |= !m.group_by.is_empty();
        self.order_by |= !m.order_by.is_empty();
        self.limit_or_offset |= m.limit.is_some() || m.offset.is_some();
        self.other_advanced |= !m.having.is_empty();
    }

    fn element(&mut self, el: &PatternElement) {
        match el {
            PatternElement::Filter(_) => self.filter = true,
            PatternElement::Optional(_) => self.optional = true,
            PatternElement::Union(_) => self.union = true,
            PatternElement::Minus(_) => self.minus = true,
            PatternElement::Values(_) => self.values = true,
            PatternElement::Bind(..) => {
                self.non_aggregate_functions = true;
                self.functions_outside_filter = true;
            }
            PatternElement::Service { .. } | PatternElement::Graph { .. } => self.other_advanced = true,
            PatternElement::Triples(_) | PatternElement::Group(_) => {}
        }
    }

    fn path(&mut self, p: &Path) {
        if !p.is_simple() {
            self.property_paths = true;
        }
    }

    fn expression(&mut self, e: &Expression, scope: Scope) {
        match e {
            Expression::Builtin(..) | Expression::FunctionCall { .. } => {
                self.non_aggregate_functions = true;
                if !matches!(scope, Scope::Filter | Scope::OrderBy) {
                    self.functions_outside_filter = true;
                }
            }
            Expression::Aggregate(_) => self.aggregate_functions = true,
            _ => {}
        }
    }
}

pub fn profile_constructs(q: &Query) -> ConstructProfile {
    let mut p = ConstructProfile::new(q.form.kind());
    walk_query(&mut p, q);
    p.triples = count_triple_patterns(q);
    p
}

/// Whether the query goes beyond triple patterns, `FILTER`, `ORDER BY`,
/// `LIMIT`, `OFFSET` and `DISTINCT`. Functions used inside `FILTER` or
/// `ORDER BY` conditions belong to those clauses and stay basic.
pub fn is_advanced(p: &ConstructProfile) -> bool {
    p.optional
        || p.union
        || p.minus
        || p.values
        || p.group_by
        || p.aggregate_functions
        || p.property_paths
        || p.subqueries
        || p.functions_outside_filter
        || p.other_advanced
}
