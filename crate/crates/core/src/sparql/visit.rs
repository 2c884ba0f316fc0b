//! Read-only traversal of the syntax tree and the structural accessors built
//! on it.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use super::serialize::IriRole;

/// The clause an expression or term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Pattern,
    Template,
    Filter,
    Bind,
    Values,
    Projection,
    GroupBy,
    Having,
    OrderBy,
    Describe,
}

/// Callbacks for [`walk_query`]. Every method defaults to a no-op.
#[allow(unused_variables)]
pub trait Visitor {
    /// Called for the top-level query (`nested == false`) and every sub-select.
    fn query(&mut self, q: &Query, nested: bool) {}
    fn element(&mut self, el: &PatternElement) {}
    fn triples(&mut self, t: &TriplesSameSubject, scope: Scope) {}
    /// Called for every predicate that is not a variable.
    fn path(&mut self, p: &Path) {}
    fn iri(&mut self, iri: &Iri, role: IriRole) {}
    /// The `a` keyword (`rdf:type`) in predicate position.
    fn keyword_a(&mut self) {}
    fn literal(&mut self, lit: &Literal, scope: Scope) {}
    fn var(&mut self, v: &Var) {}
    fn blank_node(&mut self, label: &str) {}
    /// Called for every expression node, outermost first.
    fn expression(&mut self, e: &Expression, scope: Scope) {}
}

pub fn walk_query<V: Visitor + ?Sized>(v: &mut V, q: &Query) {
    walk(v, q, false);
}

fn walk<V: Visitor + ?Sized>(v: &mut V, q: &Query, nested: bool) {
    v.query(q, nested);
    match &q.form {
        QueryForm::Select(sel) => {
            if let Some(items) = &sel.items {
                for item in items {
                    match item {
                        SelectItem::Var(var) => v.var(var),
                        SelectItem::Expr(e, var) => {
                            walk_expr(v, e, Scope::Projection);
                            v.var(var);
                        }
                    }
                }
            }
        }
        QueryForm::Ask => {}
        QueryForm::Construct { template } => {
            if let Some(t) = template {
                for tss in t {
                    walk_triples(v, tss, Scope::Template);
                }
            }
        }
        QueryForm::Describe { targets } => {
            for t in targets.iter().flatten() {
                walk_term(v, t, IriRole::Term, Scope::Describe);
            }
        }
    }
    for d in &q.dataset {
        v.iri(&d.iri, IriRole::Dataset);
    }
    if let Some(p) = &q.pattern {
        walk_group(v, p);
    }
    let m = &q.modifiers;
    for g in &m.group_by {
        match g {
            GroupCondition::Var(var) => v.var(var),
            GroupCondition::Call(e) => walk_expr(v, e, Scope::GroupBy),
            GroupCondition::Expr(e, var) => {
                walk_expr(v, e, Scope::GroupBy);
                if let Some(var) = var {
                    v.var(var);
                }
            }
        }
    }
    for h in &m.having {
        walk_expr(v, h, Scope::Having);
    }
    for o in &m.order_by {
        walk_expr(v, &o.expr, Scope::OrderBy);
    }
    if let Some(vals) = &q.values {
        walk_values(v, vals);
    }
}

pub fn walk_group<V: Visitor + ?Sized>(v: &mut V, g: &GroupPattern) {
    match g {
        GroupPattern::SubSelect(q) => walk(v, q, true),
        GroupPattern::Elements(els) => {
            for el in els {
                walk_element(v, el);
            }
        }
    }
}

fn walk_element<V: Visitor + ?Sized>(v: &mut V, el: &PatternElement) {
    v.element(el);
    match el {
        PatternElement::Triples(ts) => {
            for t in ts {
                walk_triples(v, t, Scope::Pattern);
            }
        }
        PatternElement::Group(g) | PatternElement::Optional(g) | PatternElement::Minus(g) => {
            walk_group(v, g)
        }
        PatternElement::Union(alts) => {
            for g in alts {
                walk_group(v, g);
            }
        }
        PatternElement::Graph { name, pattern } => {
            walk_term(v, name, IriRole::Term, Scope::Pattern);
            walk_group(v, pattern);
        }
        PatternElement::Service { endpoint, pattern, .. } => {
            walk_term(v, endpoint, IriRole::ServiceEndpoint, Scope::Pattern);
            walk_group(v, pattern);
        }
        PatternElement::Filter(e) => walk_expr(v, e, Scope::Filter),
        PatternElement::Bind(e, var) => {
            walk_expr(v, e, Scope::Bind);
            v.var(var);
        }
        PatternElement::Values(vals) => walk_values(v, vals),
    }
}

fn walk_values<V: Visitor + ?Sized>(v: &mut V, vals: &InlineData) {
    for var in &vals.vars {
        v.var(var);
    }
    for row in &vals.rows {
        for t in row.iter().flatten() {
            walk_term(v, t, IriRole::Term, Scope::Values);
        }
    }
}

fn walk_triples<V: Visitor + ?Sized>(v: &mut V, t: &TriplesSameSubject, scope: Scope) {
    v.triples(t, scope);
    walk_node(v, &t.subject, scope);
    walk_property_list(v, &t.predicates, scope);
}

fn walk_property_list<V: Visitor + ?Sized>(v: &mut V, list: &PropertyList, scope: Scope) {
    for (verb, objects) in list {
        match verb {
            Verb::Var(var) => v.var(var),
            Verb::Path(p) => {
                v.path(p);
                walk_path(v, p);
            }
        }
        for o in objects {
            walk_node(v, o, scope);
        }
    }
}

fn walk_node<V: Visitor + ?Sized>(v: &mut V, n: &Node, scope: Scope) {
    match n {
        Node::Term(t) => walk_term(v, t, IriRole::Term, scope),
        Node::BlankPropertyList(list) => walk_property_list(v, list, scope),
        Node::Collection(items) => {
            for i in items {
                walk_node(v, i, scope);
            }
        }
    }
}

fn walk_path<V: Visitor + ?Sized>(v: &mut V, p: &Path) {
    match p {
        Path::Iri(i) => v.iri(i, IriRole::Predicate),
        Path::A => v.keyword_a(),
        Path::Inverse(inner) | Path::ZeroOrMore(inner) | Path::OneOrMore(inner) | Path::ZeroOrOne(inner) => {
            walk_path(v, inner)
        }
        Path::Sequence(items) | Path::Alternative(items) => {
            for i in items {
                walk_path(v, i);
            }
        }
        Path::Negated(members) => {
            for (_, m) in members {
                match m {
                    NegatedMember::Iri(i) => v.iri(i, IriRole::Predicate),
                    NegatedMember::A => v.keyword_a(),
                }
            }
        }
    }
}

fn walk_term<V: Visitor + ?Sized>(v: &mut V, t: &Term, role: IriRole, scope: Scope) {
    match t {
        Term::Var(var) => v.var(var),
        Term::Iri(i) => v.iri(i, role),
        Term::Literal(l) => {
            v.literal(l, scope);
            if let LiteralKind::Typed(dt) = &l.kind {
                v.iri(dt, IriRole::Datatype);
            }
        }
        Term::BlankNode(b) => v.blank_node(b),
        Term::Nil => {}
    }
}

fn walk_expr<V: Visitor + ?Sized>(v: &mut V, e: &Expression, scope: Scope) {
    v.expression(e, scope);
    match e {
        Expression::Term(t) => walk_term(v, t, IriRole::Term, scope),
        Expression::Binary(_, l, r) => {
            walk_expr(v, l, scope);
            walk_expr(v, r, scope);
        }
        Expression::Unary(_, inner) => walk_expr(v, inner, scope),
        Expression::In { expr, list, .. } => {
            walk_expr(v, expr, scope);
            for i in list {
                walk_expr(v, i, scope);
            }
        }
        Expression::Builtin(_, args) => {
            for a in args {
                walk_expr(v, a, scope);
            }
        }
        Expression::FunctionCall { iri, args, .. } => {
            v.iri(iri, IriRole::Function);
            for a in args {
                walk_expr(v, a, scope);
            }
        }
        Expression::Exists { pattern, .. } => walk_group(v, pattern),
        Expression::Aggregate(a) => {
            if let Some(arg) = &a.arg {
                walk_expr(v, arg, scope);
            }
        }
    }
}

// ----- structural accessors ---------------------------------------------

/// Number of triple patterns in `t` once abbreviations (`;`, `,`, `[...]`,
/// collections) are expanded. A property path counts as one pattern.
pub fn expanded_triple_count(t: &TriplesSameSubject) -> usize {
    node_count(&t.subject) + property_list_count(&t.predicates)
}

fn property_list_count(list: &PropertyList) -> usize {
    list.iter().map(|(_, objs)| objs.len() + objs.iter().map(node_count).sum::<usize>()).sum()
}

fn node_count(n: &Node) -> usize {
    match n {
        Node::Term(_) => 0,
        Node::BlankPropertyList(list) => property_list_count(list),
        // Each member contributes an rdf:first and an rdf:rest triple.
        Node::Collection(items) => 2 * items.len() + items.iter().map(node_count).sum::<usize>(),
    }
}

/// Counts triple patterns in every graph pattern of the query, including
/// optional/union/minus branches, service bodies, `EXISTS` patterns and
/// sub-selects. `CONSTRUCT` templates are not graph patterns and are skipped.
pub fn count_triple_patterns(q: &Query) -> usize {
    struct Counter(usize);
    impl Visitor for Counter {
        fn triples(&mut self, t: &TriplesSameSubject, scope: Scope) {
            if scope != Scope::Template {
                self.0 += expanded_triple_count(t);
            }
        }
    }
    let mut c = Counter(0);
    walk_query(&mut c, q);
    c.0
}

/// Every distinct absolute IRI used as an RDF term or property path element.
/// Prefix declarations, service endpoints, dataset clauses, function names and
/// literal datatypes are excluded. The `a` keyword contributes `rdf:type`.
pub fn collect_iris(q: &Query) -> BTreeSet<String> {
    struct Iris(BTreeSet<String>);
    impl Visitor for Iris {
        fn iri(&mut self, iri: &Iri, role: IriRole) {
            if matches!(role, IriRole::Term | IriRole::Predicate) {
                self.0.insert(iri.absolute.clone());
            }
        }
        fn keyword_a(&mut self) {
            self.0.insert(RDF_TYPE.into());
        }
    }
    let mut c = Iris(BTreeSet::new());
    walk_query(&mut c, q);
    c.0
}

/// All variables of the query in first-occurrence traversal order.
pub fn variables(q: &Query) -> Vec<Var> {
    struct Vars(Vec<Var>, BTreeSet<Var>);
    impl Visitor for Vars {
        fn var(&mut self, v: &Var) {
            if self.1.insert(v.clone()) {
                self.0.push(v.clone());
            }
        }
    }
    let mut c = Vars(Vec::new(), BTreeSet::new());
    walk_query(&mut c, q);
    c.0
}

/// Variables occurring inside the `WHERE` pattern (at any depth).
pub fn pattern_variables(q: &Query) -> BTreeSet<Var> {
    struct Vars(BTreeSet<Var>);
    impl Visitor for Vars {
        fn var(&mut self, v: &Var) {
            self.0.insert(v.clone());
        }
    }
    let mut c = Vars(BTreeSet::new());
    if let Some(p) = &q.pattern {
        walk_group(&mut c, p);
    }
    if let Some(vals) = &q.values {
        walk_values(&mut c, vals);
    }
    c.0
}

/// Variables used by `GROUP BY`, `HAVING` and `ORDER BY`.
pub fn modifier_variables(m: &Modifiers) -> BTreeSet<Var> {
    struct Vars(BTreeSet<Var>);
    impl Visitor for Vars {
        fn var(&mut self, v: &Var) {
            self.0.insert(v.clone());
        }
    }
    let mut c = Vars(BTreeSet::new());
    for g in &m.group_by {
        match g {
            GroupCondition::Var(v) => {
                c.0.insert(v.clone());
            }
            GroupCondition::Call(e) => walk_expr(&mut c, e, Scope::GroupBy),
            GroupCondition::Expr(e, v) => {
                walk_expr(&mut c, e, Scope::GroupBy);
                if let Some(v) = v {
                    c.0.insert(v.clone());
                }
            }
        }
    }
    for h in &m.having {
        walk_expr(&mut c, h, Scope::Having);
    }
    for o in &m.order_by {
        walk_expr(&mut c, &o.expr, Scope::OrderBy);
    }
    c.0
}

/// Adds a `PREFIX` declaration for every prefixed name the query uses but
/// does not declare, so the text stands alone outside the prefix table it was
/// parsed with.
pub fn declare_used_prefixes(q: &mut Query) {
    struct Used(Vec<(String, String)>);
    impl Visitor for Used {
        fn iri(&mut self, iri: &Iri, _role: IriRole) {
            if let IriSpelling::Prefixed { prefix, local } = &iri.spelling {
                if let Some(ns) = iri.absolute.strip_suffix(local.as_str()) {
                    self.0.push((prefix.clone(), ns.into()));
                }
            }
        }
    }
    let mut u = Used(Vec::new());
    walk_query(&mut u, q);
    for (label, ns) in u.0 {
        q.prologue.prefixes.entry(label).or_insert(ns);
    }
}
