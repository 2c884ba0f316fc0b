//! Canonical text form of a [`Query`].
//!
//! Keywords are upper-cased, tokens are separated by single spaces, the
//! prologue comes first with prefixes sorted by label, and each top-level
//! clause (query form, `GROUP BY`, `HAVING`, `ORDER BY`, `LIMIT`, `OFFSET`,
//! `VALUES`) sits on its own line. Group contents stay on one line.

use alloc::string::String;

use super::ast::*;

/// Where an IRI occurs, for renderers that treat positions differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IriRole {
    /// Subject/object/graph name, `VALUES` cell, expression operand.
    Term,
    /// Predicate or property path element.
    Predicate,
    Function,
    Datatype,
    ServiceEndpoint,
    Dataset,
}

/// Controls how leaf terms are written.
pub trait Render {
    fn var(&mut self, out: &mut String, var: &Var) {
        out.push('?');
        out.push_str(var.name());
    }

    fn iri(&mut self, out: &mut String, iri: &Iri, _role: IriRole) {
        write_iri(out, iri);
    }

    fn literal(&mut self, out: &mut String, lit: &Literal) {
        write_literal(self, out, lit);
    }

    fn blank_node(&mut self, out: &mut String, label: &str) {
        out.push_str("_:");
        out.push_str(label);
    }

    /// Whether `BASE`/`PREFIX` declarations are emitted.
    fn prologue(&self) -> bool {
        true
    }
}

/// Writes every term as spelled in the source.
#[derive(Debug, Default, Clone, Copy)]
pub struct Canonical;

impl Render for Canonical {}

pub fn write_iri(out: &mut String, iri: &Iri) {
    match &iri.spelling {
        IriSpelling::Full(raw) => {
            out.push('<');
            out.push_str(raw);
            out.push('>');
        }
        IriSpelling::Prefixed { prefix, local } => {
            out.push_str(prefix);
            out.push(':');
            out.push_str(local);
        }
    }
}

pub fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c => out.push(c),
        }
    }
    out.push('"');
}

pub fn write_literal<R: Render + ?Sized>(r: &mut R, out: &mut String, lit: &Literal) {
    if lit.bare {
        out.push_str(&lit.lexical);
        return;
    }
    write_string(out, &lit.lexical);
    match &lit.kind {
        LiteralKind::Plain => {}
        LiteralKind::Lang(tag) => {
            out.push('@');
            out.push_str(tag);
        }
        LiteralKind::Typed(dt) => {
            out.push_str("^^");
            r.iri(out, dt, IriRole::Datatype);
        }
    }
}

/// Canonical serialization.
pub fn serialize_query(q: &Query) -> String {
    serialize_with(q, &mut Canonical)
}

pub fn serialize_with<R: Render>(q: &Query, r: &mut R) -> String {
    let mut w = Writer { out: String::new(), r };
    w.query(q, true);
    w.out
}

struct Writer<'r, R: Render> {
    out: String,
    r: &'r mut R,
}

fn expr_precedence(e: &Expression) -> u8 {
    match e {
        Expression::Binary(op, ..) => op.precedence(),
        Expression::In { .. } => 3,
        Expression::Unary(..) => 6,
        _ => 7,
    }
}

impl<'r, R: Render> Writer<'r, R> {
    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn query(&mut self, q: &Query, top: bool) {
        let sep = if top { "\n" } else { " " };
        if top && self.r.prologue() {
            if let Some(base) = &q.prologue.base {
                self.push("BASE <");
                self.push(base);
                self.push(">\n");
            }
            for (label, ns) in &q.prologue.prefixes {
                self.push("PREFIX ");
                self.push(label);
                self.push(": <");
                self.push(ns);
                self.push(">\n");
            }
        }
        match &q.form {
            QueryForm::Select(sel) => {
                self.push("SELECT");
                match sel.modifier {
                    Some(SelectModifier::Distinct) => self.push(" DISTINCT"),
                    Some(SelectModifier::Reduced) => self.push(" REDUCED"),
                    None => {}
                }
                match &sel.items {
                    None => self.push(" *"),
                    Some(items) => {
                        for item in items {
                            self.push(" ");
                            match item {
                                SelectItem::Var(v) => self.r.var(&mut self.out, v),
                                SelectItem::Expr(e, v) => {
                                    self.push("(");
                                    self.expr(e);
                                    self.push(" AS ");
                                    self.r.var(&mut self.out, v);
                                    self.push(")");
                                }
                            }
                        }
                    }
                }
                self.dataset(q);
                self.where_clause(q, true);
            }
            QueryForm::Ask => {
                self.push("ASK");
                self.dataset(q);
                self.where_clause(q, false);
            }
            QueryForm::Construct { template: Some(t) } => {
                self.push("CONSTRUCT { ");
                self.triples_block(t);
                self.push(if t.is_empty() { "}" } else { " }" });
                self.dataset(q);
                self.where_clause(q, true);
            }
            QueryForm::Construct { template: None } => {
                self.push("CONSTRUCT");
                self.dataset(q);
                self.where_clause(q, true);
            }
            QueryForm::Describe { targets } => {
                self.push("DESCRIBE");
                match targets {
                    None => self.push(" *"),
                    Some(ts) => {
                        for t in ts {
                            self.push(" ");
                            self.term(t, IriRole::Term);
                        }
                    }
                }
                self.dataset(q);
                self.where_clause(q, true);
            }
        }
        self.modifiers(&q.modifiers, sep);
        if let Some(v) = &q.values {
            self.push(sep);
            self.values(v);
        }
    }

    fn dataset(&mut self, q: &Query) {
        for d in &q.dataset {
            self.push(if d.named { " FROM NAMED " } else { " FROM " });
            self.r.iri(&mut self.out, &d.iri, IriRole::Dataset);
        }
    }

    fn where_clause(&mut self, q: &Query, keyword: bool) {
        if let Some(p) = &q.pattern {
            self.push(if keyword { " WHERE " } else { " " });
            self.group(p);
        }
    }

    fn modifiers(&mut self, m: &Modifiers, sep: &str) {
        if !m.group_by.is_empty() {
            self.push(sep);
            self.push("GROUP BY");
            for g in &m.group_by {
                self.push(" ");
                match g {
                    GroupCondition::Var(v) => self.r.var(&mut self.out, v),
                    GroupCondition::Call(e) => self.expr(e),
                    GroupCondition::Expr(e, v) => {
                        self.push("(");
                        self.expr(e);
                        if let Some(v) = v {
                            self.push(" AS ");
                            self.r.var(&mut self.out, v);
                        }
                        self.push(")");
                    }
                }
            }
        }
        if !m.having.is_empty() {
            self.push(sep);
            self.push("HAVING");
            for h in &m.having {
                self.push(" (");
                self.expr(h);
                self.push(")");
            }
        }
        if !m.order_by.is_empty() {
            self.push(sep);
            self.push("ORDER BY");
            for o in &m.order_by {
                self.push(" ");
                match o.direction {
                    Some(d) => {
                        self.push(if d == OrderDirection::Asc { "ASC(" } else { "DESC(" });
                        self.expr(&o.expr);
                        self.push(")");
                    }
                    None => match &o.expr {
                        Expression::Term(Term::Var(_))
                        | Expression::Builtin(..)
                        | Expression::FunctionCall { .. }
                        | Expression::Aggregate(_)
                        | Expression::Exists { .. } => self.expr(&o.expr),
                        e => {
                            self.push("(");
                            self.expr(e);
                            self.push(")");
                        }
                    },
                }
            }
        }
        if let Some(l) = m.limit {
            self.push(sep);
            self.push("LIMIT ");
            self.push(&alloc::format!("{}", l));
        }
        if let Some(o) = m.offset {
            self.push(sep);
            self.push("OFFSET ");
            self.push(&alloc::format!("{}", o));
        }
    }

    fn values(&mut self, v: &InlineData) {
        self.push("VALUES ");
        let single = v.vars.len() == 1;
        if single {
            self.r.var(&mut self.out, &v.vars[0]);
        } else {
            self.push("(");
            for (i, var) in v.vars.iter().enumerate() {
                if i > 0 {
                    self.push(" ");
                }
                self.r.var(&mut self.out, var);
            }
            self.push(")");
        }
        self.push(" {");
        for row in &v.rows {
            self.push(" ");
            if !single {
                self.push("(");
            }
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    self.push(" ");
                }
                match cell {
                    None => self.push("UNDEF"),
                    Some(t) => self.term(t, IriRole::Term),
                }
            }
            if !single {
                self.push(")");
            }
        }
        self.push(" }");
    }

    fn group(&mut self, g: &GroupPattern) {
        match g {
            GroupPattern::SubSelect(q) => {
                self.push("{ ");
                self.query(q, false);
                self.push(" }");
            }
            GroupPattern::Elements(els) if els.is_empty() => self.push("{ }"),
            GroupPattern::Elements(els) => {
                self.push("{");
                for (i, el) in els.iter().enumerate() {
                    self.push(" ");
                    self.element(el);
                    if matches!(el, PatternElement::Triples(_)) && i + 1 < els.len() {
                        self.push(" .");
                    }
                }
                self.push(" }");
            }
        }
    }

    fn element(&mut self, el: &PatternElement) {
        match el {
            PatternElement::Triples(ts) => self.triples_block(ts),
            PatternElement::Group(g) => self.group(g),
            PatternElement::Union(alts) => {
                for (i, g) in alts.iter().enumerate() {
                    if i > 0 {
                        self.push(" UNION ");
                    }
                    self.group(g);
                }
            }
            PatternElement::Optional(g) => {
                self.push("OPTIONAL ");
                self.group(g);
            }
            PatternElement::Minus(g) => {
                self.push("MINUS ");
                self.group(g);
            }
            PatternElement::Graph { name, pattern } => {
                self.push("GRAPH ");
                self.term(name, IriRole::Term);
                self.push(" ");
                self.group(pattern);
            }
            PatternElement::Service { silent, endpoint, pattern } => {
                self.push(if *silent { "SERVICE SILENT " } else { "SERVICE " });
                match endpoint {
                    Term::Iri(iri) => self.r.iri(&mut self.out, iri, IriRole::ServiceEndpoint),
                    t => self.term(t, IriRole::ServiceEndpoint),
                }
                self.push(" ");
                self.group(pattern);
            }
            PatternElement::Filter(e) => {
                self.push("FILTER(");
                self.expr(e);
                self.push(")");
            }
            PatternElement::Bind(e, v) => {
                self.push("BIND(");
                self.expr(e);
                self.push(" AS ");
                self.r.var(&mut self.out, v);
                self.push(")");
            }
            PatternElement::Values(v) => self.values(v),
        }
    }

    fn triples_block(&mut self, ts: &[TriplesSameSubject]) {
        for (i, t) in ts.iter().enumerate() {
            if i > 0 {
                self.push(" . ");
            }
            self.node(&t.subject);
            if !t.predicates.is_empty() {
                self.push(" ");
                self.property_list(&t.predicates);
            }
        }
    }

    fn property_list(&mut self, list: &PropertyList) {
        for (i, (verb, objects)) in list.iter().enumerate() {
            if i > 0 {
                self.push(" ; ");
            }
            match verb {
                Verb::Var(v) => self.r.var(&mut self.out, v),
                Verb::Path(p) => self.path(p, 0),
            }
            for (j, o) in objects.iter().enumerate() {
                self.push(if j == 0 { " " } else { " , " });
                self.node(o);
            }
        }
    }

    fn node(&mut self, n: &Node) {
        match n {
            Node::Term(t) => self.term(t, IriRole::Term),
            Node::BlankPropertyList(list) if list.is_empty() => self.push("[]"),
            Node::BlankPropertyList(list) => {
                self.push("[ ");
                self.property_list(list);
                self.push(" ]");
            }
            Node::Collection(items) => {
                self.push("(");
                for item in items {
                    self.push(" ");
                    self.node(item);
                }
                self.push(" )");
            }
        }
    }

    fn term(&mut self, t: &Term, role: IriRole) {
        match t {
            Term::Var(v) => self.r.var(&mut self.out, v),
            Term::Iri(i) => self.r.iri(&mut self.out, i, role),
            Term::Literal(l) => self.r.literal(&mut self.out, l),
            Term::BlankNode(b) => self.r.blank_node(&mut self.out, b),
            Term::Nil => self.push("()"),
        }
    }

    /// `level`: 0 = anywhere, 1 = sequence member, 2 = operand of `*`/`+`/`?`,
    /// 3 = operand of `^`.
    fn path(&mut self, p: &Path, level: u8) {
        let parens = match p {
            Path::Iri(_) | Path::A | Path::Negated(_) => false,
            Path::Alternative(_) => level >= 1,
            Path::Sequence(_) => level >= 1,
            Path::Inverse(_) => level >= 2,
            Path::ZeroOrMore(_) | Path::OneOrMore(_) | Path::ZeroOrOne(_) => level == 2,
        };
        if parens {
            self.push("(");
        }
        match p {
            Path::Iri(i) => self.r.iri(&mut self.out, i, IriRole::Predicate),
            Path::A => self.push("a"),
            Path::Alternative(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.push("|");
                    }
                    self.path(item, 1);
                }
            }
            Path::Sequence(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.push("/");
                    }
                    self.path(item, 1);
                }
            }
            Path::Inverse(inner) => {
                self.push("^");
                self.path(inner, 3);
            }
            Path::ZeroOrMore(inner) => {
                self.path(inner, 2);
                self.push("*");
            }
            Path::OneOrMore(inner) => {
                self.path(inner, 2);
                self.push("+");
            }
            Path::ZeroOrOne(inner) => {
                self.path(inner, 2);
                self.push("?");
            }
            Path::Negated(members) => {
                self.push("!");
                let single = members.len() == 1;
                if !single {
                    self.push("(");
                }
                for (i, (inverse, m)) in members.iter().enumerate() {
                    if i > 0 {
                        self.push("|");
                    }
                    if *inverse {
                        self.push("^");
                    }
                    match m {
                        NegatedMember::A => self.push("a"),
                        NegatedMember::Iri(iri) => self.r.iri(&mut self.out, iri, IriRole::Predicate),
                    }
                }
                if !single {
                    self.push(")");
                }
            }
        }
        if parens {
            self.push(")");
        }
    }

    fn expr_wrapped(&mut self, e: &Expression, parens: bool) {
        if parens {
            self.push("(");
        }
        self.expr(e);
        if parens {
            self.push(")");
        }
    }

    fn args(&mut self, args: &[Expression]) {
        self.push("(");
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.push(", ");
            }
            self.expr(a);
        }
        self.push(")");
    }

    fn expr(&mut self, e: &Expression) {
        match e {
            Expression::Term(t) => self.term(t, IriRole::Term),
            Expression::Binary(op, l, r) => {
                let p = op.precedence();
                let lp = expr_precedence(l);
                let rp = expr_precedence(r);
                let relational = p == 3;
                self.expr_wrapped(l, lp < p || (relational && lp == 3));
                self.push(" ");
                self.push(op.symbol());
                self.push(" ");
                self.expr_wrapped(r, rp <= p);
            }
            Expression::Unary(op, inner) => {
                self.push(match op {
                    UnaryOp::Not => "!",
                    UnaryOp::Plus => "+",
                    UnaryOp::Minus => "-",
                });
                // A signed literal operand would otherwise fuse with the sign.
                let fuse = matches!(**inner, Expression::Term(Term::Literal(ref l)) if l.bare && l.lexical.starts_with(['+', '-']));
                self.expr_wrapped(inner, expr_precedence(inner) < 6 || fuse);
            }
            Expression::In { expr, list, negated } => {
                self.expr_wrapped(expr, expr_precedence(expr) <= 3);
                self.push(if *negated { " NOT IN " } else { " IN " });
                self.args(list);
            }
            Expression::Builtin(b, args) => {
                self.push(b.name());
                self.args(args);
            }
            Expression::FunctionCall { iri, distinct, args } => {
                self.r.iri(&mut self.out, iri, IriRole::Function);
                if *distinct {
                    self.push("(DISTINCT ");
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            self.push(", ");
                        }
                        self.expr(a);
                    }
                    self.push(")");
                } else {
                    self.args(args);
                }
            }
            Expression::Exists { negated, pattern } => {
                self.push(if *negated { "NOT EXISTS " } else { "EXISTS " });
                self.group(pattern);
            }
            Expression::Aggregate(a) => {
                self.push(a.kind.name());
                self.push("(");
                if a.distinct {
                    self.push("DISTINCT ");
                }
                match &a.arg {
                    None => self.push("*"),
                    Some(arg) => self.expr(arg),
                }
                if let Some(sep) = &a.separator {
                    self.push(" ; SEPARATOR = ");
                    write_string(&mut self.out, sep);
                }
                self.push(")");
            }
        }
    }
}
