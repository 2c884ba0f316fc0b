//! Recursive-descent parser for the SPARQL 1.1 query grammar.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::error::{ParseError, SyntaxError};
use super::lexer::{tokenize, Tok, Token};
use super::prefixes::PrefixTable;

const UPDATE_KEYWORDS: [&str; 10] =
    ["INSERT", "DELETE", "LOAD", "CLEAR", "DROP", "CREATE", "ADD", "MOVE", "COPY", "WITH"];

/// Parses a query, resolving undeclared prefixes against the bundled
/// Wikidata prefix table.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    parse_query_with(text, &PrefixTable::wikidata())
}

/// Parses a query, resolving undeclared prefixes against `table`.
pub fn parse_query_with(text: &str, table: &PrefixTable) -> Result<Query, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, table, prologue: Prologue::default() };
    p.query()
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'t> {
    toks: Vec<Token>,
    pos: usize,
    table: &'t PrefixTable,
    prologue: Prologue,
}

fn exp(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl<'t> Parser<'t> {
    // ----- token helpers -------------------------------------------------

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_n(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        let message = format!("unexpected {}", t.tok);
        SyntaxError::new(t.line, t.column, exp(expected), message).into()
    }

    fn error_msg(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        SyntaxError::new(t.line, t.column, Vec::new(), message).into()
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn is_kw_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_n(n), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[p]))
        }
    }

    fn var(&mut self) -> PResult<Var> {
        match self.peek() {
            Tok::Var(v) => {
                let v = Var(v.clone());
                self.advance();
                Ok(v)
            }
            _ => Err(self.error(&["variable"])),
        }
    }

    // ----- IRIs -----------------------------------------------------------

    fn iri(&mut self) -> PResult<Iri> {
        match self.peek().clone() {
            Tok::IriRef(raw) => {
                self.advance();
                let absolute = self.resolve_relative(&raw);
                Ok(Iri { spelling: IriSpelling::Full(raw), absolute })
            }
            Tok::PName { prefix, local } => {
                let ns = match self.prologue.prefixes.get(&prefix) {
                    Some(ns) => ns.clone(),
                    None => match self.table.get(&prefix) {
                        Some(ns) => ns.to_string(),
                        None => {
                            return Err(self.error_msg(format!("undefined prefix '{}:'", prefix)))
                        }
                    },
                };
                self.advance();
                let mut absolute = ns;
                absolute.push_str(&unescape_local(&local));
                Ok(Iri { spelling: IriSpelling::Prefixed { prefix, local }, absolute })
            }
            _ => Err(self.error(&["IRI"])),
        }
    }

    fn resolve_relative(&self, raw: &str) -> String {
        if has_scheme(raw) {
            return raw.to_string();
        }
        let Some(base) = self.prologue.base.as_deref() else {
            return raw.to_string();
        };
        let base_abs = base;
        if raw.is_empty() {
            return base_abs.split('#').next().unwrap_or(base_abs).to_string();
        }
        if raw.starts_with('#') {
            let stem = base_abs.split('#').next().unwrap_or(base_abs);
            return format!("{}{}", stem, raw);
        }
        if let Some(rest) = raw.strip_prefix("//") {
            let scheme = base_abs.split(':').next().unwrap_or("");
            return format!("{}://{}", scheme, rest);
        }
        if raw.starts_with('/') {
            if let Some(idx) = base_abs.find("://") {
                let after = &base_abs[idx + 3..];
                let auth_end = after.find('/').map(|i| idx + 3 + i).unwrap_or(base_abs.len());
                return format!("{}{}", &base_abs[..auth_end], raw);
            }
            return raw.to_string();
        }
        let stem = base_abs.split(['?', '#']).next().unwrap_or(base_abs);
        match stem.rfind('/') {
            Some(i) => format!("{}{}", &stem[..=i], raw),
            None => format!("{}{}", stem, raw),
        }
    }

    // ----- top level ------------------------------------------------------

    fn query(&mut self) -> PResult<Query> {
        self.prologue_decls()?;
        for kw in UPDATE_KEYWORDS {
            if self.is_kw(kw) {
                let t = &self.toks[self.pos];
                return Err(ParseError::UnsupportedFeature {
                    feature: format!("SPARQL Update ({})", kw),
                    line: t.line,
                    column: t.column,
                });
            }
        }
        let mut q = if self.is_kw("SELECT") {
            self.select_query(false)?
        } else if self.is_kw("CONSTRUCT") {
            self.construct_query()?
        } else if self.is_kw("DESCRIBE") {
            self.describe_query()?
        } else if self.is_kw("ASK") {
            self.ask_query()?
        } else {
            return Err(self.error(&["SELECT", "CONSTRUCT", "DESCRIBE", "ASK", "PREFIX", "BASE"]));
        };
        if self.is_kw("VALUES") {
            q.values = Some(self.values_block()?);
        }
        if *self.peek() != Tok::Eof {
            if self.is_punct(";") {
                let t = &self.toks[self.pos];
                return Err(ParseError::UnsupportedFeature {
                    feature: "SPARQL Update request sequence".into(),
                    line: t.line,
                    column: t.column,
                });
            }
            return Err(self.error(&["end of input"]));
        }
        q.prologue = core::mem::take(&mut self.prologue);
        Ok(q)
    }

    fn prologue_decls(&mut self) -> PResult<()> {
        loop {
            if self.eat_kw("BASE") {
                match self.advance() {
                    Tok::IriRef(raw) => {
                        let resolved = self.resolve_relative(&raw);
                        self.prologue.base = Some(resolved);
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.error(&["IRI"]));
                    }
                }
            } else if self.eat_kw("PREFIX") {
                let label = match self.peek() {
                    Tok::PName { prefix, local } if local.is_empty() => prefix.clone(),
                    _ => return Err(self.error(&["prefix label"])),
                };
                self.advance();
                match self.peek().clone() {
                    Tok::IriRef(raw) => {
                        self.advance();
                        let ns = self.resolve_relative(&raw);
                        self.prologue.prefixes.insert(label, ns);
                    }
                    _ => return Err(self.error(&["IRI"])),
                }
            } else {
                return Ok(());
            }
        }
    }

    fn empty_query(form: QueryForm) -> Query {
        Query {
            prologue: Prologue::default(),
            form,
            dataset: Vec::new(),
            pattern: None,
            modifiers: Modifiers::default(),
            values: None,
        }
    }

    fn select_query(&mut self, sub: bool) -> PResult<Query> {
        self.expect_kw("SELECT")?;
        let modifier = if self.eat_kw("DISTINCT") {
            Some(SelectModifier::Distinct)
        } else if self.eat_kw("REDUCED") {
            Some(SelectModifier::Reduced)
        } else {
            None
        };
        let items = if self.eat_punct("*") {
            None
        } else {
            let mut items = Vec::new();
            loop {
                match self.peek() {
                    Tok::Var(_) => items.push(SelectItem::Var(self.var()?)),
                    Tok::Punct("(") => {
                        self.advance();
                        let e = self.expression()?;
                        self.expect_kw("AS")?;
                        let v = self.var()?;
                        self.expect_punct(")")?;
                        items.push(SelectItem::Expr(e, v));
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                return Err(self.error(&["*", "variable", "(", "DISTINCT", "REDUCED"]));
            }
            Some(items)
        };
        let mut q = Self::empty_query(QueryForm::Select(Selection { modifier, items }));
        if !sub {
            q.dataset = self.dataset_clauses()?;
        }
        self.eat_kw("WHERE");
        q.pattern = Some(self.group_graph_pattern()?);
        q.modifiers = self.solution_modifiers()?;
        if sub && self.is_kw("VALUES") {
            q.values = Some(self.values_block()?);
        }
        Ok(q)
    }

    fn construct_query(&mut self) -> PResult<Query> {
        self.expect_kw("CONSTRUCT")?;
        if self.is_punct("{") {
            self.advance();
            let template = self.triples_template()?;
            self.expect_punct("}")?;
            let mut q = Self::empty_query(QueryForm::Construct { template: Some(template) });
            q.dataset = self.dataset_clauses()?;
            self.eat_kw("WHERE");
            q.pattern = Some(self.group_graph_pattern()?);
            q.modifiers = self.solution_modifiers()?;
            Ok(q)
        } else {
            let mut q = Self::empty_query(QueryForm::Construct { template: None });
            q.dataset = self.dataset_clauses()?;
            self.expect_kw("WHERE")?;
            self.expect_punct("{")?;
            let triples = self.triples_template()?;
            self.expect_punct("}")?;
            let elements =
                if triples.is_empty() { Vec::new() } else { vec![PatternElement::Triples(triples)] };
            q.pattern = Some(GroupPattern::Elements(elements));
            q.modifiers = self.solution_modifiers()?;
            Ok(q)
        }
    }

    fn triples_template(&mut self) -> PResult<Vec<TriplesSameSubject>> {
        let mut out = Vec::new();
        while self.is_triples_start() {
            out.push(self.triples_same_subject(false)?);
            if !self.eat_punct(".") {
                break;
            }
        }
        Ok(out)
    }

    fn describe_query(&mut self) -> PResult<Query> {
        self.expect_kw("DESCRIBE")?;
        let targets = if self.eat_punct("*") {
            None
        } else {
            let mut t = Vec::new();
            loop {
                match self.peek() {
                    Tok::Var(_) => t.push(Term::Var(self.var()?)),
                    Tok::IriRef(_) | Tok::PName { .. } => t.push(Term::Iri(self.iri()?)),
                    _ => break,
                }
            }
            if t.is_empty() {
                return Err(self.error(&["*", "variable", "IRI"]));
            }
            Some(t)
        };
        let mut q = Self::empty_query(QueryForm::Describe { targets });
        q.dataset = self.dataset_clauses()?;
        if self.eat_kw("WHERE") || self.is_punct("{") {
            q.pattern = Some(self.group_graph_pattern()?);
        }
        q.modifiers = self.solution_modifiers()?;
        Ok(q)
    }

    fn ask_query(&mut self) -> PResult<Query> {
        self.expect_kw("ASK")?;
        let mut q = Self::empty_query(QueryForm::Ask);
        q.dataset = self.dataset_clauses()?;
        self.eat_kw("WHERE");
        q.pattern = Some(self.group_graph_pattern()?);
        q.modifiers = self.solution_modifiers()?;
        Ok(q)
    }

    fn dataset_clauses(&mut self) -> PResult<Vec<DatasetClause>> {
        let mut out = Vec::new();
        while self.eat_kw("FROM") {
            let named = self.eat_kw("NAMED");
            out.push(DatasetClause { named, iri: self.iri()? });
        }
        Ok(out)
    }

    // ----- solution modifiers --------------------------------------------

    fn solution_modifiers(&mut self) -> PResult<Modifiers> {
        let mut m = Modifiers::default();
        if self.is_kw("GROUP") {
            self.advance();
            self.expect_kw("BY")?;
            loop {
                match self.peek() {
                    Tok::Var(_) => m.group_by.push(GroupCondition::Var(self.var()?)),
                    Tok::Punct("(") => {
                        self.advance();
                        let e = self.expression()?;
                        let v = if self.eat_kw("AS") { Some(self.var()?) } else { None };
                        self.expect_punct(")")?;
                        m.group_by.push(GroupCondition::Expr(e, v));
                    }
                    _ if self.is_call_start() => m.group_by.push(GroupCondition::Call(self.primary()?)),
                    _ => break,
                }
            }
            if m.group_by.is_empty() {
                return Err(self.error(&["variable", "(", "function call"]));
            }
        }
        if self.eat_kw("HAVING") {
            while self.is_punct("(") || self.is_call_start() {
                m.having.push(self.constraint()?);
            }
            if m.having.is_empty() {
                return Err(self.error(&["(", "function call"]));
            }
        }
        if self.is_kw("ORDER") {
            self.advance();
            self.expect_kw("BY")?;
            loop {
                if self.is_kw("ASC") || self.is_kw("DESC") {
                    let direction =
                        if self.eat_kw("ASC") { OrderDirection::Asc } else { self.advance(); OrderDirection::Desc };
                    self.expect_punct("(")?;
                    let expr = self.expression()?;
                    self.expect_punct(")")?;
                    m.order_by.push(OrderCondition { direction: Some(direction), expr });
                } else if matches!(self.peek(), Tok::Var(_)) {
                    let v = self.var()?;
                    m.order_by.push(OrderCondition { direction: None, expr: Expression::Term(Term::Var(v)) });
                } else if self.is_punct("(") || self.is_call_start() {
                    let expr = self.constraint()?;
                    m.order_by.push(OrderCondition { direction: None, expr });
                } else {
                    break;
                }
            }
            if m.order_by.is_empty() {
                return Err(self.error(&["ASC", "DESC", "variable", "("]));
            }
        }
        for _ in 0..2 {
            if self.eat_kw("LIMIT") {
                if m.limit.is_some() {
                    return Err(self.error_msg("duplicate LIMIT".into()));
                }
                m.limit = Some(self.integer()?);
            } else if self.eat_kw("OFFSET") {
                if m.offset.is_some() {
                    return Err(self.error_msg("duplicate OFFSET".into()));
                }
                m.offset = Some(self.integer()?);
            }
        }
        Ok(m)
    }

    fn integer(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Integer(n) => {
                let v = n.parse::<u64>().map_err(|_| self.error_msg("integer out of range".into()))?;
                self.advance();
                Ok(v)
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    /// Whether the next tokens start a built-in, aggregate or IRI function call.
    fn is_call_start(&self) -> bool {
        match self.peek() {
            Tok::Word(w) => {
                let up = w.to_ascii_uppercase();
                (Builtin::from_keyword(&up).is_some() || AggregateKind::from_keyword(&up).is_some())
                    && matches!(self.peek_n(1), Tok::Punct("("))
                    || up == "EXISTS"
                    || (up == "NOT" && self.is_kw_at(1, "EXISTS"))
            }
            Tok::IriRef(_) | Tok::PName { .. } => matches!(self.peek_n(1), Tok::Punct("(")),
            _ => false,
        }
    }

    fn constraint(&mut self) -> PResult<Expression> {
        if self.eat_punct("(") {
            let e = self.expression()?;
            self.expect_punct(")")?;
            Ok(e)
        } else if self.is_call_start() {
            self.primary()
        } else {
            Err(self.error(&["(", "function call"]))
        }
    }

    // ----- graph patterns -------------------------------------------------

    fn group_graph_pattern(&mut self) -> PResult<GroupPattern> {
        self.expect_punct("{")?;
        if self.is_kw("SELECT") {
            let sub = self.select_query(true)?;
            self.expect_punct("}")?;
            return Ok(GroupPattern::SubSelect(Box::new(sub)));
        }
        let mut elements = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(GroupPattern::Elements(elements));
            }
            if self.is_triples_start() {
                let mut block = Vec::new();
                loop {
                    block.push(self.triples_same_subject(true)?);
                    if self.eat_punct(".") {
                        if self.is_triples_start() {
                            continue;
                        }
                    }
                    break;
                }
                if self.is_triples_start() {
                    return Err(self.error(&[".", "}"]));
                }
                elements.push(PatternElement::Triples(block));
                continue;
            }
            let el = if self.is_punct("{") {
                let first = self.group_graph_pattern()?;
                if self.is_kw("UNION") {
                    let mut alts = vec![first];
                    while self.eat_kw("UNION") {
                        alts.push(self.group_graph_pattern()?);
                    }
                    PatternElement::Union(alts)
                } else {
                    PatternElement::Group(first)
                }
            } else if self.eat_kw("OPTIONAL") {
                PatternElement::Optional(self.group_graph_pattern()?)
            } else if self.eat_kw("MINUS") {
                PatternElement::Minus(self.group_graph_pattern()?)
            } else if self.eat_kw("GRAPH") {
                let name = self.var_or_iri()?;
                PatternElement::Graph { name, pattern: self.group_graph_pattern()? }
            } else if self.eat_kw("SERVICE") {
                let silent = self.eat_kw("SILENT");
                let endpoint = self.var_or_iri()?;
                PatternElement::Service { silent, endpoint, pattern: self.group_graph_pattern()? }
            } else if self.eat_kw("FILTER") {
                PatternElement::Filter(self.constraint()?)
            } else if self.eat_kw("BIND") {
                self.expect_punct("(")?;
                let e = self.expression()?;
                self.expect_kw("AS")?;
                let v = self.var()?;
                self.expect_punct(")")?;
                PatternElement::Bind(e, v)
            } else if self.is_kw("VALUES") {
                PatternElement::Values(self.values_block()?)
            } else {
                return Err(self.error(&[
                    "}", "triple pattern", "{", "OPTIONAL", "MINUS", "GRAPH", "SERVICE", "FILTER",
                    "BIND", "VALUES",
                ]));
            };
            elements.push(el);
            self.eat_punct(".");
        }
    }

    fn var_or_iri(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Var(_) => Ok(Term::Var(self.var()?)),
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Term::Iri(self.iri()?)),
            _ => Err(self.error(&["variable", "IRI"])),
        }
    }

    fn values_block(&mut self) -> PResult<InlineData> {
        self.expect_kw("VALUES")?;
        if matches!(self.peek(), Tok::Var(_)) {
            let v = self.var()?;
            self.expect_punct("{")?;
            let mut rows = Vec::new();
            while !self.eat_punct("}") {
                rows.push(vec![self.data_value()?]);
            }
            return Ok(InlineData { vars: vec![v], rows });
        }
        self.expect_punct("(")?;
        let mut vars = Vec::new();
        while matches!(self.peek(), Tok::Var(_)) {
            vars.push(self.var()?);
        }
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut rows = Vec::new();
        while !self.eat_punct("}") {
            self.expect_punct("(")?;
            let mut row = Vec::new();
            while !self.eat_punct(")") {
                row.push(self.data_value()?);
            }
            if row.len() != vars.len() {
                return Err(self.error_msg(format!(
                    "VALUES row has {} values but {} variables are declared",
                    row.len(),
                    vars.len()
                )));
            }
            rows.push(row);
        }
        Ok(InlineData { vars, rows })
    }

    fn data_value(&mut self) -> PResult<Option<Term>> {
        if self.eat_kw("UNDEF") {
            return Ok(None);
        }
        match self.peek() {
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Some(Term::Iri(self.iri()?))),
            _ => match self.literal()? {
                Some(l) => Ok(Some(Term::Literal(l))),
                None => Err(self.error(&["IRI", "literal", "UNDEF"])),
            },
        }
    }

    // ----- triples --------------------------------------------------------

    fn is_triples_start(&self) -> bool {
        match self.peek() {
            Tok::Var(_)
            | Tok::IriRef(_)
            | Tok::PName { .. }
            | Tok::BNode(_)
            | Tok::Str(_)
            | Tok::Integer(_)
            | Tok::Decimal(_)
            | Tok::Double(_)
            | Tok::Punct("[")
            | Tok::Punct("(") => true,
            Tok::Punct("+") | Tok::Punct("-") => {
                matches!(self.peek_n(1), Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_))
            }
            Tok::Word(w) => w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false"),
            _ => false,
        }
    }

    fn triples_same_subject(&mut self, paths: bool) -> PResult<TriplesSameSubject> {
        let subject = self.node(paths)?;
        let predicates = match subject {
            Node::Term(_) => self.property_list(paths, true)?,
            _ => self.property_list(paths, false)?,
        };
        Ok(TriplesSameSubject { subject, predicates })
    }

    fn is_verb_start(&self, paths: bool) -> bool {
        match self.peek() {
            Tok::Var(_) | Tok::IriRef(_) | Tok::PName { .. } => true,
            Tok::Word(w) => w == "a",
            Tok::Punct("^") | Tok::Punct("!") | Tok::Punct("(") => paths,
            _ => false,
        }
    }

    fn property_list(&mut self, paths: bool, required: bool) -> PResult<PropertyList> {
        let mut list = Vec::new();
        if !self.is_verb_start(paths) {
            if required {
                return Err(self.error(&["predicate", "property path"]));
            }
            return Ok(list);
        }
        loop {
            let verb = if let Tok::Var(_) = self.peek() {
                Verb::Var(self.var()?)
            } else if paths {
                Verb::Path(self.path()?)
            } else if self.is_kw("a") && matches!(self.peek(), Tok::Word(w) if w == "a") {
                self.advance();
                Verb::Path(Path::A)
            } else {
                Verb::Path(Path::Iri(self.iri()?))
            };
            let mut objects = vec![self.node(paths)?];
            while self.eat_punct(",") {
                objects.push(self.node(paths)?);
            }
            list.push((verb, objects));
            let mut saw_semicolon = false;
            while self.eat_punct(";") {
                saw_semicolon = true;
            }
            if !saw_semicolon || !self.is_verb_start(paths) {
                return Ok(list);
            }
        }
    }

    fn node(&mut self, paths: bool) -> PResult<Node> {
        if self.is_punct("[") {
            self.advance();
            let list = self.property_list(paths, false)?;
            self.expect_punct("]")?;
            return Ok(Node::BlankPropertyList(list));
        }
        if self.is_punct("(") {
            self.advance();
            if self.eat_punct(")") {
                return Ok(Node::Term(Term::Nil));
            }
            let mut members = Vec::new();
            while !self.eat_punct(")") {
                members.push(self.node(paths)?);
            }
            return Ok(Node::Collection(members));
        }
        Ok(Node::Term(self.term()?))
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Var(_) => Ok(Term::Var(self.var()?)),
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Term::Iri(self.iri()?)),
            Tok::BNode(b) => {
                let b = b.clone();
                self.advance();
                Ok(Term::BlankNode(b))
            }
            _ => match self.literal()? {
                Some(l) => Ok(Term::Literal(l)),
                None => Err(self.error(&["variable", "IRI", "literal", "blank node", "[", "("])),
            },
        }
    }

    /// Parses an RDF, numeric (optionally signed) or boolean literal.
    fn literal(&mut self) -> PResult<Option<Literal>> {
        let sign = match self.peek() {
            Tok::Punct("+") | Tok::Punct("-")
                if matches!(self.peek_n(1), Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) =>
            {
                let Tok::Punct(p) = self.advance() else { unreachable!() };
                p
            }
            _ => "",
        };
        let lit = match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                match self.peek().clone() {
                    Tok::LangTag(tag) => {
                        self.advance();
                        Literal::lang(s, tag)
                    }
                    Tok::Punct("^^") => {
                        self.advance();
                        let dt = self.iri()?;
                        Literal { lexical: s, kind: LiteralKind::Typed(dt), bare: false }
                    }
                    _ => Literal::plain(s),
                }
            }
            Tok::Integer(n) => {
                self.advance();
                Literal::bare_typed(&format!("{}{}", sign, n), "integer")
            }
            Tok::Decimal(n) => {
                self.advance();
                Literal::bare_typed(&format!("{}{}", sign, n), "decimal")
            }
            Tok::Double(n) => {
                self.advance();
                Literal::bare_typed(&format!("{}{}", sign, n), "double")
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false") => {
                self.advance();
                Literal::bare_typed(&w.to_ascii_lowercase(), "boolean")
            }
            _ => return Ok(None),
        };
        Ok(Some(lit))
    }

    // ----- property paths -------------------------------------------------

    fn path(&mut self) -> PResult<Path> {
        let first = self.path_sequence()?;
        if !self.is_punct("|") {
            return Ok(first);
        }
        let mut alts = vec![first];
        while self.eat_punct("|") {
            alts.push(self.path_sequence()?);
        }
        Ok(Path::Alternative(alts))
    }

    fn path_sequence(&mut self) -> PResult<Path> {
        let first = self.path_elt_or_inverse()?;
        if !self.is_punct("/") {
            return Ok(first);
        }
        let mut seq = vec![first];
        while self.eat_punct("/") {
            seq.push(self.path_elt_or_inverse()?);
        }
        Ok(Path::Sequence(seq))
    }

    fn path_elt_or_inverse(&mut self) -> PResult<Path> {
        if self.eat_punct("^") {
            return Ok(Path::Inverse(Box::new(self.path_elt()?)));
        }
        self.path_elt()
    }

    fn path_elt(&mut self) -> PResult<Path> {
        let primary = self.path_primary()?;
        Ok(if self.eat_punct("*") {
            Path::ZeroOrMore(Box::new(primary))
        } else if self.eat_punct("+") {
            Path::OneOrMore(Box::new(primary))
        } else if self.eat_punct("?") {
            Path::ZeroOrOne(Box::new(primary))
        } else {
            primary
        })
    }

    fn path_primary(&mut self) -> PResult<Path> {
        match self.peek() {
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Path::Iri(self.iri()?)),
            Tok::Word(w) if w == "a" => {
                self.advance();
                Ok(Path::A)
            }
            Tok::Punct("(") => {
                self.advance();
                let p = self.path()?;
                self.expect_punct(")")?;
                Ok(p)
            }
            Tok::Punct("!") => {
                self.advance();
                let mut members = Vec::new();
                if self.eat_punct("(") {
                    if !self.is_punct(")") {
                        members.push(self.negated_member()?);
                        while self.eat_punct("|") {
                            members.push(self.negated_member()?);
                        }
                    }
                    self.expect_punct(")")?;
                } else {
                    members.push(self.negated_member()?);
                }
                Ok(Path::Negated(members))
            }
            _ => Err(self.error(&["IRI", "a", "(", "!", "^"])),
        }
    }

    fn negated_member(&mut self) -> PResult<(bool, NegatedMember)> {
        let inverse = self.eat_punct("^");
        let m = match self.peek() {
            Tok::Word(w) if w == "a" => {
                self.advance();
                NegatedMember::A
            }
            _ => NegatedMember::Iri(self.iri()?),
        };
        Ok((inverse, m))
    }

    // ----- expressions ----------------------------------------------------

    fn expression(&mut self) -> PResult<Expression> {
        let mut lhs = self.and_expression()?;
        while self.eat_punct("||") {
            let rhs = self.and_expression()?;
            lhs = Expression::Binary(BinaryOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expression(&mut self) -> PResult<Expression> {
        let mut lhs = self.relational()?;
        while self.eat_punct("&&") {
            let rhs = self.relational()?;
            lhs = Expression::Binary(BinaryOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn relational(&mut self) -> PResult<Expression> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Punct("=") => BinaryOp::Equal,
            Tok::Punct("!=") => BinaryOp::NotEqual,
            Tok::Punct("<") => BinaryOp::Less,
            Tok::Punct(">") => BinaryOp::Greater,
            Tok::Punct("<=") => BinaryOp::LessEq,
            Tok::Punct(">=") => BinaryOp::GreaterEq,
            Tok::Word(w) if w.eq_ignore_ascii_case("IN") => {
                self.advance();
                let list = self.expression_list()?;
                return Ok(Expression::In { expr: Box::new(lhs), list, negated: false });
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("NOT") && self.is_kw_at(1, "IN") => {
                self.advance();
                self.advance();
                let list = self.expression_list()?;
                return Ok(Expression::In { expr: Box::new(lhs), list, negated: true });
            }
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.additive()?;
        Ok(Expression::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn expression_list(&mut self) -> PResult<Vec<Expression>> {
        self.expect_punct("(")?;
        let mut list = Vec::new();
        if self.eat_punct(")") {
            return Ok(list);
        }
        loop {
            list.push(self.expression()?);
            if self.eat_punct(")") {
                return Ok(list);
            }
            self.expect_punct(",")?;
        }
    }

    fn additive(&mut self) -> PResult<Expression> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.is_punct("+") {
                BinaryOp::Add
            } else if self.is_punct("-") {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> PResult<Expression> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_punct("*") {
                BinaryOp::Mul
            } else if self.is_punct("/") {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expression> {
        if self.eat_punct("!") {
            return Ok(Expression::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        if self.is_punct("+") || self.is_punct("-") {
            if matches!(self.peek_n(1), Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) {
                if let Some(l) = self.literal()? {
                    return Ok(Expression::Term(Term::Literal(l)));
                }
            }
            let op = if self.eat_punct("+") {
                UnaryOp::Plus
            } else {
                self.advance();
                UnaryOp::Minus
            };
            return Ok(Expression::Unary(op, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expression> {
        match self.peek().clone() {
            Tok::Punct("(") => {
                self.advance();
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(_) => Ok(Expression::Term(Term::Var(self.var()?))),
            Tok::IriRef(_) | Tok::PName { .. } => {
                let iri = self.iri()?;
                if !self.is_punct("(") {
                    return Ok(Expression::Term(Term::Iri(iri)));
                }
                self.advance();
                let mut args = Vec::new();
                let mut distinct = false;
                if !self.eat_punct(")") {
                    distinct = self.eat_kw("DISTINCT");
                    loop {
                        args.push(self.expression()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                Ok(Expression::FunctionCall { iri, distinct, args })
            }
            Tok::Word(w) => {
                let up = w.to_ascii_uppercase();
                if up == "TRUE" || up == "FALSE" {
                    let l = self.literal()?.expect("boolean literal");
                    return Ok(Expression::Term(Term::Literal(l)));
                }
                if up == "EXISTS" || (up == "NOT" && self.is_kw_at(1, "EXISTS")) {
                    let negated = up == "NOT";
                    self.advance();
                    if negated {
                        self.advance();
                    }
                    let pattern = self.group_graph_pattern()?;
                    return Ok(Expression::Exists { negated, pattern: Box::new(pattern) });
                }
                if let Some(kind) = AggregateKind::from_keyword(&up) {
                    self.advance();
                    return self.aggregate(kind);
                }
                if let Some(b) = Builtin::from_keyword(&up) {
                    self.advance();
                    return self.builtin_call(b);
                }
                Err(self.error(&["expression"]))
            }
            _ => match self.literal()? {
                Some(l) => Ok(Expression::Term(Term::Literal(l))),
                None => Err(self.error(&["expression"])),
            },
        }
    }

    fn aggregate(&mut self, kind: AggregateKind) -> PResult<Expression> {
        self.expect_punct("(")?;
        let distinct = self.eat_kw("DISTINCT");
        let arg = if kind == AggregateKind::Count && self.eat_punct("*") {
            None
        } else {
            Some(Box::new(self.expression()?))
        };
        let mut separator = None;
        if kind == AggregateKind::GroupConcat && self.eat_punct(";") {
            self.expect_kw("SEPARATOR")?;
            self.expect_punct("=")?;
            match self.advance() {
                Tok::Str(s) => separator = Some(s),
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&["string"]));
                }
            }
        }
        self.expect_punct(")")?;
        Ok(Expression::Aggregate(Aggregate { kind, distinct, arg, separator }))
    }

    fn builtin_call(&mut self, b: Builtin) -> PResult<Expression> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.eat_punct(")") {
            loop {
                args.push(self.expression()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        let (lo, hi) = b.arity();
        if args.len() < lo || args.len() > hi {
            return Err(self.error_msg(format!(
                "{} takes {} arguments, got {}",
                b.name(),
                if lo == hi { format!("{}", lo) } else { format!("{}..{}", lo, hi) },
                args.len()
            )));
        }
        if b == Builtin::Bound && !matches!(args[0], Expression::Term(Term::Var(_))) {
            return Err(self.error_msg("BOUND expects a variable".into()));
        }
        Ok(Expression::Builtin(b, args))
    }
}

fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    if !chars.next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    for c in chars {
        match c {
            ':' => return true,
            c if c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.' => {}
            _ => return false,
        }
    }
    false
}

fn unescape_local(local: &str) -> String {
    if !local.contains('\\') {
        return local.to_string();
    }
    let mut out = String::with_capacity(local.len());
    let mut chars = local.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}
