use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::sparql::ast::*;
use crate::sparql::visit::{walk_query, Scope, Visitor};

/// Distinct literal identities anywhere in the query.
pub fn collect_literals(q: &Query) -> BTreeSet<LiteralKey> {
    struct Lits(BTreeSet<LiteralKey>);
    impl Visitor for Lits {
        fn literal(&mut self, lit: &Literal, _scope: Scope) {
            self.0.insert(lit.key());
        }
    }
    let mut v = Lits(BTreeSet::new());
    walk_query(&mut v, q);
    v.0
}

/// Language codes named by language filters: `LANG(x) = "code"` (also `!=`
/// and `IN`), `LANGMATCHES(LANG(x), "code")`, and comparisons against a
/// language-tagged literal. Codes are lower-cased; `*` and `""` are skipped.
pub fn collect_filter_languages(q: &Query) -> BTreeSet<String> {
    struct Langs(BTreeSet<String>);
    impl Langs {
        fn add(&mut self, code: &str) {
            if !code.is_empty() && code != "*" {
                self.0.insert(code.to_ascii_lowercase());
            }
        }
    }
    impl Visitor for Langs {
        fn expression(&mut self, e: &Expression, scope: Scope) {
            if scope != Scope::Filter {
                return;
            }
            match e {
                Expression::Binary(BinaryOp::Equal | BinaryOp::NotEqual, l, r) => {
                    for (a, b) in [(l, r), (r, l)] {
                        if is_lang_call(a) {
                            if let Some(code) = string_value(b) {
                                self.add(code);
                            }
                        }
                        if let Some(tag) = lang_tag(b) {
                            self.add(tag);
                        }
                    }
                }
                Expression::In { expr, list, .. } if is_lang_call(expr) => {
                    for item in list {
                        if let Some(code) = string_value(item) {
                            self.add(code);
                        }
                    }
                }
                Expression::Builtin(Builtin::LangMatches, args) if args.len() == 2 => {
                    if let Some(code) = string_value(&args[1]) {
                        self.add(code);
                    }
                }
                _ => {}
            }
        }
    }
    let mut v = Langs(BTreeSet::new());
    walk_query(&mut v, q);
    v.0
}

fn is_lang_call(e: &Expression) -> bool {
    matches!(e, Expression::Builtin(Builtin::Lang, _))
}

fn string_value(e: &Expression) -> Option<&str> {
    match e {
        Expression::Term(Term::Literal(l)) if !l.bare => Some(&l.lexical),
        _ => None,
    }
}

fn lang_tag(e: &Expression) -> Option<&str> {
    match e {
        Expression::Term(Term::Literal(Literal { kind: LiteralKind::Lang(tag), .. })) => Some(tag),
        _ => None,
    }
}
