//! SPARQL 1.1 query grammar: lexer, parser, syntax tree and serializer.

pub mod ast;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod prefixes;
pub mod serialize;
pub mod visit;

pub use ast::*;
pub use error::{ParseError, SyntaxError};
pub use parser::{parse_query, parse_query_with};
pub use prefixes::PrefixTable;
pub use serialize::{serialize_query, serialize_with, Canonical, IriRole, Render};
pub use visit::{
    collect_iris, count_triple_patterns, declare_used_prefixes, variables, walk_query, Scope, Visitor,
};
