//! Syntax tree for SPARQL 1.1 queries.
//!
//! The tree is lossless with respect to everything that matters for analysis:
//! abbreviated triple syntax (`;`, `,`, `[]`, collections) is kept as written,
//! property paths keep their operator structure, and prefixed names keep
//! their spelling next to the resolved absolute IRI.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";

/// A parsed query (or sub-select).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prologue: Prologue,
    pub form: QueryForm,
    pub dataset: Vec<DatasetClause>,
    /// `None` only for `DESCRIBE` without a `WHERE` clause.
    pub pattern: Option<GroupPattern>,
    pub modifiers: Modifiers,
    pub values: Option<InlineData>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum FormKind {
    Select,
    Ask,
    Construct,
    Describe,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prologue {
    pub base: Option<String>,
    /// Prefix label to namespace, as declared in the query text.
    pub prefixes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    Select(Selection),
    Ask,
    /// `template` is `None` for the `CONSTRUCT WHERE { ... }` short form.
    Construct { template: Option<Vec<TriplesSameSubject>> },
    /// `targets` is `None` for `DESCRIBE *`.
    Describe { targets: Option<Vec<Term>> },
}

impl QueryForm {
    pub fn kind(&self) -> FormKind {
        match self {
            QueryForm::Select(_) => FormKind::Select,
            QueryForm::Ask => FormKind::Ask,
            QueryForm::Construct { .. } => FormKind::Construct,
            QueryForm::Describe { .. } => FormKind::Describe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectModifier {
    Distinct,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub modifier: Option<SelectModifier>,
    /// `None` means `SELECT *`.
    pub items: Option<Vec<SelectItem>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectItem {
    Var(Var),
    Expr(Expression, Var),
}

impl SelectItem {
    pub fn var(&self) -> &Var {
        match self {
            SelectItem::Var(v) | SelectItem::Expr(_, v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetClause {
    pub named: bool,
    pub iri: Iri,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Modifiers {
    pub group_by: Vec<GroupCondition>,
    pub having: Vec<Expression>,
    pub order_by: Vec<OrderCondition>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

impl Modifiers {
    pub fn is_empty(&self) -> bool {
        self.group_by.is_empty()
            && self.having.is_empty()
            && self.order_by.is_empty()
            && self.limit.is_none()
            && self.offset.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupCondition {
    Var(Var),
    /// A bare built-in or function call.
    Call(Expression),
    /// `(expr)` or `(expr AS ?v)`.
    Expr(Expression, Option<Var>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderDirection {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderCondition {
    pub direction: Option<OrderDirection>,
    pub expr: Expression,
}

/// A `{ ... }` group: either a sequence of elements or a single sub-select.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupPattern {
    Elements(Vec<PatternElement>),
    SubSelect(Box<Query>),
}

impl GroupPattern {
    pub fn empty() -> Self {
        GroupPattern::Elements(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, GroupPattern::Elements(e) if e.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    /// A block of triple patterns separated by `.`.
    Triples(Vec<TriplesSameSubject>),
    Group(GroupPattern),
    /// Two or more alternatives.
    Union(Vec<GroupPattern>),
    Optional(GroupPattern),
    Minus(GroupPattern),
    Graph { name: Term, pattern: GroupPattern },
    Service { silent: bool, endpoint: Term, pattern: GroupPattern },
    Filter(Expression),
    Bind(Expression, Var),
    Values(InlineData),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesSameSubject {
    pub subject: Node,
    pub predicates: PropertyList,
}

pub type PropertyList = Vec<(Verb, Vec<Node>)>;

/// A subject or object position: a plain term or one of the abbreviated
/// blank-node forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Term(Term),
    /// `[ p o ; ... ]`; an empty list is the anonymous node `[]`.
    BlankPropertyList(PropertyList),
    /// `( a b c )` with at least one member (`()` is [`Term::Nil`]).
    Collection(Vec<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verb {
    Var(Var),
    Path(Path),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Path {
    Iri(Iri),
    /// The `a` keyword.
    A,
    Inverse(Box<Path>),
    Sequence(Vec<Path>),
    Alternative(Vec<Path>),
    ZeroOrMore(Box<Path>),
    OneOrMore(Box<Path>),
    ZeroOrOne(Box<Path>),
    /// `!iri`, `!^iri`, `!(a|^b)`; the flag marks inverse members.
    Negated(Vec<(bool, NegatedMember)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegatedMember {
    Iri(Iri),
    A,
}

impl Path {
    /// Whether this is a plain predicate (an IRI or `a`) rather than a
    /// property path expression.
    pub fn is_simple(&self) -> bool {
        matches!(self, Path::Iri(_) | Path::A)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Var),
    Iri(Iri),
    Literal(Literal),
    BlankNode(String),
    /// The empty collection `()`.
    Nil,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

/// An IRI as spelled in the query together with its absolute form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iri {
    pub spelling: IriSpelling,
    pub absolute: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IriSpelling {
    /// `<...>`; holds the text between the angle brackets.
    Full(String),
    Prefixed { prefix: String, local: String },
}

impl Iri {
    pub fn full(iri: impl Into<String>) -> Self {
        let iri = iri.into();
        Iri { spelling: IriSpelling::Full(iri.clone()), absolute: iri }
    }

    pub fn prefixed(prefix: &str, local: &str, namespace: &str) -> Self {
        let mut absolute = String::from(namespace);
        absolute.push_str(local);
        Iri {
            spelling: IriSpelling::Prefixed { prefix: prefix.into(), local: local.into() },
            absolute,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.absolute
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
    /// Written without quotes (`42`, `1.5`, `1e3`, `true`).
    pub bare: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiteralKind {
    Plain,
    Lang(String),
    Typed(Iri),
}

/// Identity of a literal: lexical form plus kind, with the datatype resolved
/// to its absolute IRI and the language tag case-folded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiteralKey {
    pub lexical: String,
    pub kind: LiteralKeyKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LiteralKeyKind {
    Plain,
    Lang(String),
    Typed(String),
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Plain, bare: false }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Lang(tag.into()), bare: false }
    }

    pub(crate) fn bare_typed(lexical: &str, xsd_local: &str) -> Self {
        let mut dt = String::from(XSD);
        dt.push_str(xsd_local);
        Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Typed(Iri {
                spelling: IriSpelling::Full(dt.clone()),
                absolute: dt,
            }),
            bare: true,
        }
    }

    pub fn key(&self) -> LiteralKey {
        let kind = match &self.kind {
            LiteralKind::Plain => LiteralKeyKind::Plain,
            LiteralKind::Lang(tag) => LiteralKeyKind::Lang(tag.to_ascii_lowercase()),
            LiteralKind::Typed(dt) => LiteralKeyKind::Typed(dt.absolute.clone()),
        };
        LiteralKey { lexical: self.lexical.clone(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlineData {
    pub vars: Vec<Var>,
    /// `None` cells are `UNDEF`.
    pub rows: Vec<Vec<Option<Term>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Equal,
    NotEqual,
    Less,
    Greater,
    LessEq,
    GreaterEq,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Equal => "=",
            BinaryOp::NotEqual => "!=",
            BinaryOp::Less => "<",
            BinaryOp::Greater => ">",
            BinaryOp::LessEq => "<=",
            BinaryOp::GreaterEq => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Equal
            | BinaryOp::NotEqual
            | BinaryOp::Less
            | BinaryOp::Greater
            | BinaryOp::LessEq
            | BinaryOp::GreaterEq => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Term(Term),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Unary(UnaryOp, Box<Expression>),
    In { expr: Box<Expression>, list: Vec<Expression>, negated: bool },
    Builtin(Builtin, Vec<Expression>),
    /// A call to a function named by an IRI (`geof:distance(?a, ?b)`).
    FunctionCall { iri: Iri, distinct: bool, args: Vec<Expression> },
    Exists { negated: bool, pattern: Box<GroupPattern> },
    Aggregate(Aggregate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregateKind {
    Count,
    Sum,
    Min,
    Max,
    Avg,
    Sample,
    GroupConcat,
}

impl AggregateKind {
    pub fn name(self) -> &'static str {
        match self {
            AggregateKind::Count => "COUNT",
            AggregateKind::Sum => "SUM",
            AggregateKind::Min => "MIN",
            AggregateKind::Max => "MAX",
            AggregateKind::Avg => "AVG",
            AggregateKind::Sample => "SAMPLE",
            AggregateKind::GroupConcat => "GROUP_CONCAT",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "COUNT" => AggregateKind::Count,
            "SUM" => AggregateKind::Sum,
            "MIN" => AggregateKind::Min,
            "MAX" => AggregateKind::Max,
            "AVG" => AggregateKind::Avg,
            "SAMPLE" => AggregateKind::Sample,
            "GROUP_CONCAT" => AggregateKind::GroupConcat,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub kind: AggregateKind,
    pub distinct: bool,
    /// `None` for `COUNT(*)`.
    pub arg: Option<Box<Expression>>,
    pub separator: Option<String>,
}

macro_rules! builtins {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Non-aggregate built-in functions of SPARQL 1.1.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Builtin { $($variant),* }

        impl Builtin {
            pub fn name(self) -> &'static str {
                match self { $(Builtin::$variant => $name),* }
            }

            /// Looks up an upper-cased keyword.
            pub fn from_keyword(word: &str) -> Option<Self> {
                match word { $($name => Some(Builtin::$variant),)* _ => None }
            }
        }
    };
}

builtins! {
    Str => "STR", Lang => "LANG", LangMatches => "LANGMATCHES", Datatype => "DATATYPE",
    Bound => "BOUND", Iri => "IRI", Uri => "URI", BNode => "BNODE", Rand => "RAND",
    Abs => "ABS", Ceil => "CEIL", Floor => "FLOOR", Round => "ROUND", Concat => "CONCAT",
    StrLen => "STRLEN", UCase => "UCASE", LCase => "LCASE", EncodeForUri => "ENCODE_FOR_URI",
    Contains => "CONTAINS", StrStarts => "STRSTARTS", StrEnds => "STRENDS",
    StrBefore => "STRBEFORE", StrAfter => "STRAFTER", Year => "YEAR", Month => "MONTH",
    Day => "DAY", Hours => "HOURS", Minutes => "MINUTES", Seconds => "SECONDS",
    Timezone => "TIMEZONE", Tz => "TZ", Now => "NOW", Uuid => "UUID", StrUuid => "STRUUID",
    Md5 => "MD5", Sha1 => "SHA1", Sha256 => "SHA256", Sha384 => "SHA384", Sha512 => "SHA512",
    Coalesce => "COALESCE", If => "IF", StrLang => "STRLANG", StrDt => "STRDT",
    SameTerm => "SAMETERM", IsIri => "ISIRI", IsUri => "ISURI", IsBlank => "ISBLANK",
    IsLiteral => "ISLITERAL", IsNumeric => "ISNUMERIC", Regex => "REGEX", Substr => "SUBSTR",
    Replace => "REPLACE",
}

impl Builtin {
    /// Accepted argument counts (inclusive range).
    pub fn arity(self) -> (usize, usize) {
        use Builtin::*;
        match self {
            Rand | Now | Uuid | StrUuid => (0, 0),
            BNode => (0, 1),
            Concat | Coalesce => (0, usize::MAX),
            LangMatches | Contains | StrStarts | StrEnds | StrBefore | StrAfter | StrLang
            | StrDt | SameTerm => (2, 2),
            If => (3, 3),
            Regex | Substr => (2, 3),
            Replace => (3, 4),
            _ => (1, 1),
        }
    }
}
