use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A syntax error with the position of the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    /// Token kinds that would have been accepted here (may be empty).
    pub expected: Vec<String>,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(line: usize, column: usize, expected: Vec<String>, message: String) -> Self {
        SyntaxError { line, column, expected, message }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax(SyntaxError),
    /// SPARQL Update or other constructs outside the query grammar.
    UnsupportedFeature { feature: String, line: usize, column: usize },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax(e) => (e.line, e.column),
            ParseError::UnsupportedFeature { line, column, .. } => (*line, *column),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax(e) => e.fmt(f),
            ParseError::UnsupportedFeature { feature, line, column } => {
                write!(f, "unsupported feature at {}:{}: {}", line, column, feature)
            }
        }
    }
}

impl core::error::Error for ParseError {}
impl core::error::Error for SyntaxError {}

impl From<SyntaxError> for ParseError {
    fn from(e: SyntaxError) -> Self {
        ParseError::Syntax(e)
    }
}
