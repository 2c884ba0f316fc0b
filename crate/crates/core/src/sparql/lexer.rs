use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    BNode(String),
    Var(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    /// Keywords, `a`, `true`, `false` and function names; kept as written.
    Word(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::IriRef(i) => write!(f, "<{}>", i),
            Tok::PName { prefix, local } => write!(f, "{}:{}", prefix, local),
            Tok::BNode(b) => write!(f, "_:{}", b),
            Tok::Var(v) => write!(f, "?{}", v),
            Tok::Str(s) => write!(f, "\"{}\"", s),
            Tok::LangTag(t) => write!(f, "@{}", t),
            Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n) => f.write_str(n),
            Tok::Word(w) => f.write_str(w),
            Tok::Punct(p) => f.write_str(p),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const PUNCT: [&str; 25] = [
    "^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "<",
    ">", "!", "+", "-", "*", "/", "^", "|",
];

pub(crate) fn tokenize(input: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer { chars: input.chars().collect(), pos: 0, line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let (line, column) = (lx.line, lx.column);
        let tok = lx.next_token()?;
        let done = tok == Tok::Eof;
        out.push(Token { tok, line, column });
        if done {
            return Ok(out);
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || matches!(c as u32, 0xB7 | 0x300..=0x36F | 0x203F..=0x2040)
}

fn is_varname_char(c: char) -> bool {
    is_pn_chars_u(c) || c.is_ascii_digit() || matches!(c as u32, 0xB7 | 0x300..=0x36F | 0x203F..=0x2040)
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, msg: &str) -> SyntaxError {
        SyntaxError::new(self.line, self.column, Vec::new(), msg.to_string())
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Tok, SyntaxError> {
        let Some(c) = self.peek() else { return Ok(Tok::Eof) };
        match c {
            '<' => {
                if let Some(iri) = self.try_iriref() {
                    return Ok(Tok::IriRef(iri));
                }
            }
            '?' | '$' => {
                if self.peek_at(1).is_some_and(is_varname_char) {
                    self.bump();
                    let mut name = String::new();
                    while let Some(c) = self.peek().filter(|c| is_varname_char(*c)) {
                        name.push(c);
                        self.bump();
                    }
                    return Ok(Tok::Var(name));
                }
                if c == '?' {
                    self.bump();
                    return Ok(Tok::Punct("?"));
                }
                return Err(self.error("unexpected character '$'"));
            }
            '"' | '\'' => return self.string(c).map(Tok::Str),
            '@' => {
                self.bump();
                let mut tag = String::new();
                while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '-') {
                    tag.push(c);
                    self.bump();
                }
                if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(self.error("malformed language tag"));
                }
                return Ok(Tok::LangTag(tag));
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.pn_local_like(false)?;
                if label.is_empty() {
                    return Err(self.error("empty blank node label"));
                }
                return Ok(Tok::BNode(label));
            }
            '0'..='9' => return Ok(self.number()),
            '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => return Ok(self.number()),
            ':' => {
                self.bump();
                let local = self.pn_local_like(true)?;
                return Ok(Tok::PName { prefix: String::new(), local });
            }
            _ => {}
        }
        if is_pn_chars_base(c) {
            return self.word_or_pname();
        }
        for p in PUNCT {
            if self.starts_with(p) {
                for _ in 0..p.chars().count() {
                    self.bump();
                }
                return Ok(Tok::Punct(p));
            }
        }
        Err(self.error(&alloc::format!("unexpected character {:?}", c)))
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn try_iriref(&mut self) -> Option<String> {
        let mut i = 1;
        let mut iri = String::new();
        loop {
            let c = self.peek_at(i)?;
            match c {
                '>' => break,
                '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => return None,
                c if (c as u32) <= 0x20 => return None,
                c => iri.push(c),
            }
            i += 1;
        }
        for _ in 0..=i {
            self.bump();
        }
        Some(iri)
    }

    fn string(&mut self, quote: char) -> Result<String, SyntaxError> {
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let n = if long { 3 } else { 1 };
        for _ in 0..n {
            self.bump();
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error("unterminated string literal"));
            };
            if c == quote {
                if !long {
                    self.bump();
                    return Ok(out);
                }
                if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                    // A long string may end with up to two extra quote characters.
                    while self.peek_at(3) == Some(quote) {
                        out.push(quote);
                        self.bump();
                    }
                    self.bump();
                    self.bump();
                    self.bump();
                    return Ok(out);
                }
                out.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                let e = self.bump().ok_or_else(|| self.error("unterminated escape"))?;
                match e {
                    't' => out.push('\t'),
                    'n' => out.push('\n'),
                    'r' => out.push('\r'),
                    'b' => out.push('\u{8}'),
                    'f' => out.push('\u{c}'),
                    '"' => out.push('"'),
                    '\'' => out.push('\''),
                    '\\' => out.push('\\'),
                    'u' => out.push(self.hex_escape(4)?),
                    'U' => out.push(self.hex_escape(8)?),
                    _ => return Err(self.error("invalid escape sequence in string")),
                }
            } else if !long && (c == '\n' || c == '\r') {
                return Err(self.error("line break in short string literal"));
            } else {
                out.push(c);
                self.bump();
            }
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, SyntaxError> {
        let mut v = 0u32;
        for _ in 0..digits {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid unicode escape"))?;
            v = v * 16 + d;
        }
        char::from_u32(v).ok_or_else(|| self.error("invalid unicode code point"))
    }

    fn digits(&mut self, out: &mut String) -> usize {
        let mut n = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            out.push(c);
            self.bump();
            n += 1;
        }
        n
    }

    fn number(&mut self) -> Tok {
        let mut text = String::new();
        let int_digits = self.digits(&mut text);
        let mut is_decimal = false;
        if self.peek() == Some('.') {
            let next = self.peek_at(1);
            let exp_follows = matches!(next, Some('e' | 'E'))
                && int_digits > 0
                && self.exponent_at(2);
            if next.is_some_and(|c| c.is_ascii_digit()) || exp_follows {
                text.push('.');
                self.bump();
                self.digits(&mut text);
                is_decimal = true;
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) && self.exponent_at(1) {
            text.push(self.bump().unwrap_or('e'));
            if let Some(s) = self.peek().filter(|c| *c == '+' || *c == '-') {
                text.push(s);
                self.bump();
            }
            self.digits(&mut text);
            return Tok::Double(text);
        }
        if is_decimal {
            Tok::Decimal(text)
        } else {
            Tok::Integer(text)
        }
    }

    /// Whether an exponent's digits start at `offset` past the current 'e'.
    fn exponent_at(&self, offset: usize) -> bool {
        match self.peek_at(offset) {
            Some('+' | '-') => self.peek_at(offset + 1).is_some_and(|c| c.is_ascii_digit()),
            Some(c) => c.is_ascii_digit(),
            None => false,
        }
    }

    /// Reads a PN_LOCAL (or blank node label when `allow_colon_pct` is false).
    fn pn_local_like(&mut self, full_local: bool) -> Result<String, SyntaxError> {
        let mut out = String::new();
        let first_ok = |c: char| {
            is_pn_chars_u(c) || c.is_ascii_digit() || (full_local && (c == ':' || c == '%' || c == '\\'))
        };
        if !self.peek().is_some_and(first_ok) {
            return Ok(out);
        }
        loop {
            let Some(c) = self.peek() else { break };
            if full_local && c == '%' {
                let (a, b) = (self.peek_at(1), self.peek_at(2));
                if a.is_some_and(|x| x.is_ascii_hexdigit()) && b.is_some_and(|x| x.is_ascii_hexdigit()) {
                    for _ in 0..3 {
                        out.push(self.bump().unwrap_or('%'));
                    }
                    continue;
                }
                return Err(self.error("invalid percent escape in local name"));
            }
            if full_local && c == '\\' {
                match self.peek_at(1) {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => {
                        self.bump();
                        self.bump();
                        out.push('\\');
                        out.push(e);
                        continue;
                    }
                    _ => return Err(self.error("invalid escape in local name")),
                }
            }
            if is_pn_chars(c) || (full_local && c == ':') {
                out.push(c);
                self.bump();
            } else if c == '.' {
                // A dot is only part of the name when more name characters follow.
                let mut j = 1;
                while self.peek_at(j) == Some('.') {
                    j += 1;
                }
                let after = self.peek_at(j);
                if after.is_some_and(|a| is_pn_chars(a) || (full_local && (a == ':' || a == '%' || a == '\\'))) {
                    for _ in 0..j {
                        out.push('.');
                        self.bump();
                    }
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn word_or_pname(&mut self) -> Result<Tok, SyntaxError> {
        // Look ahead for PN_PREFIX ':'.
        let mut j = 0;
        let mut prefix = String::new();
        while let Some(c) = self.peek_at(j) {
            if is_pn_chars(c) || c == '.' {
                prefix.push(c);
                j += 1;
            } else {
                break;
            }
        }
        if self.peek_at(j) == Some(':') && !prefix.ends_with('.') {
            for _ in 0..=j {
                self.bump();
            }
            let local = self.pn_local_like(true)?;
            return Ok(Tok::PName { prefix, local });
        }
        let mut word = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
            word.push(c);
            self.bump();
        }
        if word.is_empty() {
            return Err(self.error("unexpected character"));
        }
        Ok(Tok::Word(word))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn pname_trailing_dot_is_separator() {
        assert_eq!(
            toks("wd:Q5."),
            [
                Tok::PName { prefix: "wd".into(), local: "Q5".into() },
                Tok::Punct("."),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn less_than_versus_iri() {
        assert_eq!(toks("?a < 3")[1], Tok::Punct("<"));
        assert_eq!(toks("<http://x/y>")[0], Tok::IriRef("http://x/y".into()));
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("1.")[..2], [Tok::Integer("1".into()), Tok::Punct(".")]);
        assert_eq!(toks("1.5")[0], Tok::Decimal("1.5".into()));
        assert_eq!(toks("1e3")[0], Tok::Double("1e3".into()));
        assert_eq!(toks(".5E-2")[0], Tok::Double(".5E-2".into()));
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(toks(r#""a\"b""#)[0], Tok::Str("a\"b".into()));
        assert_eq!(toks("'''x\ny'''")[0], Tok::Str("x\ny".into()));
        assert_eq!(toks(r#""""a""""""#)[0], Tok::Str("a\"\"".into()));
    }

    #[test]
    fn path_question_mark_and_variables() {
        assert_eq!(toks("wdt:P31? ?x")[1], Tok::Punct("?"));
        assert_eq!(toks("wdt:P31? ?x")[2], Tok::Var("x".into()));
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("# hi\n?x # there")[..2], [Tok::Var("x".into()), Tok::Eof]);
    }
}
