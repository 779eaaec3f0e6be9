//! Tokenizer for Python 3 source text.
//!
//! The lexer tracks bracket depth and indentation the same way CPython's
//! tokenizer does: newlines inside brackets are non-logical (`Nl`), blank and
//! comment-only lines never change indentation, and every dedent emits one
//! `Dedent` per closed level.
//!
//! Two modes exist. The strict mode reports the first lexical error. The
//! lenient mode never fails; it closes unterminated strings at the end of the
//! line (or file for triple-quoted strings) and accepts stray characters as
//! single-character operator tokens, which is what metric code needs when it
//! is handed generated programs that may not even lex.

use crate::error::{SyntaxError, SyntaxErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Name,
    Keyword,
    Number,
    String,
    FString,
    Op,
    /// End of a logical line.
    Newline,
    /// Non-logical line break (blank line, comment line, inside brackets).
    Nl,
    Indent,
    Dedent,
    Comment,
    EndMarker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    pub line: usize,
    pub col: usize,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Op && self.text == op
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

const OPERATORS_3: &[&str] = &["**=", "//=", ">>=", "<<=", "...", "!="];
const OPERATORS_2: &[&str] = &[
    "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "@=",
];
const OPERATORS_1: &str = "+-*/%@&|^~<>()[]{},:.;=";

fn is_string_prefix(word: &str) -> bool {
    matches!(
        word.to_ascii_lowercase().as_str(),
        "r" | "u" | "f" | "b" | "br" | "rb" | "fr" | "rf"
    )
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Lines start offsets, used to turn byte offsets into 1-based line/column.
struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                starts.push(i + 1);
            }
        }
        LineIndex { starts }
    }

    fn position(&self, offset: usize) -> (usize, usize) {
        let line = match self.starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line + 1, offset - self.starts[line] + 1)
    }
}

pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
    lenient: bool,
    lines: LineIndex,
    indents: Vec<usize>,
    depth: usize,
    fragment: bool,
    at_line_start: bool,
    line_has_tokens: bool,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            base: 0,
            lenient: false,
            lines: LineIndex::new(src),
            indents: vec![0],
            depth: 0,
            fragment: false,
            at_line_start: true,
            line_has_tokens: false,
            tokens: Vec::new(),
        }
    }

    pub fn lenient(mut self, lenient: bool) -> Self {
        self.lenient = lenient;
        self
    }

    /// Shifts every reported span by `base` bytes. Used when lexing a
    /// fragment (an f-string replacement field) of a larger file.
    pub fn with_base(mut self, base: usize) -> Self {
        self.base = base;
        self
    }

    /// Treats the input as the inside of brackets: newlines are not logical
    /// line ends and indentation is ignored.
    pub fn bracketed(mut self) -> Self {
        self.depth = 1;
        self.fragment = true;
        self.at_line_start = false;
        self
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.lines.position(offset.min(self.src.len()));
        SyntaxError {
            kind: SyntaxErrorKind::Lex,
            message: message.into(),
            line,
            col,
            offset: offset + self.base,
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize) {
        let (line, col) = self.lines.position(start);
        let text = self.src[start..end].to_string();
        if !matches!(
            kind,
            TokenKind::Comment | TokenKind::Nl | TokenKind::Newline | TokenKind::EndMarker
        ) {
            self.line_has_tokens = true;
        }
        self.tokens.push(Token {
            kind,
            text,
            span: Span::new(start + self.base, end + self.base),
            line,
            col,
        });
    }

    fn push_synthetic(&mut self, kind: TokenKind, at: usize) {
        let (line, col) = self.lines.position(at);
        self.tokens.push(Token {
            kind,
            text: String::new(),
            span: Span::new(at + self.base, at + self.base),
            line,
            col,
        });
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, SyntaxError> {
        loop {
            if self.at_line_start && self.depth == 0 {
                if !self.handle_indentation()? {
                    break;
                }
                continue;
            }
            self.skip_inline_whitespace();
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            match c {
                '#' => self.lex_comment(),
                '\\' => {
                    self.bump();
                    match self.peek() {
                        Some('\n') => {
                            self.bump();
                        }
                        Some('\r') => {
                            self.bump();
                            if self.peek() == Some('\n') {
                                self.bump();
                            }
                        }
                        None => {
                            if !self.lenient {
                                return Err(self.error(start, "unexpected EOF after line continuation"));
                            }
                        }
                        Some(_) => {
                            if !self.lenient {
                                return Err(self.error(start, "unexpected character after line continuation character"));
                            }
                            self.push(TokenKind::Op, start, self.pos);
                        }
                    }
                }
                '\n' | '\r' => {
                    self.bump();
                    if c == '\r' && self.peek() == Some('\n') {
                        self.bump();
                    }
                    if self.depth > 0 || !self.line_has_tokens {
                        self.push(TokenKind::Nl, start, self.pos);
                    } else {
                        self.push(TokenKind::Newline, start, self.pos);
                        self.line_has_tokens = false;
                    }
                    if self.depth == 0 {
                        self.at_line_start = true;
                    }
                }
                '"' | '\'' => self.lex_string(start, start)?,
                c if c.is_ascii_digit() => self.lex_number(start),
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.lex_number(start),
                c if is_ident_start(c) => {
                    while self.peek().is_some_and(is_ident_continue) {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    if is_string_prefix(word) && matches!(self.peek(), Some('"') | Some('\'')) {
                        let quote_start = self.pos;
                        self.lex_string(start, quote_start)?;
                    } else if is_keyword(word) {
                        self.push(TokenKind::Keyword, start, self.pos);
                    } else {
                        self.push(TokenKind::Name, start, self.pos);
                    }
                }
                _ => self.lex_operator(start)?,
            }
        }
        self.finish()
    }

    /// Measures the indentation of a new line and emits layout tokens.
    /// Returns false once the end of input is reached.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        let line_start = self.pos;
        let mut width = 0usize;
        while let Some(c) = self.peek() {
            match c {
                ' ' => width += 1,
                '\t' => width = (width / 8 + 1) * 8,
                '\x0c' => width = 0,
                _ => break,
            }
            self.bump();
        }
        match self.peek() {
            None => return Ok(false),
            Some('#') => {
                self.lex_comment();
                return Ok(true);
            }
            Some('\n') | Some('\r') => {
                let start = self.pos;
                self.bump();
                if self.src[start..].starts_with("\r\n") {
                    self.bump();
                }
                self.push(TokenKind::Nl, start, self.pos);
                return Ok(true);
            }
            Some('\\') if matches!(self.peek_at(1), Some('\n') | Some('\r')) => {
                // A continuation on an otherwise empty line joins the next line;
                // indentation is taken from this line.
            }
            _ => {}
        }
        self.at_line_start = false;
        let current = *self.indents.last().unwrap_or(&0);
        if width > current {
            self.indents.push(width);
            self.push(TokenKind::Indent, line_start, self.pos);
        } else if width < current {
            while self.indents.last().is_some_and(|&top| top > width) {
                self.indents.pop();
                self.push_synthetic(TokenKind::Dedent, self.pos);
            }
            if *self.indents.last().unwrap_or(&0) != width {
                if !self.lenient {
                    return Err(self.error(
                        self.pos,
                        "unindent does not match any outer indentation level",
                    ));
                }
                self.indents.push(width);
                self.push(TokenKind::Indent, line_start, self.pos);
            }
        }
        Ok(true)
    }

    fn skip_inline_whitespace(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t') | Some('\x0c')) {
            self.bump();
        }
    }

    fn lex_comment(&mut self) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '\n' || c == '\r' {
                break;
            }
            self.bump();
        }
        self.push(TokenKind::Comment, start, self.pos);
    }

    fn lex_number(&mut self, start: usize) {
        let radix_prefix = self.peek() == Some('0')
            && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            self.bump();
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
                self.bump();
            }
        } else {
            while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                self.bump();
            }
            if self.peek() == Some('.') {
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                    self.bump();
                }
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let sign = matches!(self.peek_at(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    for _ in 0..=digit_at {
                        self.bump();
                    }
                    while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                        self.bump();
                    }
                }
            }
        }
        if matches!(self.peek(), Some('j' | 'J')) {
            self.bump();
        }
        self.push(TokenKind::Number, start, self.pos);
    }

    fn lex_string(&mut self, start: usize, quote_start: usize) -> Result<(), SyntaxError> {
        let prefix = self.src[start..quote_start].to_ascii_lowercase();
        let quote = self.peek().unwrap_or('"');
        let triple = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let quote_len = if triple { 3 } else { 1 };
        for _ in 0..quote_len {
            self.bump();
        }
        loop {
            let Some(c) = self.peek() else {
                if !self.lenient {
                    return Err(self.error(start, "unterminated string literal"));
                }
                break;
            };
            if c == '\\' {
                self.bump();
                self.bump();
                continue;
            }
            if !triple && (c == '\n' || c == '\r') {
                if !self.lenient {
                    return Err(self.error(start, "unterminated string literal"));
                }
                break;
            }
            if c == quote {
                if !triple {
                    self.bump();
                    break;
                }
                if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                    self.bump();
                    self.bump();
                    self.bump();
                    break;
                }
            }
            self.bump();
        }
        let kind = if prefix.contains('f') {
            TokenKind::FString
        } else {
            TokenKind::String
        };
        self.push(kind, start, self.pos);
        Ok(())
    }

    fn lex_operator(&mut self, start: usize) -> Result<(), SyntaxError> {
        let rest = &self.src[self.pos..];
        let op = OPERATORS_3
            .iter()
            .chain(OPERATORS_2.iter())
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .or_else(|| {
                let c = rest.chars().next()?;
                OPERATORS_1.contains(c).then_some(c.len_utf8())
            });
        let Some(len) = op else {
            if !self.lenient {
                return Err(self.error(start, format!("invalid character {:?}", self.peek().unwrap_or(' '))));
            }
            self.bump();
            self.push(TokenKind::Op, start, self.pos);
            return Ok(());
        };
        self.pos += len;
        match &self.src[start..self.pos] {
            "(" | "[" | "{" => self.depth += 1,
            ")" | "]" | "}" => {
                if self.depth == 0 {
                    if !self.lenient {
                        return Err(self.error(start, "unmatched closing bracket"));
                    }
                } else {
                    self.depth -= 1;
                }
            }
            _ => {}
        }
        self.push(TokenKind::Op, start, self.pos);
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<Token>, SyntaxError> {
        let end = self.src.len();
        if self.depth > 0 && !self.lenient && !self.fragment {
            return Err(self.error(end, "unexpected EOF in multi-line statement"));
        }
        if self.line_has_tokens {
            self.push_synthetic(TokenKind::Newline, end);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push_synthetic(TokenKind::Dedent, end);
        }
        self.push_synthetic(TokenKind::EndMarker, end);
        Ok(self.tokens)
    }
}

/// Strict tokenization: fails on the first lexical error.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer::new(src).tokenize()
}

/// Tokenization that never fails.
pub fn tokenize_lenient(src: &str) -> Vec<Token> {
    Lexer::new(src)
        .lenient(true)
        .tokenize()
        .expect("lenient lexing is infallible")
}
