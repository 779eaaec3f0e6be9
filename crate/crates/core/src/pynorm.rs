//! Source normalization for Python programs: noise stripping, canonical
//! re-printing, identifier standardization and token streams.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use pysyntax::ast::{Arg, Expr, FPart, Module, Stmt, StrPart};
use pysyntax::lexer::{Lexer, Span, Token, TokenKind};
use pysyntax::visit::{self, BindingKind, TargetKind, Visitor};
use pysyntax::SyntaxError;
use serde::{Deserialize, Serialize};

/// A program that failed to lex or parse.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("compile error: {0}")]
pub struct CompileError(#[from] pub SyntaxError);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Keyword,
    Identifier,
    Literal,
    Operator,
    Delimiter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tok {
    pub kind: TokenClass,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<Tok>,
}

pub const NEWLINE_TEXT: &str = "<newline>";
pub const INDENT_TEXT: &str = "<indent>";
pub const DEDENT_TEXT: &str = "<dedent>";

const OPERATORS: &[&str] = &[
    "+", "-", "*", "**", "/", "//", "%", "@", "<<", ">>", "&", "|", "^", "~", ":=", "<", ">",
    "<=", ">=", "==", "!=", "=", "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=",
    ">>=", "<<=", "**=",
];

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Joins the tokens back into source text: one logical line per
    /// newline token, four spaces per indent level, single spaces between
    /// tokens on a line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut depth = 0usize;
        let mut line: Vec<&str> = Vec::new();
        let flush = |out: &mut String, line: &mut Vec<&str>, depth: usize| {
            if !line.is_empty() {
                out.push_str(&"    ".repeat(depth));
                out.push_str(&line.join(" "));
                out.push('\n');
                line.clear();
            }
        };
        for tok in &self.tokens {
            match tok.text.as_str() {
                NEWLINE_TEXT if tok.kind == TokenClass::Delimiter => flush(&mut out, &mut line, depth),
                INDENT_TEXT if tok.kind == TokenClass::Delimiter => depth += 1,
                DEDENT_TEXT if tok.kind == TokenClass::Delimiter => depth = depth.saturating_sub(1),
                text => line.push(text),
            }
        }
        flush(&mut out, &mut line, depth);
        out
    }
}

fn classify(tok: &Token) -> Option<Tok> {
    let (kind, text) = match tok.kind {
        TokenKind::Keyword => (TokenClass::Keyword, tok.text.clone()),
        TokenKind::Name => (TokenClass::Identifier, tok.text.clone()),
        TokenKind::Number | TokenKind::String | TokenKind::FString => (TokenClass::Literal, tok.text.clone()),
        TokenKind::Op if tok.text == "..." => (TokenClass::Literal, tok.text.clone()),
        TokenKind::Op if OPERATORS.contains(&tok.text.as_str()) => (TokenClass::Operator, tok.text.clone()),
        TokenKind::Op => (TokenClass::Delimiter, tok.text.clone()),
        TokenKind::Newline => (TokenClass::Delimiter, NEWLINE_TEXT.to_string()),
        TokenKind::Indent => (TokenClass::Delimiter, INDENT_TEXT.to_string()),
        TokenKind::Dedent => (TokenClass::Delimiter, DEDENT_TEXT.to_string()),
        TokenKind::Nl | TokenKind::Comment | TokenKind::EndMarker => return None,
    };
    Some(Tok { kind, text })
}

fn to_stream(tokens: &[Token]) -> TokenStream {
    let mut out: Vec<Tok> = tokens.iter().filter_map(classify).collect();
    // The layout tokens closing the last line carry no content.
    while out
        .last()
        .is_some_and(|t| t.kind == TokenClass::Delimiter && (t.text == NEWLINE_TEXT || t.text == DEDENT_TEXT))
    {
        out.pop();
    }
    TokenStream { tokens: out }
}

/// Lexical tokens in source order, comments excluded. The stream length is
/// the token count used by the length filters.
pub fn tokenize(source: &str) -> Result<TokenStream, SyntaxError> {
    Ok(to_stream(&Lexer::new(source).tokenize()?))
}

/// Like [`tokenize`], but never fails: malformed input is tokenized as far
/// as possible.
pub fn tokenize_lenient(source: &str) -> TokenStream {
    to_stream(&pysyntax::tokenize_lenient(source))
}

/// Token count if the source lexes.
pub fn token_count(source: &str) -> Option<usize> {
    tokenize(source).ok().map(|t| t.len())
}

// ---- noise stripping ------------------------------------------------

/// Statement patterns removed by [`strip_noise_with`]. Matching ignores all
/// whitespace; `*` matches any run of characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denylist {
    patterns: Vec<String>,
}

impl Default for Denylist {
    fn default() -> Self {
        Denylist::parse(include_str!("../data/denylist.txt"))
    }
}

impl Denylist {
    pub fn parse(text: &str) -> Self {
        let patterns = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(strip_ws)
            .collect();
        Denylist { patterns }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(Denylist::parse(&std::fs::read_to_string(path)?))
    }

    pub fn empty() -> Self {
        Denylist { patterns: Vec::new() }
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn matches(&self, statement: &str) -> bool {
        let s = strip_ws(statement);
        self.patterns.iter().any(|p| glob_match(p.as_bytes(), s.as_bytes()))
    }
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn glob_match(pattern: &[u8], text: &[u8]) -> bool {
    let (mut p, mut t) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while t < text.len() {
        if p < pattern.len() && pattern[p] == b'*' {
            star = Some((p, t));
            p += 1;
        } else if p < pattern.len() && pattern[p] == text[t] {
            p += 1;
            t += 1;
        } else if let Some((sp, st)) = star {
            p = sp + 1;
            t = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    while p < pattern.len() && pattern[p] == b'*' {
        p += 1;
    }
    p == pattern.len()
}

/// Removes comments and denylisted statements with the default denylist.
pub fn strip_noise(source: &str) -> String {
    strip_noise_with(source, &Denylist::default())
}

const COMPOUND_KEYWORDS: &[&str] = &[
    "if", "elif", "else", "for", "while", "with", "try", "except", "finally", "def", "class", "async",
];

struct LogicalLine {
    /// Offset of the first byte of the first physical line.
    start: usize,
    /// Offset just past the newline ending the line (or end of text).
    end: usize,
    indent: usize,
    header: bool,
    /// Byte ranges of the simple statements on the line.
    statements: Vec<(usize, usize)>,
    /// Offset after the header colon for compound lines with inline bodies.
    body_start: Option<usize>,
}

fn line_start(src: &str, offset: usize) -> usize {
    src[..offset].rfind('\n').map(|i| i + 1).unwrap_or(0)
}

fn line_end(src: &str, offset: usize) -> usize {
    src[offset..].find('\n').map(|i| offset + i + 1).unwrap_or(src.len())
}

fn logical_lines(src: &str, tokens: &[Token]) -> Vec<LogicalLine> {
    let mut lines = Vec::new();
    let mut current: Vec<&Token> = Vec::new();
    let finish = |current: &mut Vec<&Token>, lines: &mut Vec<LogicalLine>| {
        if current.is_empty() {
            return;
        }
        let first = current[0];
        let last = current[current.len() - 1];
        let start = line_start(src, first.span.start);
        let end = line_end(src, last.span.end.max(first.span.start));
        let compound = first.kind == TokenKind::Keyword && COMPOUND_KEYWORDS.contains(&first.text.as_str());
        let mut depth = 0i32;
        let mut header_colon = None;
        let mut statements = Vec::new();
        let mut seg_start: Option<usize> = None;
        let mut seg_end = 0;
        for tok in current.iter() {
            if tok.kind == TokenKind::Op {
                match tok.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth -= 1,
                    ":" if compound && depth == 0 && header_colon.is_none() => {
                        header_colon = Some(tok.span.end);
                        continue;
                    }
                    ";" if depth == 0 => {
                        if let Some(s) = seg_start.take() {
                            statements.push((s, seg_end));
                        }
                        continue;
                    }
                    _ => {}
                }
            }
            if compound && header_colon.is_none() {
                continue;
            }
            if seg_start.is_none() {
                seg_start = Some(tok.span.start);
            }
            seg_end = tok.span.end;
        }
        if let Some(s) = seg_start {
            statements.push((s, seg_end));
        }
        let header = compound && header_colon.is_some();
        lines.push(LogicalLine {
            start,
            end,
            indent: first.col - 1,
            header: header && statements.is_empty(),
            statements,
            body_start: header_colon,
        });
        current.clear();
    };
    for tok in tokens {
        match tok.kind {
            TokenKind::Newline => finish(&mut current, &mut lines),
            TokenKind::Indent | TokenKind::Dedent | TokenKind::Nl | TokenKind::Comment | TokenKind::EndMarker => {}
            _ => current.push(tok),
        }
    }
    finish(&mut current, &mut lines);
    lines
}

/// Removes comments (with the whitespace before them) and every simple
/// statement matching `denylist`. Works lexically, so it also accepts code
/// that does not compile. Lines left empty by a removal disappear; a block
/// that would become empty gets a `pass`.
pub fn strip_noise_with(source: &str, denylist: &Denylist) -> String {
    let tokens = pysyntax::tokenize_lenient(source);
    let bytes = source.as_bytes();
    let mut deleted = vec![false; source.len()];
    let mut inserts: BTreeMap<usize, String> = BTreeMap::new();
    let delete = |deleted: &mut Vec<bool>, a: usize, b: usize| {
        for d in &mut deleted[a..b.min(source.len())] {
            *d = true;
        }
    };

    for tok in tokens.iter().filter(|t| t.kind == TokenKind::Comment) {
        let mut from = tok.span.start;
        while from > 0 && matches!(bytes[from - 1], b' ' | b'\t') {
            from -= 1;
        }
        let ls = line_start(source, tok.span.start);
        if from == ls {
            delete(&mut deleted, ls, line_end(source, tok.span.start));
        } else {
            delete(&mut deleted, from, tok.span.end);
        }
    }

    let lines = logical_lines(source, &tokens);
    let mut removed_line = vec![false; lines.len()];
    for (li, line) in lines.iter().enumerate() {
        if line.statements.is_empty() {
            continue;
        }
        let hits: Vec<bool> = line
            .statements
            .iter()
            .map(|&(a, b)| denylist.matches(&source[a..b]))
            .collect();
        if !hits.iter().any(|&h| h) {
            continue;
        }
        if hits.iter().all(|&h| h) {
            match line.body_start {
                Some(colon) => {
                    let (_, last_end) = line.statements[line.statements.len() - 1];
                    delete(&mut deleted, colon, last_end);
                    inserts.insert(colon, " pass".into());
                }
                None => {
                    delete(&mut deleted, line.start, line.end);
                    removed_line[li] = true;
                }
            }
            continue;
        }
        for (si, &(a, b)) in line.statements.iter().enumerate() {
            if !hits[si] {
                continue;
            }
            // Take the separator on the left, or on the right for the first
            // statement, together with the spaces around it.
            let (mut from, mut to) = (a, b);
            if si > 0 {
                from = line.statements[si - 1].1;
            } else {
                to = line.statements[1].0;
            }
            while from < to && deleted[from] {
                from += 1;
            }
            delete(&mut deleted, from, to);
        }
    }

    // Blocks emptied by whole-line removals get a `pass`.
    let mut i = 0;
    while i < lines.len() {
        if !removed_line[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < lines.len() && removed_line[i] {
            i += 1;
        }
        let prev = (0..run_start).rev().find(|&k| !removed_line[k]);
        let next = (i..lines.len()).find(|&k| !removed_line[k]);
        let first = &lines[run_start];
        if let Some(p) = prev {
            let header = &lines[p];
            let emptied = header.header
                && header.indent < first.indent
                && next.is_none_or(|n| lines[n].indent <= header.indent);
            if emptied {
                let indent = &source[first.start..first.start + first.indent.min(first.end - first.start)];
                let indent: String = indent.chars().take_while(|c| *c == ' ' || *c == '\t').collect();
                let newline = if source[first.start..first.end].ends_with('\n') { "\n" } else { "" };
                inserts.insert(first.start, format!("{indent}pass{newline}"));
            }
        }
    }

    let mut out = String::with_capacity(source.len());
    for (idx, ch) in source.char_indices() {
        if let Some(text) = inserts.get(&idx) {
            out.push_str(text);
        }
        if !deleted[idx] {
            out.push(ch);
        }
    }
    if let Some(text) = inserts.get(&source.len()) {
        out.push_str(text);
    }
    out
}

// ---- canonical round trip -------------------------------------------

/// Parses and re-prints the program in canonical layout.
pub fn ast_roundtrip(source: &str) -> Result<String, CompileError> {
    Ok(pysyntax::canonicalize(source)?)
}

/// Comment/denylist stripping followed by the canonical round trip.
pub fn purify(source: &str, denylist: &Denylist) -> Result<String, CompileError> {
    ast_roundtrip(&strip_noise_with(source, denylist))
}

// ---- identifier standardization -------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedCode {
    pub source: String,
    pub rename_map: BTreeMap<String, String>,
    pub compile_ok: bool,
}

fn builtins() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| include_str!("../data/python_builtins.txt").lines().filter(|l| !l.is_empty()).collect())
}

pub fn is_builtin(name: &str) -> bool {
    builtins().contains(name)
}

fn is_dunder(name: &str) -> bool {
    name.len() > 4 && name.starts_with("__") && name.ends_with("__")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Module,
    Class,
    Function,
}

#[derive(Default)]
struct Bindings {
    occurrences: Vec<(String, Span)>,
    bound: HashSet<String>,
    func_bound: HashSet<String>,
    excluded: HashSet<String>,
    params: HashSet<String>,
    kwarg_names: HashSet<String>,
    scopes: Vec<Scope>,
}

impl Bindings {
    fn scope(&self) -> Scope {
        *self.scopes.last().unwrap_or(&Scope::Module)
    }

    fn bind(&mut self, name: &str) {
        self.bound.insert(name.to_string());
        if self.scope() == Scope::Class {
            self.excluded.insert(name.to_string());
        }
    }

    fn bind_target(&mut self, target: &Expr) {
        match target {
            Expr::Name(id) => {
                self.bind(&id.name);
                self.occurrences.push((id.name.clone(), id.span));
            }
            Expr::Tuple(elts) | Expr::List(elts) => elts.iter().for_each(|e| self.bind_target(e)),
            Expr::Starred(inner) => self.bind_target(inner),
            other => self.visit_expr(other),
        }
    }

    fn exclude_names_in(&mut self, expr: &Expr) {
        struct Names<'a>(&'a mut HashSet<String>);
        impl Visitor for Names<'_> {
            fn visit_expr(&mut self, e: &Expr) {
                if let Expr::Name(id) = e {
                    self.0.insert(id.name.clone());
                }
                visit::walk_expr(self, e);
            }
            fn visit_binding(&mut self, ident: &pysyntax::ast::Ident, _: BindingKind) {
                self.0.insert(ident.name.clone());
            }
        }
        Names(&mut self.excluded).visit_expr(expr);
    }
}

impl Visitor for Bindings {
    fn visit_stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::FunctionDef(def) => {
                def.decorators.iter().for_each(|d| self.visit_expr(d));
                self.visit_binding(&def.name, BindingKind::Function);
                self.scopes.push(Scope::Function);
                self.visit_params(&def.params);
                if let Some(r) = &def.returns {
                    self.visit_expr(r);
                }
                visit::walk_body(self, &def.body);
                self.scopes.pop();
            }
            Stmt::ClassDef(def) => {
                def.decorators.iter().for_each(|d| self.visit_expr(d));
                self.visit_binding(&def.name, BindingKind::Class);
                def.bases.iter().for_each(|a| self.visit_arg(a));
                self.scopes.push(Scope::Class);
                visit::walk_body(self, &def.body);
                self.scopes.pop();
            }
            Stmt::Import(names) => {
                for alias in names {
                    let bound = alias
                        .asname
                        .clone()
                        .unwrap_or_else(|| alias.name.split('.').next().unwrap_or_default().to_string());
                    self.excluded.insert(bound);
                }
            }
            Stmt::ImportFrom { names, .. } => {
                for alias in names {
                    self.excluded.insert(alias.asname.clone().unwrap_or_else(|| alias.name.clone()));
                }
            }
            other => visit::walk_stmt(self, other),
        }
    }

    fn visit_expr(&mut self, expr: &Expr) {
        match expr {
            Expr::Name(id) => self.occurrences.push((id.name.clone(), id.span)),
            Expr::Lambda { params, body } => {
                self.scopes.push(Scope::Function);
                self.visit_params(params);
                self.visit_expr(body);
                self.scopes.pop();
                return;
            }
            Expr::Str(parts) => {
                for part in parts {
                    if let StrPart::Formatted(fs) = part {
                        self.exclude_debug_fields(&fs.parts);
                    }
                }
            }
            _ => {}
        }
        visit::walk_expr(self, expr);
    }

    fn visit_target(&mut self, target: &Expr, kind: TargetKind) {
        if kind == TargetKind::Del {
            self.visit_expr(target);
        } else {
            self.bind_target(target);
        }
    }

    fn visit_binding(&mut self, ident: &pysyntax::ast::Ident, kind: BindingKind) {
        self.occurrences.push((ident.name.clone(), ident.span));
        match kind {
            BindingKind::Global | BindingKind::Nonlocal => {}
            BindingKind::Function | BindingKind::Class => {
                self.bind(&ident.name);
                self.func_bound.insert(ident.name.clone());
            }
            BindingKind::Param => {
                self.bind(&ident.name);
                self.params.insert(ident.name.clone());
            }
            BindingKind::ExceptName | BindingKind::Walrus => self.bind(&ident.name),
        }
    }

    fn visit_arg(&mut self, arg: &Arg) {
        if let Arg::Keyword { name, .. } = arg {
            self.kwarg_names.insert(name.clone());
        }
        visit::walk_arg(self, arg);
    }
}

impl Bindings {
    fn exclude_debug_fields(&mut self, parts: &[FPart]) {
        for part in parts {
            if let FPart::Field(field) = part {
                if field.debug.is_some() {
                    self.exclude_names_in(&field.expr);
                }
                if let Some(spec) = &field.spec {
                    self.exclude_debug_fields(spec);
                }
            }
        }
    }
}

/// Renames every variable bound in the program to `varN` and every function
/// or class to `funcN`, numbering by first textual occurrence. Builtins,
/// dunder names, imported names, attributes, names bound directly in class
/// bodies and parameters that are also passed by keyword keep their names.
/// The rest of the text is left byte-for-byte intact.
pub fn standardize_identifiers(source: &str) -> Result<NormalizedCode, CompileError> {
    let module = pysyntax::parse_module(source)?;
    Ok(standardize_parsed(source, &module))
}

fn standardize_parsed(source: &str, module: &Module) -> NormalizedCode {
    let mut b = Bindings::default();
    visit::walk_module(&mut b, module);

    let renamable = |name: &str| {
        b.bound.contains(name)
            && !b.excluded.contains(name)
            && !is_builtin(name)
            && !is_dunder(name)
            && !(b.params.contains(name) && b.kwarg_names.contains(name))
    };

    let mut first_seen: HashMap<&str, usize> = HashMap::new();
    let mut reserved: HashSet<&str> = b.excluded.iter().map(String::as_str).collect();
    for (name, span) in &b.occurrences {
        if renamable(name) {
            let entry = first_seen.entry(name.as_str()).or_insert(span.start);
            *entry = (*entry).min(span.start);
        } else {
            reserved.insert(name.as_str());
        }
    }
    let mut order: Vec<(&str, usize)> = first_seen.into_iter().collect();
    order.sort_by_key(|&(name, pos)| (pos, name));

    let mut rename_map = BTreeMap::new();
    let (mut next_var, mut next_func) = (1usize, 1usize);
    for (name, _) in order {
        let (prefix, counter) = if b.func_bound.contains(name) {
            ("func", &mut next_func)
        } else {
            ("var", &mut next_var)
        };
        let canonical = loop {
            let candidate = format!("{prefix}{counter}");
            *counter += 1;
            if !reserved.contains(candidate.as_str()) {
                break candidate;
            }
        };
        rename_map.insert(name.to_string(), canonical);
    }

    let mut edits: Vec<(Span, &str)> = b
        .occurrences
        .iter()
        .filter_map(|(name, span)| rename_map.get(name).map(|new| (*span, new.as_str())))
        .collect();
    edits.sort_by_key(|(span, _)| span.start);
    edits.dedup_by_key(|(span, _)| span.start);

    let mut out = String::with_capacity(source.len());
    let mut pos = 0;
    for (span, new) in edits {
        out.push_str(&source[pos..span.start]);
        out.push_str(new);
        pos = span.end;
    }
    out.push_str(&source[pos..]);
    NormalizedCode { source: out, rename_map, compile_ok: true }
}

/// Full normalization used before similarity comparisons: noise stripping,
/// canonical layout, then identifier standardization.
pub fn normalize(source: &str, denylist: &Denylist) -> Result<NormalizedCode, CompileError> {
    let canonical = purify(source, denylist)?;
    standardize_identifiers(&canonical)
}
