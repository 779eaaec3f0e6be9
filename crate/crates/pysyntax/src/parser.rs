//! Recursive-descent parser producing [`Module`] trees.
//!
//! The grammar follows Python 3.10 minus `match` statements. Operator
//! precedence mirrors the reference grammar exactly so that printing a tree
//! with minimal parentheses and re-parsing it is the identity on trees.

use crate::ast::*;
use crate::error::{SyntaxError, SyntaxErrorKind};
use crate::lexer::{Lexer, Span, Token, TokenKind};

type PResult<T> = Result<T, SyntaxError>;

const AUG_ASSIGN: &[&str] = &[
    "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@=",
];

/// Parses a whole module.
pub fn parse_module(src: &str) -> PResult<Module> {
    let tokens = Lexer::new(src).tokenize()?;
    let mut parser = Parser::new(tokens);
    parser.module()
}

/// Parses a single expression (the body of an `eval`-style input).
pub fn parse_expression(src: &str) -> PResult<Expr> {
    let tokens = Lexer::new(src).bracketed().tokenize()?;
    let mut parser = Parser::new(tokens);
    let expr = parser.star_testlist()?;
    parser.expect_end()?;
    Ok(expr)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TargetKind {
    /// Assignment, `for`, comprehension and `with` targets.
    Assign,
    /// Augmented and annotated assignment.
    Single,
    Del,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        let tokens = tokens
            .into_iter()
            .filter(|t| !matches!(t.kind, TokenKind::Comment | TokenKind::Nl))
            .collect();
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &Token {
        self.peek_n(0)
    }

    fn peek_n(&self, n: usize) -> &Token {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_op(op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_keyword(kw)
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            kind: SyntaxErrorKind::Parse,
            message: message.into(),
            line: tok.line,
            col: tok.col,
            offset: tok.span.start,
        }
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        self.error_at(self.peek(), message)
    }

    fn unexpected(&self) -> SyntaxError {
        let tok = self.peek();
        let what = match tok.kind {
            TokenKind::Newline => "unexpected end of line".to_string(),
            TokenKind::EndMarker => "unexpected end of input".to_string(),
            TokenKind::Indent => "unexpected indent".to_string(),
            TokenKind::Dedent => "unexpected dedent".to_string(),
            _ => format!("invalid syntax near {:?}", tok.text),
        };
        self.error(what)
    }

    fn expect_op(&mut self, op: &str) -> PResult<Token> {
        if self.at_op(op) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.at_kw(kw) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected '{kw}'")))
        }
    }

    fn expect_name(&mut self) -> PResult<Ident> {
        if self.at_kind(TokenKind::Name) {
            let tok = self.advance();
            Ok(Ident::new(tok.text, tok.span))
        } else {
            Err(self.error("expected a name"))
        }
    }

    fn expect_end(&mut self) -> PResult<()> {
        while matches!(
            self.peek().kind,
            TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent
        ) {
            self.advance();
        }
        if self.at_kind(TokenKind::EndMarker) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    // ---- statements -------------------------------------------------

    fn module(&mut self) -> PResult<Module> {
        let mut body = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::EndMarker => break,
                TokenKind::Newline => {
                    self.advance();
                }
                TokenKind::Indent => return Err(self.error("unexpected indent")),
                _ => body.extend(self.statement()?),
            }
        }
        Ok(Module { body })
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let tok = self.peek().clone();
        if tok.kind == TokenKind::Keyword {
            let stmt = match tok.text.as_str() {
                "if" => Some(self.if_stmt()?),
                "while" => Some(self.while_stmt()?),
                "for" => Some(self.for_stmt(false)?),
                "try" => Some(self.try_stmt()?),
                "with" => Some(self.with_stmt(false)?),
                "def" => Some(self.funcdef(Vec::new(), false)?),
                "class" => Some(self.classdef(Vec::new())?),
                "async" => Some(self.async_stmt(Vec::new())?),
                _ => None,
            };
            if let Some(stmt) = stmt {
                return Ok(vec![stmt]);
            }
        }
        if tok.is_op("@") {
            return Ok(vec![self.decorated()?]);
        }
        let start = self.pos;
        match self.simple_stmts() {
            Ok(stmts) => Ok(stmts),
            Err(err) => {
                let first = &self.tokens[start];
                if first.kind == TokenKind::Name && first.text == "match" {
                    Err(SyntaxError {
                        kind: SyntaxErrorKind::Unsupported,
                        message: "match statements are not supported".into(),
                        line: first.line,
                        col: first.col,
                        offset: first.span.start,
                    })
                } else {
                    Err(err)
                }
            }
        }
    }

    fn async_stmt(&mut self, decorators: Vec<Expr>) -> PResult<Stmt> {
        self.expect_kw("async")?;
        if self.at_kw("def") {
            self.funcdef(decorators, true)
        } else if !decorators.is_empty() {
            Err(self.error("expected 'def' after decorators"))
        } else if self.at_kw("for") {
            self.for_stmt(true)
        } else if self.at_kw("with") {
            self.with_stmt(true)
        } else {
            Err(self.error("expected 'def', 'for' or 'with' after 'async'"))
        }
    }

    fn decorated(&mut self) -> PResult<Stmt> {
        let mut decorators = Vec::new();
        while self.eat_op("@") {
            decorators.push(self.named()?);
            if !self.at_kind(TokenKind::Newline) {
                return Err(self.error("expected newline after decorator"));
            }
            self.advance();
        }
        if self.at_kw("def") {
            self.funcdef(decorators, false)
        } else if self.at_kw("class") {
            self.classdef(decorators)
        } else if self.at_kw("async") {
            self.async_stmt(decorators)
        } else {
            Err(self.error("expected 'def' or 'class' after decorators"))
        }
    }

    fn simple_stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut stmts = vec![self.small_stmt()?];
        while self.eat_op(";") {
            if self.at_kind(TokenKind::Newline) || self.at_kind(TokenKind::EndMarker) {
                break;
            }
            stmts.push(self.small_stmt()?);
        }
        match self.peek().kind {
            TokenKind::Newline => {
                self.advance();
                Ok(stmts)
            }
            TokenKind::EndMarker => Ok(stmts),
            _ => Err(self.unexpected()),
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if !self.at_kind(TokenKind::Newline) {
            return self.simple_stmts();
        }
        self.advance();
        if !self.at_kind(TokenKind::Indent) {
            return Err(self.error("expected an indented block"));
        }
        self.advance();
        let mut body = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Dedent => {
                    self.advance();
                    break;
                }
                TokenKind::EndMarker => break,
                TokenKind::Indent => return Err(self.error("unexpected indent")),
                _ => body.extend(self.statement()?),
            }
        }
        if body.is_empty() {
            return Err(self.error("expected an indented block"));
        }
        Ok(body)
    }

    fn at_stmt_end(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Newline | TokenKind::EndMarker) || self.at_op(";")
    }

    fn small_stmt(&mut self) -> PResult<Stmt> {
        let tok = self.peek().clone();
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "pass" => {
                    self.advance();
                    return Ok(Stmt::Pass);
                }
                "break" => {
                    self.advance();
                    return Ok(Stmt::Break);
                }
                "continue" => {
                    self.advance();
                    return Ok(Stmt::Continue);
                }
                "return" => {
                    self.advance();
                    let value = if self.at_stmt_end() {
                        None
                    } else {
                        Some(self.star_testlist()?)
                    };
                    return Ok(Stmt::Return(value));
                }
                "raise" => {
                    self.advance();
                    if self.at_stmt_end() {
                        return Ok(Stmt::Raise { exc: None, cause: None });
                    }
                    let exc = self.test()?;
                    let cause = if self.eat_kw("from") {
                        Some(self.test()?)
                    } else {
                        None
                    };
                    return Ok(Stmt::Raise { exc: Some(exc), cause });
                }
                "global" | "nonlocal" => {
                    self.advance();
                    let mut names = vec![self.expect_name()?];
                    while self.eat_op(",") {
                        names.push(self.expect_name()?);
                    }
                    return Ok(if tok.text == "global" {
                        Stmt::Global(names)
                    } else {
                        Stmt::Nonlocal(names)
                    });
                }
                "del" => {
                    self.advance();
                    let mut targets = Vec::new();
                    loop {
                        let target = self.bitor()?;
                        self.check_target(&target, TargetKind::Del)?;
                        targets.push(target);
                        if !self.eat_op(",") || self.at_stmt_end() {
                            break;
                        }
                    }
                    return Ok(Stmt::Del(targets));
                }
                "assert" => {
                    self.advance();
                    let test = self.test()?;
                    let msg = if self.eat_op(",") { Some(self.test()?) } else { None };
                    return Ok(Stmt::Assert { test, msg });
                }
                "import" => {
                    self.advance();
                    let mut names = Vec::new();
                    loop {
                        let name = self.dotted_name()?;
                        let asname = if self.eat_kw("as") {
                            Some(self.expect_name()?.name)
                        } else {
                            None
                        };
                        names.push(Alias { name, asname });
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    return Ok(Stmt::Import(names));
                }
                "from" => return self.import_from(),
                _ => {}
            }
        }
        self.expr_stmt()
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut name = self.expect_name()?.name;
        while self.at_op(".") && self.peek_n(1).kind == TokenKind::Name {
            self.advance();
            name.push('.');
            name.push_str(&self.expect_name()?.name);
        }
        Ok(name)
    }

    fn import_from(&mut self) -> PResult<Stmt> {
        self.expect_kw("from")?;
        let mut level = 0;
        loop {
            if self.eat_op(".") {
                level += 1;
            } else if self.eat_op("...") {
                level += 3;
            } else {
                break;
            }
        }
        let module = if self.at_kw("import") {
            if level == 0 {
                return Err(self.error("expected module name"));
            }
            None
        } else {
            Some(self.dotted_name()?)
        };
        self.expect_kw("import")?;
        let mut names = Vec::new();
        if self.eat_op("*") {
            names.push(Alias { name: "*".into(), asname: None });
            return Ok(Stmt::ImportFrom { level, module, names });
        }
        let parenthesized = self.eat_op("(");
        loop {
            if parenthesized && self.at_op(")") {
                break;
            }
            let name = self.expect_name()?.name;
            let asname = if self.eat_kw("as") {
                Some(self.expect_name()?.name)
            } else {
                None
            };
            names.push(Alias { name, asname });
            if !self.eat_op(",") {
                break;
            }
            if !parenthesized && self.at_stmt_end() {
                return Err(self.error("trailing comma not allowed without surrounding parentheses"));
            }
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        if names.is_empty() {
            return Err(self.error("expected names to import"));
        }
        Ok(Stmt::ImportFrom { level, module, names })
    }

    fn expr_stmt(&mut self) -> PResult<Stmt> {
        let first = self.yield_or_star_testlist()?;
        if self.at_op(":") {
            self.advance();
            self.check_target(&first, TargetKind::Single)?;
            let annotation = self.test()?;
            let value = if self.eat_op("=") {
                Some(self.yield_or_star_testlist()?)
            } else {
                None
            };
            return Ok(Stmt::AnnAssign { target: first, annotation, value });
        }
        if self.peek().kind == TokenKind::Op && AUG_ASSIGN.contains(&self.peek().text.as_str()) {
            let tok = self.advance();
            self.check_target(&first, TargetKind::Single)?;
            let op = BinOp::from_symbol(&tok.text[..tok.text.len() - 1])
                .ok_or_else(|| self.error_at(&tok, "bad augmented assignment"))?;
            let value = self.yield_or_star_testlist()?;
            return Ok(Stmt::AugAssign { target: first, op, value });
        }
        if self.at_op("=") {
            self.check_target(&first, TargetKind::Assign)?;
            let mut targets = vec![first];
            let value = loop {
                self.advance();
                let next = self.yield_or_star_testlist()?;
                if self.at_op("=") {
                    self.check_target(&next, TargetKind::Assign)?;
                    targets.push(next);
                } else {
                    break next;
                }
            };
            return Ok(Stmt::Assign { targets, value });
        }
        Ok(Stmt::Expr(first))
    }

    fn check_target(&self, expr: &Expr, kind: TargetKind) -> PResult<()> {
        match expr {
            Expr::Name(_) | Expr::Attribute { .. } | Expr::Subscript { .. } => Ok(()),
            Expr::Tuple(elts) | Expr::List(elts) if kind != TargetKind::Single => {
                for elt in elts {
                    match elt {
                        Expr::Starred(inner) if kind == TargetKind::Assign => {
                            self.check_target(inner, kind)?
                        }
                        other => self.check_target(other, kind)?,
                    }
                }
                Ok(())
            }
            _ => Err(self.error("cannot assign to expression")),
        }
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        self.advance(); // `if` or `elif`
        let test = self.named()?;
        let body = self.block()?;
        let orelse = if self.at_kw("elif") {
            vec![self.if_stmt()?]
        } else if self.eat_kw("else") {
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt::If { test, body, orelse })
    }

    fn while_stmt(&mut self) -> PResult<Stmt> {
        self.expect_kw("while")?;
        let test = self.named()?;
        let body = self.block()?;
        let orelse = if self.eat_kw("else") { self.block()? } else { Vec::new() };
        Ok(Stmt::While { test, body, orelse })
    }

    fn for_stmt(&mut self, is_async: bool) -> PResult<Stmt> {
        self.expect_kw("for")?;
        let target = self.target_list()?;
        self.expect_kw("in")?;
        let iter = self.star_testlist()?;
        let body = self.block()?;
        let orelse = if self.eat_kw("else") { self.block()? } else { Vec::new() };
        Ok(Stmt::For { is_async, target, iter, body, orelse })
    }

    fn try_stmt(&mut self) -> PResult<Stmt> {
        self.expect_kw("try")?;
        let body = self.block()?;
        let mut handlers = Vec::new();
        while self.eat_kw("except") {
            let star = self.eat_op("*");
            let (typ, name) = if self.at_op(":") {
                (None, None)
            } else {
                let typ = self.test()?;
                let name = if self.eat_kw("as") { Some(self.expect_name()?) } else { None };
                (Some(typ), name)
            };
            let body = self.block()?;
            handlers.push(ExceptHandler { star, typ, name, body });
        }
        let orelse = if !handlers.is_empty() && self.eat_kw("else") {
            self.block()?
        } else {
            Vec::new()
        };
        let finalbody = if self.eat_kw("finally") { self.block()? } else { Vec::new() };
        if handlers.is_empty() && finalbody.is_empty() {
            return Err(self.error("expected 'except' or 'finally' block"));
        }
        Ok(Stmt::Try { body, handlers, orelse, finalbody })
    }

    fn with_stmt(&mut self, is_async: bool) -> PResult<Stmt> {
        self.expect_kw("with")?;
        let items = if self.at_op("(") {
            let save = self.pos;
            match self.parenthesized_with_items() {
                Ok(items) => items,
                Err(_) => {
                    self.pos = save;
                    self.with_items()?
                }
            }
        } else {
            self.with_items()?
        };
        let body = self.block()?;
        Ok(Stmt::With { is_async, items, body })
    }

    fn parenthesized_with_items(&mut self) -> PResult<Vec<WithItem>> {
        self.expect_op("(")?;
        let mut items = Vec::new();
        loop {
            if self.at_op(")") && !items.is_empty() {
                break;
            }
            items.push(self.with_item()?);
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if !self.at_op(":") {
            return Err(self.error("expected ':'"));
        }
        Ok(items)
    }

    fn with_items(&mut self) -> PResult<Vec<WithItem>> {
        let mut items = vec![self.with_item()?];
        while self.eat_op(",") {
            items.push(self.with_item()?);
        }
        Ok(items)
    }

    fn with_item(&mut self) -> PResult<WithItem> {
        let context = self.test()?;
        let vars = if self.eat_kw("as") {
            let target = self.star_or_bitor()?;
            self.check_target(&target, TargetKind::Assign)?;
            Some(target)
        } else {
            None
        };
        Ok(WithItem { context, vars })
    }

    fn funcdef(&mut self, decorators: Vec<Expr>, is_async: bool) -> PResult<Stmt> {
        self.expect_kw("def")?;
        let name = self.expect_name()?;
        self.expect_op("(")?;
        let params = self.params(true, ")")?;
        self.expect_op(")")?;
        let returns = if self.eat_op("->") { Some(self.test()?) } else { None };
        let body = self.block()?;
        Ok(Stmt::FunctionDef(Box::new(FunctionDef {
            is_async,
            decorators,
            name,
            params,
            returns,
            body,
        })))
    }

    fn classdef(&mut self, decorators: Vec<Expr>) -> PResult<Stmt> {
        self.expect_kw("class")?;
        let name = self.expect_name()?;
        let bases = if self.eat_op("(") { self.call_args()? } else { Vec::new() };
        let body = self.block()?;
        Ok(Stmt::ClassDef(Box::new(ClassDef { decorators, name, bases, body })))
    }

    fn params(&mut self, typed: bool, terminator: &str) -> PResult<Params> {
        let mut params = Params::default();
        let mut seen_star = false;
        let mut seen_default = false;
        loop {
            if self.at_op(terminator) {
                break;
            }
            if self.at_op("/") {
                let tok = self.advance();
                if seen_star || !params.posonly.is_empty() || params.args.is_empty() {
                    return Err(self.error_at(&tok, "invalid '/' in parameter list"));
                }
                params.posonly = std::mem::take(&mut params.args);
            } else if self.eat_op("*") {
                if seen_star {
                    return Err(self.error("duplicate '*' in parameter list"));
                }
                seen_star = true;
                if !self.at_op(",") && !self.at_op(terminator) {
                    let name = self.expect_name()?;
                    let annotation = if typed && self.eat_op(":") { Some(self.test()?) } else { None };
                    params.vararg = Some(Param { name, annotation, default: None });
                }
            } else if self.eat_op("**") {
                let name = self.expect_name()?;
                let annotation = if typed && self.eat_op(":") { Some(self.test()?) } else { None };
                params.kwarg = Some(Param { name, annotation, default: None });
                self.eat_op(",");
                break;
            } else {
                let name = self.expect_name()?;
                let annotation = if typed && self.eat_op(":") { Some(self.test()?) } else { None };
                let default = if self.eat_op("=") { Some(self.test()?) } else { None };
                if seen_star {
                    params.kwonly.push(Param { name, annotation, default });
                } else {
                    if default.is_some() {
                        seen_default = true;
                    } else if seen_default {
                        return Err(self.error("non-default argument follows default argument"));
                    }
                    params.args.push(Param { name, annotation, default });
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        if seen_star && params.vararg.is_none() && params.kwonly.is_empty() {
            return Err(self.error("named arguments must follow bare *"));
        }
        Ok(params)
    }

    // ---- expressions ------------------------------------------------

    fn starts_expr(&self) -> bool {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Name | TokenKind::Number | TokenKind::String | TokenKind::FString => true,
            TokenKind::Keyword => matches!(
                tok.text.as_str(),
                "lambda" | "not" | "await" | "True" | "False" | "None" | "yield"
            ),
            TokenKind::Op => matches!(
                tok.text.as_str(),
                "(" | "[" | "{" | "-" | "+" | "~" | "*" | "..."
            ),
            _ => false,
        }
    }

    fn yield_or_star_testlist(&mut self) -> PResult<Expr> {
        if self.at_kw("yield") {
            self.yield_expr()
        } else {
            self.star_testlist()
        }
    }

    fn yield_expr(&mut self) -> PResult<Expr> {
        self.expect_kw("yield")?;
        if self.eat_kw("from") {
            return Ok(Expr::YieldFrom(self.test()?.boxed()));
        }
        if self.starts_expr() {
            Ok(Expr::Yield(Some(self.star_testlist()?.boxed())))
        } else {
            Ok(Expr::Yield(None))
        }
    }

    fn star_testlist(&mut self) -> PResult<Expr> {
        let first = self.star_or_named()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut elts = vec![first];
        while self.eat_op(",") {
            if !self.starts_expr() {
                break;
            }
            elts.push(self.star_or_named()?);
        }
        Ok(Expr::Tuple(elts))
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let first = self.star_or_bitor()?;
        let target = if self.at_op(",") {
            let mut elts = vec![first];
            while self.eat_op(",") {
                if !self.starts_expr() {
                    break;
                }
                elts.push(self.star_or_bitor()?);
            }
            Expr::Tuple(elts)
        } else {
            first
        };
        self.check_target(&target, TargetKind::Assign)?;
        Ok(target)
    }

    fn star_or_bitor(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            Ok(Expr::Starred(self.bitor()?.boxed()))
        } else {
            self.bitor()
        }
    }

    fn star_or_named(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            Ok(Expr::Starred(self.bitor()?.boxed()))
        } else {
            self.named()
        }
    }

    fn named(&mut self) -> PResult<Expr> {
        if self.at_kind(TokenKind::Name) && self.peek_n(1).is_op(":=") {
            let target = self.expect_name()?;
            self.advance();
            let value = self.test()?;
            return Ok(Expr::NamedExpr { target, value: value.boxed() });
        }
        self.test()
    }

    fn test(&mut self) -> PResult<Expr> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        let body = self.or_test()?;
        if self.eat_kw("if") {
            let test = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(Expr::IfExp {
                test: test.boxed(),
                body: body.boxed(),
                orelse: orelse.boxed(),
            });
        }
        Ok(body)
    }

    fn lambda(&mut self) -> PResult<Expr> {
        self.expect_kw("lambda")?;
        let params = self.params(false, ":")?;
        self.expect_op(":")?;
        let body = self.test()?;
        Ok(Expr::Lambda { params: Box::new(params), body: body.boxed() })
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let first = self.and_test()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw("or") {
            values.push(self.and_test()?);
        }
        Ok(Expr::BoolOp { op: BoolOp::Or, values })
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let first = self.not_test()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw("and") {
            values.push(self.not_test()?);
        }
        Ok(Expr::BoolOp { op: BoolOp::And, values })
    }

    fn not_test(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            let operand = self.not_test()?;
            return Ok(Expr::UnaryOp { op: UnaryOp::Not, operand: operand.boxed() });
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<CmpOp> {
        let tok = self.peek();
        let op = match (tok.kind, tok.text.as_str()) {
            (TokenKind::Op, "<") => CmpOp::Lt,
            (TokenKind::Op, ">") => CmpOp::Gt,
            (TokenKind::Op, "==") => CmpOp::Eq,
            (TokenKind::Op, ">=") => CmpOp::GtE,
            (TokenKind::Op, "<=") => CmpOp::LtE,
            (TokenKind::Op, "!=") => CmpOp::NotEq,
            (TokenKind::Keyword, "in") => CmpOp::In,
            (TokenKind::Keyword, "not") if self.peek_n(1).is_keyword("in") => {
                self.advance();
                CmpOp::NotIn
            }
            (TokenKind::Keyword, "is") => {
                if self.peek_n(1).is_keyword("not") {
                    self.advance();
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            }
            _ => return None,
        };
        self.advance();
        Some(op)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let left = self.bitor()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        while let Some(op) = self.comp_op() {
            ops.push(op);
            comparators.push(self.bitor()?);
        }
        if ops.is_empty() {
            Ok(left)
        } else {
            Ok(Expr::Compare { left: left.boxed(), ops, comparators })
        }
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut left = next(self)?;
        loop {
            let tok = self.peek();
            if tok.kind != TokenKind::Op || !ops.contains(&tok.text.as_str()) {
                break;
            }
            let op = BinOp::from_symbol(&self.advance().text).expect("listed operator");
            let right = next(self)?;
            left = Expr::BinOp { left: left.boxed(), op, right: right.boxed() };
        }
        Ok(left)
    }

    fn bitor(&mut self) -> PResult<Expr> {
        self.binary_level(&["|"], Self::bitxor)
    }

    fn bitxor(&mut self) -> PResult<Expr> {
        self.binary_level(&["^"], Self::bitand)
    }

    fn bitand(&mut self) -> PResult<Expr> {
        self.binary_level(&["&"], Self::shift)
    }

    fn shift(&mut self) -> PResult<Expr> {
        self.binary_level(&["<<", ">>"], Self::arith)
    }

    fn arith(&mut self) -> PResult<Expr> {
        self.binary_level(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary_level(&["*", "/", "//", "%", "@"], Self::factor)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let op = match self.peek().text.as_str() {
            "-" if self.at_kind(TokenKind::Op) => Some(UnaryOp::Neg),
            "+" if self.at_kind(TokenKind::Op) => Some(UnaryOp::Pos),
            "~" if self.at_kind(TokenKind::Op) => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.factor()?;
            return Ok(Expr::UnaryOp { op, operand: operand.boxed() });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = if self.eat_kw("await") {
            Expr::Await(self.primary()?.boxed())
        } else {
            self.primary()?
        };
        if self.eat_op("**") {
            let exponent = self.factor()?;
            return Ok(Expr::BinOp { left: base.boxed(), op: BinOp::Pow, right: exponent.boxed() });
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut expr = self.atom()?;
        loop {
            if self.eat_op("(") {
                let args = self.call_args()?;
                expr = Expr::Call { func: expr.boxed(), args };
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                expr = Expr::Subscript { value: expr.boxed(), index: index.boxed() };
            } else if self.at_op(".") {
                self.advance();
                let attr = self.expect_name()?.name;
                expr = Expr::Attribute { value: expr.boxed(), attr };
            } else {
                break;
            }
        }
        Ok(expr)
    }

    /// Parses call arguments after the opening parenthesis, consuming `)`.
    fn call_args(&mut self) -> PResult<Vec<Arg>> {
        let mut args = Vec::new();
        loop {
            if self.at_op(")") {
                break;
            }
            if self.eat_op("*") {
                args.push(Arg::Starred(self.test()?));
            } else if self.eat_op("**") {
                args.push(Arg::DoubleStarred(self.test()?));
            } else if self.at_kind(TokenKind::Name) && self.peek_n(1).is_op("=") {
                let name = self.advance().text;
                self.advance();
                args.push(Arg::Keyword { name, value: self.test()? });
            } else {
                let value = self.named()?;
                if self.at_comp_for() {
                    let generators = self.comp_for()?;
                    args.push(Arg::Positional(Expr::GeneratorExp { elt: value.boxed(), generators }));
                } else {
                    args.push(Arg::Positional(value));
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        Ok(args)
    }

    fn subscript_list(&mut self) -> PResult<Expr> {
        let first = self.subscript()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut elts = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            elts.push(self.subscript()?);
        }
        Ok(Expr::Tuple(elts))
    }

    fn subscript(&mut self) -> PResult<Expr> {
        let lower = if self.at_op(":") {
            None
        } else {
            let expr = self.star_or_named()?;
            if !self.at_op(":") {
                return Ok(expr);
            }
            Some(expr.boxed())
        };
        self.expect_op(":")?;
        let bound_end = |p: &Self| p.at_op(":") || p.at_op(",") || p.at_op("]");
        let upper = if bound_end(self) { None } else { Some(self.test()?.boxed()) };
        let step = if self.eat_op(":") {
            if self.at_op(",") || self.at_op("]") {
                None
            } else {
                Some(self.test()?.boxed())
            }
        } else {
            None
        };
        Ok(Expr::Slice { lower, upper, step })
    }

    fn at_comp_for(&self) -> bool {
        self.at_kw("for") || (self.at_kw("async") && self.peek_n(1).is_keyword("for"))
    }

    fn comp_for(&mut self) -> PResult<Vec<Comprehension>> {
        let mut generators = Vec::new();
        while self.at_comp_for() {
            let is_async = self.eat_kw("async");
            self.expect_kw("for")?;
            let target = self.target_list()?;
            self.expect_kw("in")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat_kw("if") {
                ifs.push(self.or_test()?);
            }
            generators.push(Comprehension { is_async, target, iter, ifs });
        }
        Ok(generators)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Name => {
                self.advance();
                Ok(Expr::Name(Ident::new(tok.text, tok.span)))
            }
            TokenKind::Number => {
                self.advance();
                Ok(Expr::Num(tok.text))
            }
            TokenKind::String | TokenKind::FString => {
                let mut parts = Vec::new();
                while matches!(self.peek().kind, TokenKind::String | TokenKind::FString) {
                    let tok = self.advance();
                    if tok.kind == TokenKind::FString {
                        parts.push(StrPart::Formatted(parse_fstring(&tok)?));
                    } else {
                        parts.push(StrPart::Plain(tok.text));
                    }
                }
                Ok(Expr::Str(parts))
            }
            TokenKind::Keyword => match tok.text.as_str() {
                "True" => {
                    self.advance();
                    Ok(Expr::Const(Constant::True))
                }
                "False" => {
                    self.advance();
                    Ok(Expr::Const(Constant::False))
                }
                "None" => {
                    self.advance();
                    Ok(Expr::Const(Constant::None))
                }
                _ => Err(self.unexpected()),
            },
            TokenKind::Op => match tok.text.as_str() {
                "..." => {
                    self.advance();
                    Ok(Expr::Const(Constant::Ellipsis))
                }
                "(" => self.paren_atom(),
                "[" => self.list_atom(),
                "{" => self.brace_atom(),
                _ => Err(self.unexpected()),
            },
            _ => Err(self.unexpected()),
        }
    }

    fn paren_atom(&mut self) -> PResult<Expr> {
        self.expect_op("(")?;
        if self.eat_op(")") {
            return Ok(Expr::Tuple(Vec::new()));
        }
        if self.at_kw("yield") {
            let expr = self.yield_expr()?;
            self.expect_op(")")?;
            return Ok(expr);
        }
        let first = self.star_or_named()?;
        if self.at_comp_for() {
            let generators = self.comp_for()?;
            self.expect_op(")")?;
            return Ok(Expr::GeneratorExp { elt: first.boxed(), generators });
        }
        if self.at_op(",") {
            let mut elts = vec![first];
            while self.eat_op(",") {
                if self.at_op(")") {
                    break;
                }
                elts.push(self.star_or_named()?);
            }
            self.expect_op(")")?;
            return Ok(Expr::Tuple(elts));
        }
        self.expect_op(")")?;
        if matches!(first, Expr::Starred(_)) {
            return Err(self.error("cannot use starred expression here"));
        }
        Ok(first)
    }

    fn list_atom(&mut self) -> PResult<Expr> {
        self.expect_op("[")?;
        if self.eat_op("]") {
            return Ok(Expr::List(Vec::new()));
        }
        let first = self.star_or_named()?;
        if self.at_comp_for() {
            let generators = self.comp_for()?;
            self.expect_op("]")?;
            return Ok(Expr::ListComp { elt: first.boxed(), generators });
        }
        let mut elts = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            elts.push(self.star_or_named()?);
        }
        self.expect_op("]")?;
        Ok(Expr::List(elts))
    }

    fn brace_atom(&mut self) -> PResult<Expr> {
        self.expect_op("{")?;
        if self.eat_op("}") {
            return Ok(Expr::Dict(Vec::new()));
        }
        let first_item = if self.eat_op("**") {
            DictItem::Unpack(self.bitor()?)
        } else {
            let first = self.star_or_named()?;
            if !self.eat_op(":") {
                return self.set_rest(first);
            }
            let value = self.test()?;
            if self.at_comp_for() {
                let generators = self.comp_for()?;
                self.expect_op("}")?;
                return Ok(Expr::DictComp { key: first.boxed(), value: value.boxed(), generators });
            }
            DictItem::KeyValue(first, value)
        };
        let mut items = vec![first_item];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            if self.eat_op("**") {
                items.push(DictItem::Unpack(self.bitor()?));
            } else {
                let key = self.test()?;
                self.expect_op(":")?;
                let value = self.test()?;
                items.push(DictItem::KeyValue(key, value));
            }
        }
        self.expect_op("}")?;
        Ok(Expr::Dict(items))
    }

    fn set_rest(&mut self, first: Expr) -> PResult<Expr> {
        if self.at_comp_for() {
            let generators = self.comp_for()?;
            self.expect_op("}")?;
            return Ok(Expr::SetComp { elt: first.boxed(), generators });
        }
        let mut elts = vec![first];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            elts.push(self.star_or_named()?);
        }
        self.expect_op("}")?;
        Ok(Expr::Set(elts))
    }
}

// ---- f-strings ------------------------------------------------------

fn fstring_error(offset: usize, tok: &Token, message: &str) -> SyntaxError {
    SyntaxError {
        kind: SyntaxErrorKind::Parse,
        message: format!("f-string: {message}"),
        line: tok.line,
        col: tok.col,
        offset,
    }
}

fn parse_fstring(tok: &Token) -> PResult<FString> {
    let text = tok.text.as_str();
    let quote_at = text
        .find(['"', '\''])
        .ok_or_else(|| fstring_error(tok.span.start, tok, "missing quote"))?;
    let prefix = text[..quote_at].to_string();
    let rest = &text[quote_at..];
    let q = &rest[..1];
    let quote = if rest.len() >= 6 && rest.starts_with(&q.repeat(3)) {
        q.repeat(3)
    } else {
        q.to_string()
    };
    if text.len() < quote_at + 2 * quote.len() || !text.ends_with(&quote) {
        return Err(fstring_error(tok.span.start, tok, "unterminated string"));
    }
    let body_start = quote_at + quote.len();
    let body = &text[body_start..text.len() - quote.len()];
    let raw = prefix.to_ascii_lowercase().contains('r');
    let parts = FStringScanner { body, base: tok.span.start + body_start, raw, tok }.parts(false)?;
    Ok(FString { prefix, quote, parts })
}

struct FStringScanner<'a> {
    body: &'a str,
    base: usize,
    raw: bool,
    tok: &'a Token,
}

impl FStringScanner<'_> {
    fn err(&self, at: usize, message: &str) -> SyntaxError {
        fstring_error(self.base + at, self.tok, message)
    }

    fn parts(&self, in_spec: bool) -> PResult<Vec<FPart>> {
        let bytes = self.body.as_bytes();
        let mut parts = Vec::new();
        let mut literal_start = 0;
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') && !in_spec => i += 2,
                b'{' => {
                    if literal_start < i {
                        parts.push(FPart::Literal(self.body[literal_start..i].to_string()));
                    }
                    let (field, end) = self.field(i + 1)?;
                    parts.push(FPart::Field(Box::new(field)));
                    i = end;
                    literal_start = end;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') && !in_spec => i += 2,
                b'}' => return Err(self.err(i, "single '}' is not allowed")),
                b'\\' if !self.raw => {
                    if bytes.get(i + 1) == Some(&b'N') && bytes.get(i + 2) == Some(&b'{') {
                        let close = self.body[i..]
                            .find('}')
                            .ok_or_else(|| self.err(i, "malformed \\N escape"))?;
                        i += close + 1;
                    } else {
                        i += 2;
                    }
                }
                _ => i += 1,
            }
        }
        if literal_start < bytes.len() {
            parts.push(FPart::Literal(self.body[literal_start..].to_string()));
        }
        Ok(parts)
    }

    /// Scans a replacement field starting just after `{`. Returns the field
    /// and the index just after its closing `}`.
    fn field(&self, start: usize) -> PResult<(FField, usize)> {
        let bytes = self.body.as_bytes();
        let mut depth = 0usize;
        let mut i = start;
        let mut expr_end = None;
        let mut debug = None;
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                b'\'' | b'"' => {
                    i = self.skip_string(i)?;
                    continue;
                }
                b'(' | b'[' | b'{' => depth += 1,
                b')' | b']' if depth > 0 => depth -= 1,
                b'}' if depth > 0 => depth -= 1,
                b'}' | b':' if depth == 0 => {
                    expr_end = Some(i);
                    break;
                }
                b'!' if depth == 0 && bytes.get(i + 1) != Some(&b'=') => {
                    expr_end = Some(i);
                    break;
                }
                b'=' if depth == 0 => {
                    let prev = if i > start { bytes[i - 1] } else { b' ' };
                    let next = bytes.get(i + 1).copied();
                    let is_operator = matches!(prev, b'=' | b'!' | b'<' | b'>') || next == Some(b'=');
                    if !is_operator {
                        let after = self.body[i + 1..]
                            .find(|ch: char| !ch.is_whitespace())
                            .map(|k| i + 1 + k)
                            .unwrap_or(bytes.len());
                        if matches!(bytes.get(after), Some(b'}') | Some(b'!') | Some(b':')) {
                            let trimmed_end = self.body[..i].trim_end().len().max(start);
                            debug = Some(self.body[start..after].to_string());
                            expr_end = Some(trimmed_end);
                            i = after;
                            break;
                        }
                    }
                }
                _ => {}
            }
            i += 1;
        }
        let expr_end = expr_end.ok_or_else(|| self.err(start, "expecting '}'"))?;
        let expr_text = &self.body[start..expr_end];
        if expr_text.trim().is_empty() {
            return Err(self.err(start, "empty expression not allowed"));
        }
        let expr = self.parse_field_expr(expr_text, start)?;
        if debug.is_none() {
            i = expr_end;
        }
        let mut conversion = None;
        if bytes.get(i) == Some(&b'!') {
            let conv = bytes.get(i + 1).copied().map(char::from);
            match conv {
                Some(c @ ('r' | 's' | 'a')) => conversion = Some(c),
                _ => return Err(self.err(i, "invalid conversion character")),
            }
            i += 2;
        }
        let mut spec = None;
        if bytes.get(i) == Some(&b':') {
            let spec_start = i + 1;
            let mut depth = 0usize;
            let mut j = spec_start;
            while j < bytes.len() {
                match bytes[j] {
                    b'{' => depth += 1,
                    b'}' if depth == 0 => break,
                    b'}' => depth -= 1,
                    _ => {}
                }
                j += 1;
            }
            let nested = FStringScanner {
                body: &self.body[spec_start..j],
                base: self.base + spec_start,
                raw: self.raw,
                tok: self.tok,
            };
            spec = Some(nested.parts(true)?);
            i = j;
        }
        if bytes.get(i) != Some(&b'}') {
            return Err(self.err(i.min(bytes.len()), "expecting '}'"));
        }
        Ok((FField { expr, debug, conversion, spec }, i + 1))
    }

    fn skip_string(&self, at: usize) -> PResult<usize> {
        let bytes = self.body.as_bytes();
        let q = bytes[at];
        let triple = bytes.get(at + 1) == Some(&q) && bytes.get(at + 2) == Some(&q);
        let mut i = at + if triple { 3 } else { 1 };
        while i < bytes.len() {
            if bytes[i] == b'\\' {
                i += 2;
                continue;
            }
            if bytes[i] == q {
                if !triple {
                    return Ok(i + 1);
                }
                if bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q) {
                    return Ok(i + 3);
                }
            }
            i += 1;
        }
        Err(self.err(at, "unterminated string in expression"))
    }

    fn parse_field_expr(&self, text: &str, start: usize) -> PResult<Expr> {
        let tokens = Lexer::new(text)
            .with_base(self.base + start)
            .bracketed()
            .tokenize()
            .map_err(|mut e| {
                e.line = self.tok.line;
                e.col = self.tok.col;
                e
            })?;
        let tokens: Vec<Token> = tokens
            .into_iter()
            .filter(|t| !matches!(t.kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent))
            .collect();
        let mut parser = Parser::new(tokens);
        let expr = if parser.at_kw("yield") {
            parser.yield_expr()?
        } else {
            parser.star_testlist()?
        };
        if !parser.at_kind(TokenKind::EndMarker) {
            return Err(self.err(start, "invalid expression"));
        }
        Ok(expr)
    }
}

impl Expr {
    /// Span of a name expression, if this is one.
    pub fn name_span(&self) -> Option<Span> {
        match self {
            Expr::Name(id) => Some(id.span),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Module {
        parse_module(src).unwrap_or_else(|e| panic!("{src:?}: {e}"))
    }

    #[test]
    fn parses_assignment_chain() {
        let m = parse("a = b = 1\n");
        match &m.body[0] {
            Stmt::Assign { targets, value } => {
                assert_eq!(targets.len(), 2);
                assert_eq!(value, &Expr::Num("1".into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bool_ops_flatten() {
        let m = parse("x = a or b or c\n");
        let Stmt::Assign { value, .. } = &m.body[0] else { panic!() };
        let Expr::BoolOp { values, .. } = value else { panic!() };
        assert_eq!(values.len(), 3);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let m = parse("-x ** 2\n");
        let Stmt::Expr(Expr::UnaryOp { op: UnaryOp::Neg, operand }) = &m.body[0] else {
            panic!("{:?}", m.body[0])
        };
        assert!(matches!(**operand, Expr::BinOp { op: BinOp::Pow, .. }));
    }

    #[test]
    fn elif_chain_nests() {
        let m = parse("if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n");
        let Stmt::If { orelse, .. } = &m.body[0] else { panic!() };
        assert!(matches!(orelse[0], Stmt::If { .. }));
    }

    #[test]
    fn fstring_fields_are_parsed() {
        let m = parse("print(f\"{a + 1!r:>{w}} and {b=}\")\n");
        let Stmt::Expr(Expr::Call { args, .. }) = &m.body[0] else { panic!() };
        let Arg::Positional(Expr::Str(parts)) = &args[0] else { panic!() };
        let StrPart::Formatted(fs) = &parts[0] else { panic!() };
        let fields: Vec<&FField> = fs
            .parts
            .iter()
            .filter_map(|p| match p {
                FPart::Field(f) => Some(&**f),
                _ => None,
            })
            .collect();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0].conversion, Some('r'));
        assert!(fields[0].spec.is_some());
        assert_eq!(fields[1].debug.as_deref(), Some("b="));
    }

    #[test]
    fn fstring_spans_are_absolute() {
        let src = "x = 1\ny = f'{x}'\n";
        let m = parse(src);
        let Stmt::Assign { value: Expr::Str(parts), .. } = &m.body[1] else { panic!() };
        let StrPart::Formatted(fs) = &parts[0] else { panic!() };
        let FPart::Field(field) = &fs.parts[0] else { panic!() };
        let span = field.expr.name_span().unwrap();
        assert_eq!(&src[span.start..span.end], "x");
    }

    #[test]
    fn syntax_errors() {
        for bad in ["def f(:\n    pass\n", "x = (1,\n", "1 = x\n", "if x\n    pass\n", "f() = 3\n", "x +\n"] {
            assert!(parse_module(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn parameters() {
        let m = parse("def f(a, b=1, /, c=2, *args, d, e=3, **kw) -> int:\n    return a\n");
        let Stmt::FunctionDef(def) = &m.body[0] else { panic!() };
        assert_eq!(def.params.posonly.len(), 2);
        assert_eq!(def.params.args.len(), 1);
        assert!(def.params.vararg.is_some());
        assert_eq!(def.params.kwonly.len(), 2);
        assert!(def.params.kwarg.is_some());
    }

    #[test]
    fn comprehensions_and_slices() {
        parse("y = [i * j for i in range(3) if i for j in range(i)]\nz = a[1:2, ::3]\nw = {k: v for k, v in d.items()}\n");
        parse("s = {x for x in y}\ng = sum(x for x in y)\n");
    }

    #[test]
    fn compound_statements() {
        parse(
            "try:\n    pass\nexcept (A, B) as e:\n    raise X from e\nelse:\n    pass\nfinally:\n    pass\n\
             with open(a) as f, open(b) as g:\n    pass\n\
             with (open(a) as f, open(b) as g):\n    pass\n\
             while x:\n    break\nelse:\n    pass\n\
             class A(B, metaclass=M):\n    x: int = 3\n\
             @dec\nasync def f():\n    await g()\n    async for i in h():\n        yield i\n",
        );
    }

    #[test]
    fn match_is_reported_as_unsupported() {
        let err = parse_module("match x:\n    case 1:\n        pass\n").unwrap_err();
        assert_eq!(err.kind, SyntaxErrorKind::Unsupported);
        parse("match = 3\nprint(match)\n");
    }
}
