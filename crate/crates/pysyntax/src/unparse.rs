//! Canonical printer.
//!
//! Output uses four-space indentation, one statement per line, single
//! spaces around binary operators and the minimum parentheses needed to
//! reproduce the same tree. Literals are printed with their source spelling.

use crate::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Tuple,
    Yield,
    Test,
    Or,
    And,
    Not,
    Cmp,
    BitOr,
    BitXor,
    BitAnd,
    Shift,
    Arith,
    Term,
    Factor,
    Power,
    Await,
    Atom,
}

impl Prec {
    fn next(self) -> Prec {
        use Prec::*;
        match self {
            Tuple => Yield,
            Yield => Test,
            Test => Or,
            Or => And,
            And => Not,
            Not => Cmp,
            Cmp => BitOr,
            BitOr => BitXor,
            BitXor => BitAnd,
            BitAnd => Shift,
            Shift => Arith,
            Arith => Term,
            Term => Factor,
            Factor => Power,
            Power => Await,
            Await | Atom => Atom,
        }
    }
}

fn binop_prec(op: BinOp) -> Prec {
    match op {
        BinOp::BitOr => Prec::BitOr,
        BinOp::BitXor => Prec::BitXor,
        BinOp::BitAnd => Prec::BitAnd,
        BinOp::LShift | BinOp::RShift => Prec::Shift,
        BinOp::Add | BinOp::Sub => Prec::Arith,
        BinOp::Mult | BinOp::MatMult | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => Prec::Term,
        BinOp::Pow => Prec::Power,
    }
}

/// Prints a module in canonical form. Lines are joined with `\n` and there
/// is no trailing newline.
pub fn unparse(module: &Module) -> String {
    let mut p = Printer::default();
    p.block(&module.body);
    p.lines.join("\n")
}

/// Prints one expression in canonical form.
pub fn unparse_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, Prec::Tuple, true);
    out
}

#[derive(Default)]
struct Printer {
    lines: Vec<String>,
    depth: usize,
}

impl Printer {
    fn line(&mut self, text: String) {
        let mut s = "    ".repeat(self.depth);
        s.push_str(&text);
        self.lines.push(s);
    }

    fn block(&mut self, body: &[Stmt]) {
        for stmt in body {
            self.stmt(stmt);
        }
    }

    fn suite(&mut self, header: String, body: &[Stmt]) {
        self.line(header);
        self.depth += 1;
        if body.is_empty() {
            self.line("pass".into());
        } else {
            self.block(body);
        }
        self.depth -= 1;
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Expr(e) => self.line(expr_yield_ok(e)),
            Stmt::Assign { targets, value } => {
                let mut s = String::new();
                for t in targets {
                    write_expr(&mut s, t, Prec::Tuple, false);
                    s.push_str(" = ");
                }
                s.push_str(&expr_yield_ok(value));
                self.line(s);
            }
            Stmt::AugAssign { target, op, value } => {
                let mut s = String::new();
                write_expr(&mut s, target, Prec::Tuple, false);
                s.push(' ');
                s.push_str(op.symbol());
                s.push_str("= ");
                s.push_str(&expr_yield_ok(value));
                self.line(s);
            }
            Stmt::AnnAssign { target, annotation, value } => {
                let mut s = String::new();
                write_expr(&mut s, target, Prec::Tuple, false);
                s.push_str(": ");
                write_expr(&mut s, annotation, Prec::Test, false);
                if let Some(v) = value {
                    s.push_str(" = ");
                    s.push_str(&expr_yield_ok(v));
                }
                self.line(s);
            }
            Stmt::Pass => self.line("pass".into()),
            Stmt::Break => self.line("break".into()),
            Stmt::Continue => self.line("continue".into()),
            Stmt::Return(value) => {
                let mut s = String::from("return");
                if let Some(v) = value {
                    s.push(' ');
                    write_star_exprs(&mut s, v);
                }
                self.line(s);
            }
            Stmt::Raise { exc, cause } => {
                let mut s = String::from("raise");
                if let Some(e) = exc {
                    s.push(' ');
                    write_expr(&mut s, e, Prec::Test, false);
                }
                if let Some(c) = cause {
                    s.push_str(" from ");
                    write_expr(&mut s, c, Prec::Test, false);
                }
                self.line(s);
            }
            Stmt::Global(names) | Stmt::Nonlocal(names) => {
                let kw = if matches!(stmt, Stmt::Global(_)) { "global" } else { "nonlocal" };
                let names: Vec<&str> = names.iter().map(|n| n.name.as_str()).collect();
                self.line(format!("{kw} {}", names.join(", ")));
            }
            Stmt::Del(targets) => {
                let mut s = String::from("del ");
                for (i, t) in targets.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    write_expr(&mut s, t, Prec::BitOr, false);
                }
                self.line(s);
            }
            Stmt::Assert { test, msg } => {
                let mut s = String::from("assert ");
                write_expr(&mut s, test, Prec::Test, false);
                if let Some(m) = msg {
                    s.push_str(", ");
                    write_expr(&mut s, m, Prec::Test, false);
                }
                self.line(s);
            }
            Stmt::Import(names) => self.line(format!("import {}", aliases(names))),
            Stmt::ImportFrom { level, module, names } => {
                let mut s = String::from("from ");
                s.push_str(&".".repeat(*level));
                if let Some(m) = module {
                    s.push_str(m);
                }
                s.push_str(" import ");
                s.push_str(&aliases(names));
                self.line(s);
            }
            Stmt::If { test, body, orelse } => self.if_chain("if", test, body, orelse),
            Stmt::While { test, body, orelse } => {
                let mut s = String::from("while ");
                write_expr(&mut s, test, Prec::Test, false);
                s.push(':');
                self.suite(s, body);
                if !orelse.is_empty() {
                    self.suite("else:".into(), orelse);
                }
            }
            Stmt::For { is_async, target, iter, body, orelse } => {
                let mut s = String::from(if *is_async { "async for " } else { "for " });
                write_expr(&mut s, target, Prec::Tuple, false);
                s.push_str(" in ");
                write_star_exprs(&mut s, iter);
                s.push(':');
                self.suite(s, body);
                if !orelse.is_empty() {
                    self.suite("else:".into(), orelse);
                }
            }
            Stmt::With { is_async, items, body } => {
                let mut s = String::from(if *is_async { "async with " } else { "with " });
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    // A bare parenthesized tuple would read back as several items.
                    let wrap = i == 0 && matches!(item.context, Expr::Tuple(ref e) if !e.is_empty());
                    if wrap {
                        s.push('(');
                    }
                    write_expr(&mut s, &item.context, Prec::Test, false);
                    if wrap {
                        s.push(')');
                    }
                    if let Some(v) = &item.vars {
                        s.push_str(" as ");
                        write_expr(&mut s, v, Prec::BitOr, false);
                    }
                }
                s.push(':');
                self.suite(s, body);
            }
            Stmt::Try { body, handlers, orelse, finalbody } => {
                self.suite("try:".into(), body);
                for h in handlers {
                    let mut s = String::from(if h.star { "except*" } else { "except" });
                    if let Some(t) = &h.typ {
                        s.push(' ');
                        write_expr(&mut s, t, Prec::Test, false);
                        if let Some(n) = &h.name {
                            s.push_str(" as ");
                            s.push_str(&n.name);
                        }
                    }
                    s.push(':');
                    self.suite(s, &h.body);
                }
                if !orelse.is_empty() {
                    self.suite("else:".into(), orelse);
                }
                if !finalbody.is_empty() {
                    self.suite("finally:".into(), finalbody);
                }
            }
            Stmt::FunctionDef(def) => {
                for d in &def.decorators {
                    let mut s = String::from("@");
                    write_expr(&mut s, d, Prec::Test, false);
                    self.line(s);
                }
                let mut s = String::from(if def.is_async { "async def " } else { "def " });
                s.push_str(&def.name.name);
                s.push('(');
                write_params(&mut s, &def.params, true);
                s.push(')');
                if let Some(r) = &def.returns {
                    s.push_str(" -> ");
                    write_expr(&mut s, r, Prec::Test, false);
                }
                s.push(':');
                self.suite(s, &def.body);
            }
            Stmt::ClassDef(def) => {
                for d in &def.decorators {
                    let mut s = String::from("@");
                    write_expr(&mut s, d, Prec::Test, false);
                    self.line(s);
                }
                let mut s = format!("class {}", def.name.name);
                if !def.bases.is_empty() {
                    s.push('(');
                    write_args(&mut s, &def.bases);
                    s.push(')');
                }
                s.push(':');
                self.suite(s, &def.body);
            }
        }
    }

    fn if_chain(&mut self, kw: &str, test: &Expr, body: &[Stmt], orelse: &[Stmt]) {
        let mut s = format!("{kw} ");
        write_expr(&mut s, test, Prec::Test, false);
        s.push(':');
        self.suite(s, body);
        match orelse {
            [] => {}
            [Stmt::If { test, body, orelse }] => self.if_chain("elif", test, body, orelse),
            _ => self.suite("else:".into(), orelse),
        }
    }
}

fn aliases(names: &[Alias]) -> String {
    names
        .iter()
        .map(|a| match &a.asname {
            Some(asname) => format!("{} as {asname}", a.name),
            None => a.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Expression in a position where a bare `yield` is allowed.
fn expr_yield_ok(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, Prec::Tuple, true);
    s
}

/// Expression list where a tuple may be bare but `yield` may not.
fn write_star_exprs(out: &mut String, e: &Expr) {
    write_expr(out, e, Prec::Tuple, false);
}

fn write_params(out: &mut String, params: &Params, typed: bool) {
    let mut parts: Vec<String> = Vec::new();
    let param = |p: &Param, prefix: &str| {
        let mut s = format!("{prefix}{}", p.name.name);
        let annotated = typed && p.annotation.is_some();
        if let (true, Some(a)) = (typed, &p.annotation) {
            s.push_str(": ");
            write_expr(&mut s, a, Prec::Test, false);
        }
        if let Some(d) = &p.default {
            s.push_str(if annotated { " = " } else { "=" });
            write_expr(&mut s, d, Prec::Test, false);
        }
        s
    };
    for p in &params.posonly {
        parts.push(param(p, ""));
    }
    if !params.posonly.is_empty() {
        parts.push("/".into());
    }
    for p in &params.args {
        parts.push(param(p, ""));
    }
    match &params.vararg {
        Some(v) => parts.push(param(v, "*")),
        None if !params.kwonly.is_empty() => parts.push("*".into()),
        None => {}
    }
    for p in &params.kwonly {
        parts.push(param(p, ""));
    }
    if let Some(k) = &params.kwarg {
        parts.push(param(k, "**"));
    }
    out.push_str(&parts.join(", "));
}

fn write_args(out: &mut String, args: &[Arg]) {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match arg {
            Arg::Positional(e) => write_expr(out, e, Prec::Test, false),
            Arg::Starred(e) => {
                out.push('*');
                write_expr(out, e, Prec::Test, false);
            }
            Arg::Keyword { name, value } => {
                out.push_str(name);
                out.push('=');
                write_expr(out, value, Prec::Test, false);
            }
            Arg::DoubleStarred(e) => {
                out.push_str("**");
                write_expr(out, e, Prec::Test, false);
            }
        }
    }
}

fn write_seq(out: &mut String, elts: &[Expr]) {
    for (i, e) in elts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, Prec::Test, false);
    }
}

fn write_generators(out: &mut String, generators: &[Comprehension]) {
    for g in generators {
        out.push_str(if g.is_async { " async for " } else { " for " });
        write_expr(out, &g.target, Prec::Tuple, false);
        out.push_str(" in ");
        write_expr(out, &g.iter, Prec::Or, false);
        for cond in &g.ifs {
            out.push_str(" if ");
            write_expr(out, cond, Prec::Or, false);
        }
    }
}

fn is_decimal_int(text: &str) -> bool {
    text.bytes().all(|b| b.is_ascii_digit() || b == b'_')
}

fn write_expr(out: &mut String, e: &Expr, ctx: Prec, yield_ok: bool) {
    let wrap = |out: &mut String, own: Prec, f: &dyn Fn(&mut String)| {
        if own < ctx {
            out.push('(');
            f(out);
            out.push(')');
        } else {
            f(out);
        }
    };
    match e {
        Expr::Name(id) => out.push_str(&id.name),
        Expr::Num(text) => out.push_str(text),
        Expr::Str(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                match part {
                    StrPart::Plain(raw) => out.push_str(raw),
                    StrPart::Formatted(fs) => write_fstring(out, fs),
                }
            }
        }
        Expr::Const(c) => out.push_str(match c {
            Constant::True => "True",
            Constant::False => "False",
            Constant::None => "None",
            Constant::Ellipsis => "...",
        }),
        Expr::Tuple(elts) => {
            if elts.is_empty() {
                out.push_str("()");
                return;
            }
            wrap(out, Prec::Tuple, &|out| {
                write_seq(out, elts);
                if elts.len() == 1 {
                    out.push(',');
                }
            });
        }
        Expr::List(elts) => {
            out.push('[');
            write_seq(out, elts);
            out.push(']');
        }
        Expr::Set(elts) => {
            out.push('{');
            write_seq(out, elts);
            out.push('}');
        }
        Expr::Dict(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match item {
                    DictItem::KeyValue(k, v) => {
                        write_expr(out, k, Prec::Test, false);
                        out.push_str(": ");
                        write_expr(out, v, Prec::Test, false);
                    }
                    DictItem::Unpack(v) => {
                        out.push_str("**");
                        write_expr(out, v, Prec::BitOr, false);
                    }
                }
            }
            out.push('}');
        }
        Expr::ListComp { elt, generators } => {
            out.push('[');
            write_expr(out, elt, Prec::Test, false);
            write_generators(out, generators);
            out.push(']');
        }
        Expr::SetComp { elt, generators } => {
            out.push('{');
            write_expr(out, elt, Prec::Test, false);
            write_generators(out, generators);
            out.push('}');
        }
        Expr::GeneratorExp { elt, generators } => {
            out.push('(');
            write_expr(out, elt, Prec::Test, false);
            write_generators(out, generators);
            out.push(')');
        }
        Expr::DictComp { key, value, generators } => {
            out.push('{');
            write_expr(out, key, Prec::Test, false);
            out.push_str(": ");
            write_expr(out, value, Prec::Test, false);
            write_generators(out, generators);
            out.push('}');
        }
        Expr::Attribute { value, attr } => {
            write_expr(out, value, Prec::Atom, false);
            if matches!(&**value, Expr::Num(t) if is_decimal_int(t)) {
                out.push(' ');
            }
            out.push('.');
            out.push_str(attr);
        }
        Expr::Subscript { value, index } => {
            write_expr(out, value, Prec::Atom, false);
            out.push('[');
            match &**index {
                Expr::Tuple(elts) if !elts.is_empty() => {
                    write_seq(out, elts);
                    if elts.len() == 1 {
                        out.push(',');
                    }
                }
                other => write_expr(out, other, Prec::Tuple, false),
            }
            out.push(']');
        }
        Expr::Slice { lower, upper, step } => {
            if let Some(l) = lower {
                write_expr(out, l, Prec::Test, false);
            }
            out.push(':');
            if let Some(u) = upper {
                write_expr(out, u, Prec::Test, false);
            }
            if let Some(s) = step {
                out.push(':');
                write_expr(out, s, Prec::Test, false);
            }
        }
        Expr::Call { func, args } => {
            write_expr(out, func, Prec::Atom, false);
            out.push('(');
            write_args(out, args);
            out.push(')');
        }
        Expr::Starred(v) => {
            out.push('*');
            write_expr(out, v, Prec::BitOr, false);
        }
        Expr::Await(v) => wrap(out, Prec::Await, &|out| {
            out.push_str("await ");
            write_expr(out, v, Prec::Atom, false);
        }),
        Expr::Yield(v) => {
            let body = |out: &mut String| {
                out.push_str("yield");
                if let Some(v) = v {
                    out.push(' ');
                    write_expr(out, v, Prec::Tuple, false);
                }
            };
            if yield_ok && ctx <= Prec::Yield {
                body(out);
            } else {
                out.push('(');
                body(out);
                out.push(')');
            }
        }
        Expr::YieldFrom(v) => {
            let body = |out: &mut String| {
                out.push_str("yield from ");
                write_expr(out, v, Prec::Test, false);
            };
            if yield_ok && ctx <= Prec::Yield {
                body(out);
            } else {
                out.push('(');
                body(out);
                out.push(')');
            }
        }
        Expr::UnaryOp { op: UnaryOp::Not, operand } => wrap(out, Prec::Not, &|out| {
            out.push_str("not ");
            write_expr(out, operand, Prec::Not, false);
        }),
        Expr::UnaryOp { op, operand } => wrap(out, Prec::Factor, &|out| {
            out.push_str(op.symbol());
            write_expr(out, operand, Prec::Factor, false);
        }),
        Expr::BinOp { left, op, right } => {
            let own = binop_prec(*op);
            let (lp, rp) = if *op == BinOp::Pow { (own.next(), own) } else { (own, own.next()) };
            wrap(out, own, &|out| {
                write_expr(out, left, lp, false);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                write_expr(out, right, rp, false);
            });
        }
        Expr::BoolOp { op, values } => {
            let (own, kw) = match op {
                BoolOp::Or => (Prec::Or, " or "),
                BoolOp::And => (Prec::And, " and "),
            };
            wrap(out, own, &|out| {
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        out.push_str(kw);
                    }
                    write_expr(out, v, own.next(), false);
                }
            });
        }
        Expr::Compare { left, ops, comparators } => wrap(out, Prec::Cmp, &|out| {
            write_expr(out, left, Prec::BitOr, false);
            for (op, c) in ops.iter().zip(comparators) {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                write_expr(out, c, Prec::BitOr, false);
            }
        }),
        Expr::IfExp { test, body, orelse } => wrap(out, Prec::Test, &|out| {
            write_expr(out, body, Prec::Or, false);
            out.push_str(" if ");
            write_expr(out, test, Prec::Or, false);
            out.push_str(" else ");
            write_expr(out, orelse, Prec::Test, false);
        }),
        Expr::Lambda { params, body } => wrap(out, Prec::Test, &|out| {
            out.push_str("lambda");
            if !params.is_empty() {
                out.push(' ');
                write_params(out, params, false);
            }
            out.push_str(": ");
            write_expr(out, body, Prec::Test, false);
        }),
        Expr::NamedExpr { target, value } => {
            out.push('(');
            out.push_str(&target.name);
            out.push_str(" := ");
            write_expr(out, value, Prec::Test, false);
            out.push(')');
        }
    }
}

fn write_fstring(out: &mut String, fs: &FString) {
    out.push_str(&fs.prefix);
    out.push_str(&fs.quote);
    write_fparts(out, &fs.parts);
    out.push_str(&fs.quote);
}

fn write_fparts(out: &mut String, parts: &[FPart]) {
    for part in parts {
        match part {
            FPart::Literal(text) => out.push_str(text),
            FPart::Field(field) => {
                out.push('{');
                match &field.debug {
                    Some(src) => out.push_str(src),
                    None => {
                        let mut text = String::new();
                        write_expr(&mut text, &field.expr, Prec::Tuple, true);
                        if has_top_level_colon(&text) {
                            text = format!("({text})");
                        }
                        if text.starts_with('{') {
                            out.push(' ');
                        }
                        out.push_str(&text);
                    }
                }
                if let Some(c) = field.conversion {
                    out.push('!');
                    out.push(c);
                }
                if let Some(spec) = &field.spec {
                    out.push(':');
                    write_fparts(out, spec);
                }
                out.push('}');
            }
        }
    }
}

/// True when a printed expression has a `:` outside brackets and strings,
/// which would be read as the start of a format spec.
fn has_top_level_colon(text: &str) -> bool {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            q @ (b'\'' | b'"') => {
                let triple = bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q);
                i += if triple { 3 } else { 1 };
                while i < bytes.len() {
                    if bytes[i] == b'\\' {
                        i += 2;
                        continue;
                    }
                    if bytes[i] == q && (!triple || (bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q))) {
                        i += if triple { 3 } else { 1 };
                        break;
                    }
                    i += 1;
                }
                continue;
            }
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth = depth.saturating_sub(1),
            b':' if depth == 0 => return true,
            _ => {}
        }
        i += 1;
    }
    false
}
