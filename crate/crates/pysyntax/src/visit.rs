//! Read-only traversal in textual order.
//!
//! Override the `visit_*` hooks and call the matching `walk_*` function to
//! keep descending. Binding positions that are not expressions (function
//! names, parameters, `except ... as` names, walrus targets) go through
//! [`Visitor::visit_binding`]; expression targets of assignments go through
//! [`Visitor::visit_target`].

use crate::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingKind {
    Function,
    Class,
    Param,
    ExceptName,
    Walrus,
    Global,
    Nonlocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Assign,
    AugAssign,
    AnnAssign,
    For,
    With,
    Comprehension,
    Del,
}

pub trait Visitor {
    fn visit_stmt(&mut self, stmt: &Stmt) {
        walk_stmt(self, stmt);
    }

    fn visit_expr(&mut self, expr: &Expr) {
        walk_expr(self, expr);
    }

    fn visit_target(&mut self, target: &Expr, _kind: TargetKind) {
        self.visit_expr(target);
    }

    fn visit_binding(&mut self, _ident: &Ident, _kind: BindingKind) {}

    fn visit_params(&mut self, params: &Params) {
        walk_params(self, params);
    }

    fn visit_arg(&mut self, arg: &Arg) {
        walk_arg(self, arg);
    }
}

pub fn walk_module<V: Visitor + ?Sized>(v: &mut V, module: &Module) {
    walk_body(v, &module.body);
}

pub fn walk_body<V: Visitor + ?Sized>(v: &mut V, body: &[Stmt]) {
    for stmt in body {
        v.visit_stmt(stmt);
    }
}

fn opt<V: Visitor + ?Sized>(v: &mut V, e: &Option<Expr>) {
    if let Some(e) = e {
        v.visit_expr(e);
    }
}

pub fn walk_stmt<V: Visitor + ?Sized>(v: &mut V, stmt: &Stmt) {
    match stmt {
        Stmt::Expr(e) => v.visit_expr(e),
        Stmt::Assign { targets, value } => {
            for t in targets {
                v.visit_target(t, TargetKind::Assign);
            }
            v.visit_expr(value);
        }
        Stmt::AugAssign { target, value, .. } => {
            v.visit_target(target, TargetKind::AugAssign);
            v.visit_expr(value);
        }
        Stmt::AnnAssign { target, annotation, value } => {
            v.visit_target(target, TargetKind::AnnAssign);
            v.visit_expr(annotation);
            opt(v, value);
        }
        Stmt::Pass | Stmt::Break | Stmt::Continue | Stmt::Import(_) | Stmt::ImportFrom { .. } => {}
        Stmt::Return(value) => opt(v, value),
        Stmt::Raise { exc, cause } => {
            opt(v, exc);
            opt(v, cause);
        }
        Stmt::Global(names) => names.iter().for_each(|n| v.visit_binding(n, BindingKind::Global)),
        Stmt::Nonlocal(names) => names.iter().for_each(|n| v.visit_binding(n, BindingKind::Nonlocal)),
        Stmt::Del(targets) => targets.iter().for_each(|t| v.visit_target(t, TargetKind::Del)),
        Stmt::Assert { test, msg } => {
            v.visit_expr(test);
            opt(v, msg);
        }
        Stmt::If { test, body, orelse } | Stmt::While { test, body, orelse } => {
            v.visit_expr(test);
            walk_body(v, body);
            walk_body(v, orelse);
        }
        Stmt::For { target, iter, body, orelse, .. } => {
            v.visit_target(target, TargetKind::For);
            v.visit_expr(iter);
            walk_body(v, body);
            walk_body(v, orelse);
        }
        Stmt::With { items, body, .. } => {
            for item in items {
                v.visit_expr(&item.context);
                if let Some(vars) = &item.vars {
                    v.visit_target(vars, TargetKind::With);
                }
            }
            walk_body(v, body);
        }
        Stmt::Try { body, handlers, orelse, finalbody } => {
            walk_body(v, body);
            for h in handlers {
                opt(v, &h.typ);
                if let Some(name) = &h.name {
                    v.visit_binding(name, BindingKind::ExceptName);
                }
                walk_body(v, &h.body);
            }
            walk_body(v, orelse);
            walk_body(v, finalbody);
        }
        Stmt::FunctionDef(def) => {
            def.decorators.iter().for_each(|d| v.visit_expr(d));
            v.visit_binding(&def.name, BindingKind::Function);
            v.visit_params(&def.params);
            opt(v, &def.returns);
            walk_body(v, &def.body);
        }
        Stmt::ClassDef(def) => {
            def.decorators.iter().for_each(|d| v.visit_expr(d));
            v.visit_binding(&def.name, BindingKind::Class);
            def.bases.iter().for_each(|a| v.visit_arg(a));
            walk_body(v, &def.body);
        }
    }
}

pub fn walk_params<V: Visitor + ?Sized>(v: &mut V, params: &Params) {
    for p in params.iter() {
        v.visit_binding(&p.name, BindingKind::Param);
        opt(v, &p.annotation);
        opt(v, &p.default);
    }
}

pub fn walk_arg<V: Visitor + ?Sized>(v: &mut V, arg: &Arg) {
    match arg {
        Arg::Positional(e) | Arg::Starred(e) | Arg::DoubleStarred(e) => v.visit_expr(e),
        Arg::Keyword { value, .. } => v.visit_expr(value),
    }
}

fn walk_generators<V: Visitor + ?Sized>(v: &mut V, generators: &[Comprehension]) {
    for g in generators {
        v.visit_target(&g.target, TargetKind::Comprehension);
        v.visit_expr(&g.iter);
        g.ifs.iter().for_each(|c| v.visit_expr(c));
    }
}

fn walk_fparts<V: Visitor + ?Sized>(v: &mut V, parts: &[FPart]) {
    for part in parts {
        if let FPart::Field(field) = part {
            v.visit_expr(&field.expr);
            if let Some(spec) = &field.spec {
                walk_fparts(v, spec);
            }
        }
    }
}

pub fn walk_expr<V: Visitor + ?Sized>(v: &mut V, expr: &Expr) {
    match expr {
        Expr::Name(_) | Expr::Num(_) | Expr::Const(_) => {}
        Expr::Str(parts) => {
            for part in parts {
                if let StrPart::Formatted(fs) = part {
                    walk_fparts(v, &fs.parts);
                }
            }
        }
        Expr::Tuple(elts) | Expr::List(elts) | Expr::Set(elts) => {
            elts.iter().for_each(|e| v.visit_expr(e));
        }
        Expr::Dict(items) => {
            for item in items {
                match item {
                    DictItem::KeyValue(k, val) => {
                        v.visit_expr(k);
                        v.visit_expr(val);
                    }
                    DictItem::Unpack(e) => v.visit_expr(e),
                }
            }
        }
        Expr::ListComp { elt, generators }
        | Expr::SetComp { elt, generators }
        | Expr::GeneratorExp { elt, generators } => {
            v.visit_expr(elt);
            walk_generators(v, generators);
        }
        Expr::DictComp { key, value, generators } => {
            v.visit_expr(key);
            v.visit_expr(value);
            walk_generators(v, generators);
        }
        Expr::Attribute { value, .. } => v.visit_expr(value),
        Expr::Subscript { value, index } => {
            v.visit_expr(value);
            v.visit_expr(index);
        }
        Expr::Slice { lower, upper, step } => {
            for e in [lower, upper, step].into_iter().flatten() {
                v.visit_expr(e);
            }
        }
        Expr::Call { func, args } => {
            v.visit_expr(func);
            args.iter().for_each(|a| v.visit_arg(a));
        }
        Expr::Starred(e) | Expr::Await(e) | Expr::YieldFrom(e) => v.visit_expr(e),
        Expr::Yield(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        Expr::UnaryOp { operand, .. } => v.visit_expr(operand),
        Expr::BinOp { left, right, .. } => {
            v.visit_expr(left);
            v.visit_expr(right);
        }
        Expr::BoolOp { values, .. } => values.iter().for_each(|e| v.visit_expr(e)),
        Expr::Compare { left, comparators, .. } => {
            v.visit_expr(left);
            comparators.iter().for_each(|e| v.visit_expr(e));
        }
        Expr::IfExp { test, body, orelse } => {
            v.visit_expr(body);
            v.visit_expr(test);
            v.visit_expr(orelse);
        }
        Expr::Lambda { params, body } => {
            v.visit_params(params);
            v.visit_expr(body);
        }
        Expr::NamedExpr { target, value } => {
            v.visit_binding(target, BindingKind::Walrus);
            v.visit_expr(value);
        }
    }
}
