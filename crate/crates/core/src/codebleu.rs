//! Four-component CodeBLEU: BLEU n-gram match, keyword-weighted n-gram
//! match, syntax-subtree match and data-flow match, each on a 0-100 scale.
//!
//! Scores are asymmetric (candidate first, reference second). Use
//! [`symmetric`] when a distance is needed.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use pysyntax::ast::*;
use serde::{Deserialize, Serialize};

use crate::pynorm::{self, CompileError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodeBleuError {
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    BadWeights([f64; 4]),
    #[error("keyword weight must be positive, got {0}")]
    BadKeywordWeight(f64),
}

/// Smoothing applied to an n-gram order with no clipped matches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// Numerator replaced by a small constant: `eps / total`.
    Epsilon(f64),
    /// `(0 + 1) / (total + 1)`.
    AddOne,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Epsilon(0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuConfig {
    /// ngram, weighted ngram, syntax, dataflow.
    pub weights: [f64; 4],
    pub keyword_weight: f64,
    pub smoothing: Smoothing,
}

impl Default for CodeBleuConfig {
    fn default() -> Self {
        CodeBleuConfig { weights: [0.25; 4], keyword_weight: 5.0, smoothing: Smoothing::default() }
    }
}

impl CodeBleuConfig {
    pub fn new(weights: [f64; 4], keyword_weight: f64) -> Result<Self, CodeBleuError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(CodeBleuError::BadWeights(weights));
        }
        if keyword_weight <= 0.0 || !keyword_weight.is_finite() {
            return Err(CodeBleuError::BadKeywordWeight(keyword_weight));
        }
        Ok(CodeBleuConfig { weights, keyword_weight, smoothing: Smoothing::default() })
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default, skip_serializing_if = "is_false")]
    pub empty_candidate: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub empty_reference: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub candidate_unparseable: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub reference_unparseable: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl Flags {
    pub fn any(&self) -> bool {
        self.empty_candidate || self.empty_reference || self.candidate_unparseable || self.reference_unparseable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: f64,
    pub combined: f64,
    pub weights: [f64; 4],
    #[serde(default)]
    pub flags: Flags,
}

fn keywords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| include_str!("../data/python_keywords.txt").lines().filter(|l| !l.is_empty()).collect())
}

pub fn is_keyword(token: &str) -> bool {
    keywords().contains(token)
}

// ---- n-gram components -----------------------------------------------

const MAX_ORDER: usize = 4;
const SEP: char = '\u{1f}';

/// N-gram counts for orders 1..=4. The flag marks n-grams containing a
/// language keyword.
#[derive(Debug, Clone, Default)]
struct NgramTable {
    len: usize,
    orders: Vec<HashMap<String, (usize, bool)>>,
}

impl NgramTable {
    fn new(tokens: &[&str]) -> Self {
        let mut orders = Vec::with_capacity(MAX_ORDER);
        for n in 1..=MAX_ORDER {
            let mut map: HashMap<String, (usize, bool)> = HashMap::new();
            if tokens.len() >= n {
                for gram in tokens.windows(n) {
                    let mut key = String::new();
                    for (i, t) in gram.iter().enumerate() {
                        if i > 0 {
                            key.push(SEP);
                        }
                        key.push_str(t);
                    }
                    let kw = gram.iter().any(|t| is_keyword(t));
                    map.entry(key).or_insert((0, kw)).0 += 1;
                }
            }
            orders.push(map);
        }
        NgramTable { len: tokens.len(), orders }
    }
}

fn bleu_tables(cand: &NgramTable, refr: &NgramTable, keyword_weight: f64, smoothing: Smoothing) -> f64 {
    if cand.len == 0 || refr.len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for n in 0..MAX_ORDER {
        let c = &cand.orders[n];
        if c.is_empty() {
            continue;
        }
        let r = &refr.orders[n];
        let (mut clipped, mut total) = (0.0, 0.0);
        for (gram, &(count, kw)) in c {
            let w = if kw { keyword_weight } else { 1.0 };
            total += w * count as f64;
            let rc = r.get(gram).map(|x| x.0).unwrap_or(0);
            clipped += w * count.min(rc) as f64;
        }
        let p = if clipped > 0.0 {
            clipped / total
        } else {
            match smoothing {
                Smoothing::Epsilon(eps) => eps / total,
                Smoothing::AddOne => 1.0 / (total + 1.0),
            }
        };
        log_sum += p.ln();
        used += 1;
    }
    let geo = (log_sum / used as f64).exp();
    let (c, r) = (cand.len as f64, refr.len as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    (100.0 * bp * geo).clamp(0.0, 100.0)
}

/// BLEU over token texts with the given smoothing, 0-100.
pub fn bleu(candidate: &[&str], reference: &[&str], smoothing: Smoothing) -> f64 {
    bleu_tables(&NgramTable::new(candidate), &NgramTable::new(reference), 1.0, smoothing)
}

fn warn_empty(candidate: &pynorm::TokenStream, reference: &pynorm::TokenStream) {
    if candidate.is_empty() || reference.is_empty() {
        log::warn!("n-gram match on an empty token stream is defined as 0");
    }
}

/// Modified n-gram precision (n = 1..4) with brevity penalty, 0-100.
pub fn ngram_match(candidate: &pynorm::TokenStream, reference: &pynorm::TokenStream) -> f64 {
    warn_empty(candidate, reference);
    bleu(&candidate.texts(), &reference.texts(), Smoothing::default())
}

/// As [`ngram_match`], with n-grams containing a keyword counted
/// `keyword_weight` times in both the clipped counts and the totals.
pub fn weighted_ngram_match(
    candidate: &pynorm::TokenStream,
    reference: &pynorm::TokenStream,
    keyword_weight: f64,
) -> f64 {
    warn_empty(candidate, reference);
    bleu_tables(
        &NgramTable::new(&candidate.texts()),
        &NgramTable::new(&reference.texts()),
        keyword_weight,
        Smoothing::default(),
    )
}

// ---- syntax component -------------------------------------------------

/// Generic labeled tree projected from the syntax tree. Identifier leaves
/// are anonymized and literals keep only their kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: String,
    pub children: Vec<Node>,
}

impl Node {
    fn leaf(label: &str) -> Node {
        Node { label: label.to_string(), children: Vec::new() }
    }

    fn new(label: impl Into<String>, children: Vec<Node>) -> Node {
        Node { label: label.into(), children }
    }
}

const IDENT: &str = "identifier";

fn block(label: &str, body: &[Stmt]) -> Node {
    Node::new(label, body.iter().map(stmt_node).collect())
}

fn opt_node(e: &Option<Expr>, children: &mut Vec<Node>) {
    if let Some(e) = e {
        children.push(expr_node(e));
    }
}

fn params_node(params: &Params) -> Node {
    let mut children = Vec::new();
    let mut push = |p: &Param, label: &str| {
        let mut c = vec![Node::leaf(IDENT)];
        if let Some(a) = &p.annotation {
            c.push(Node::new("annotation", vec![expr_node(a)]));
        }
        if let Some(d) = &p.default {
            c.push(Node::new("default", vec![expr_node(d)]));
        }
        children.push(Node::new(label, c));
    };
    params.posonly.iter().for_each(|p| push(p, "posonly_param"));
    params.args.iter().for_each(|p| push(p, "param"));
    if let Some(v) = &params.vararg {
        push(v, "vararg");
    }
    params.kwonly.iter().for_each(|p| push(p, "kwonly_param"));
    if let Some(k) = &params.kwarg {
        push(k, "kwarg");
    }
    Node::new("params", children)
}

fn arg_node(arg: &Arg) -> Node {
    match arg {
        Arg::Positional(e) => expr_node(e),
        Arg::Starred(e) => Node::new("starred", vec![expr_node(e)]),
        Arg::Keyword { value, .. } => Node::new("keyword", vec![Node::leaf(IDENT), expr_node(value)]),
        Arg::DoubleStarred(e) => Node::new("double_starred", vec![expr_node(e)]),
    }
}

fn generators_nodes(generators: &[Comprehension]) -> Vec<Node> {
    generators
        .iter()
        .map(|g| {
            let mut c = vec![expr_node(&g.target), expr_node(&g.iter)];
            c.extend(g.ifs.iter().map(expr_node));
            Node::new(if g.is_async { "async_comprehension" } else { "comprehension" }, c)
        })
        .collect()
}

fn fstring_fields(parts: &[FPart], out: &mut Vec<Node>) {
    for part in parts {
        if let FPart::Field(f) = part {
            let mut c = vec![expr_node(&f.expr)];
            if let Some(spec) = &f.spec {
                let mut spec_children = Vec::new();
                fstring_fields(spec, &mut spec_children);
                c.push(Node::new("format_spec", spec_children));
            }
            let label = match f.conversion {
                Some(conv) => format!("formatted_value!{conv}"),
                None => "formatted_value".to_string(),
            };
            out.push(Node::new(label, c));
        }
    }
}

fn expr_node(e: &Expr) -> Node {
    match e {
        Expr::Name(_) => Node::leaf(IDENT),
        Expr::Num(_) => Node::leaf("number"),
        Expr::Str(parts) => {
            let mut fields = Vec::new();
            for part in parts {
                if let StrPart::Formatted(fs) = part {
                    fstring_fields(&fs.parts, &mut fields);
                }
            }
            if fields.is_empty() {
                Node::leaf("string")
            } else {
                Node::new("joined_string", fields)
            }
        }
        Expr::Const(c) => Node::leaf(match c {
            Constant::True => "True",
            Constant::False => "False",
            Constant::None => "None",
            Constant::Ellipsis => "Ellipsis",
        }),
        Expr::Tuple(elts) => Node::new("tuple", elts.iter().map(expr_node).collect()),
        Expr::List(elts) => Node::new("list", elts.iter().map(expr_node).collect()),
        Expr::Set(elts) => Node::new("set", elts.iter().map(expr_node).collect()),
        Expr::Dict(items) => Node::new(
            "dict",
            items
                .iter()
                .map(|item| match item {
                    DictItem::KeyValue(k, v) => Node::new("pair", vec![expr_node(k), expr_node(v)]),
                    DictItem::Unpack(v) => Node::new("double_starred", vec![expr_node(v)]),
                })
                .collect(),
        ),
        Expr::ListComp { elt, generators } => {
            let mut c = vec![expr_node(elt)];
            c.extend(generators_nodes(generators));
            Node::new("list_comp", c)
        }
        Expr::SetComp { elt, generators } => {
            let mut c = vec![expr_node(elt)];
            c.extend(generators_nodes(generators));
            Node::new("set_comp", c)
        }
        Expr::GeneratorExp { elt, generators } => {
            let mut c = vec![expr_node(elt)];
            c.extend(generators_nodes(generators));
            Node::new("generator_exp", c)
        }
        Expr::DictComp { key, value, generators } => {
            let mut c = vec![expr_node(key), expr_node(value)];
            c.extend(generators_nodes(generators));
            Node::new("dict_comp", c)
        }
        Expr::Attribute { value, .. } => Node::new("attribute", vec![expr_node(value), Node::leaf(IDENT)]),
        Expr::Subscript { value, index } => Node::new("subscript", vec![expr_node(value), expr_node(index)]),
        Expr::Slice { lower, upper, step } => Node::new(
            "slice",
            [lower, upper, step]
                .into_iter()
                .map(|part| match part {
                    Some(x) => expr_node(x),
                    None => Node::leaf("empty"),
                })
                .collect(),
        ),
        Expr::Call { func, args } => {
            let mut c = vec![expr_node(func)];
            c.extend(args.iter().map(arg_node));
            Node::new("call", c)
        }
        Expr::Starred(v) => Node::new("starred", vec![expr_node(v)]),
        Expr::Await(v) => Node::new("await", vec![expr_node(v)]),
        Expr::Yield(v) => match v {
            Some(v) => Node::new("yield", vec![expr_node(v)]),
            None => Node::leaf("yield"),
        },
        Expr::YieldFrom(v) => Node::new("yield_from", vec![expr_node(v)]),
        Expr::UnaryOp { op, operand } => Node::new(format!("unary:{}", op.symbol()), vec![expr_node(operand)]),
        Expr::BinOp { left, op, right } => {
            Node::new(format!("binop:{}", op.symbol()), vec![expr_node(left), expr_node(right)])
        }
        Expr::BoolOp { op, values } => Node::new(
            match op {
                BoolOp::And => "boolop:and",
                BoolOp::Or => "boolop:or",
            },
            values.iter().map(expr_node).collect(),
        ),
        Expr::Compare { left, ops, comparators } => {
            let label = ops.iter().map(|o| o.symbol()).collect::<Vec<_>>().join(",");
            let mut c = vec![expr_node(left)];
            c.extend(comparators.iter().map(expr_node));
            Node::new(format!("compare:{label}"), c)
        }
        Expr::IfExp { test, body, orelse } => {
            Node::new("if_exp", vec![expr_node(test), expr_node(body), expr_node(orelse)])
        }
        Expr::Lambda { params, body } => Node::new("lambda", vec![params_node(params), expr_node(body)]),
        Expr::NamedExpr { value, .. } => Node::new("named_expr", vec![Node::leaf(IDENT), expr_node(value)]),
    }
}

fn stmt_node(s: &Stmt) -> Node {
    match s {
        Stmt::Expr(e) => Node::new("expr_stmt", vec![expr_node(e)]),
        Stmt::Assign { targets, value } => {
            let mut c: Vec<Node> = targets.iter().map(expr_node).collect();
            c.push(expr_node(value));
            Node::new("assign", c)
        }
        Stmt::AugAssign { target, op, value } => {
            Node::new(format!("aug_assign:{}", op.symbol()), vec![expr_node(target), expr_node(value)])
        }
        Stmt::AnnAssign { target, annotation, value } => {
            let mut c = vec![expr_node(target), expr_node(annotation)];
            opt_node(value, &mut c);
            Node::new("ann_assign", c)
        }
        Stmt::Pass => Node::leaf("pass"),
        Stmt::Break => Node::leaf("break"),
        Stmt::Continue => Node::leaf("continue"),
        Stmt::Return(v) => {
            let mut c = Vec::new();
            opt_node(v, &mut c);
            Node::new("return", c)
        }
        Stmt::Raise { exc, cause } => {
            let mut c = Vec::new();
            opt_node(exc, &mut c);
            opt_node(cause, &mut c);
            Node::new("raise", c)
        }
        Stmt::Global(names) => Node::new("global", names.iter().map(|_| Node::leaf(IDENT)).collect()),
        Stmt::Nonlocal(names) => Node::new("nonlocal", names.iter().map(|_| Node::leaf(IDENT)).collect()),
        Stmt::Del(targets) => Node::new("delete", targets.iter().map(expr_node).collect()),
        Stmt::Assert { test, msg } => {
            let mut c = vec![expr_node(test)];
            opt_node(msg, &mut c);
            Node::new("assert", c)
        }
        Stmt::Import(names) => Node::new("import", names.iter().map(|_| Node::leaf(IDENT)).collect()),
        Stmt::ImportFrom { names, .. } => {
            Node::new("import_from", names.iter().map(|_| Node::leaf(IDENT)).collect())
        }
        Stmt::If { test, body, orelse } => {
            let mut c = vec![expr_node(test), block("block", body)];
            if !orelse.is_empty() {
                c.push(block("orelse", orelse));
            }
            Node::new("if", c)
        }
        Stmt::While { test, body, orelse } => {
            let mut c = vec![expr_node(test), block("block", body)];
            if !orelse.is_empty() {
                c.push(block("orelse", orelse));
            }
            Node::new("while", c)
        }
        Stmt::For { is_async, target, iter, body, orelse } => {
            let mut c = vec![expr_node(target), expr_node(iter), block("block", body)];
            if !orelse.is_empty() {
                c.push(block("orelse", orelse));
            }
            Node::new(if *is_async { "async_for" } else { "for" }, c)
        }
        Stmt::With { is_async, items, body } => {
            let mut c: Vec<Node> = items
                .iter()
                .map(|item| {
                    let mut ic = vec![expr_node(&item.context)];
                    if let Some(v) = &item.vars {
                        ic.push(expr_node(v));
                    }
                    Node::new("with_item", ic)
                })
                .collect();
            c.push(block("block", body));
            Node::new(if *is_async { "async_with" } else { "with" }, c)
        }
        Stmt::Try { body, handlers, orelse, finalbody } => {
            let mut c = vec![block("block", body)];
            for h in handlers {
                let mut hc = Vec::new();
                if let Some(t) = &h.typ {
                    hc.push(expr_node(t));
                }
                if h.name.is_some() {
                    hc.push(Node::leaf(IDENT));
                }
                hc.push(block("block", &h.body));
                c.push(Node::new(if h.star { "except_star" } else { "except" }, hc));
            }
            if !orelse.is_empty() {
                c.push(block("orelse", orelse));
            }
            if !finalbody.is_empty() {
                c.push(block("finally", finalbody));
            }
            Node::new("try", c)
        }
        Stmt::FunctionDef(def) => {
            let mut c: Vec<Node> =
                def.decorators.iter().map(|d| Node::new("decorator", vec![expr_node(d)])).collect();
            c.push(Node::leaf(IDENT));
            c.push(params_node(&def.params));
            if let Some(r) = &def.returns {
                c.push(Node::new("returns", vec![expr_node(r)]));
            }
            c.push(block("block", &def.body));
            Node::new(if def.is_async { "async_function_def" } else { "function_def" }, c)
        }
        Stmt::ClassDef(def) => {
            let mut c: Vec<Node> =
                def.decorators.iter().map(|d| Node::new("decorator", vec![expr_node(d)])).collect();
            c.push(Node::leaf(IDENT));
            c.extend(def.bases.iter().map(arg_node));
            c.push(block("block", &def.body));
            Node::new("class_def", c)
        }
    }
}

/// Projects a module into the generic tree used by the syntax component.
pub fn project(module: &Module) -> Node {
    block("module", &module.body)
}

/// Serialized form of every subtree rooted at a node with children.
pub fn subtrees(root: &Node) -> Vec<String> {
    fn walk(node: &Node, out: &mut Vec<String>) -> String {
        if node.children.is_empty() {
            return node.label.clone();
        }
        let mut s = format!("({}", node.label);
        for child in &node.children {
            s.push(' ');
            s.push_str(&walk(child, out));
        }
        s.push(')');
        out.push(s.clone());
        s
    }
    let mut out = Vec::new();
    walk(root, &mut out);
    out
}

fn multiset<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> HashMap<T, usize> {
    let mut m = HashMap::new();
    for item in items {
        *m.entry(item).or_insert(0) += 1;
    }
    m
}

/// Clipped multiset match of the candidate's items against the reference's,
/// as a percentage of candidate items. Zero candidate items score 100 when
/// the reference is also empty, else 0.
fn clipped_fraction<T: std::hash::Hash + Eq>(cand: &HashMap<T, usize>, refr: &HashMap<T, usize>) -> f64 {
    let total: usize = cand.values().sum();
    if total == 0 {
        let ref_total: usize = refr.values().sum();
        return if ref_total == 0 { 100.0 } else { 0.0 };
    }
    let matched: usize = cand.iter().map(|(k, &c)| c.min(refr.get(k).copied().unwrap_or(0))).sum();
    100.0 * matched as f64 / total as f64
}

/// Percentage of candidate subtrees found in the reference (clipped).
pub fn syntax_match(candidate: &str, reference: &str) -> Result<f64, CompileError> {
    let c = pysyntax::parse_module(candidate)?;
    let r = pysyntax::parse_module(reference)?;
    Ok(clipped_fraction(&multiset(subtrees(&project(&c))), &multiset(subtrees(&project(&r)))))
}

// ---- data-flow component ----------------------------------------------

const NO_SOURCE: &str = "_";

/// Def-use edges with variables named by first-definition order.
pub fn dataflow_edges(module: &Module) -> Vec<(String, String)> {
    let mut defs = DefOrder::default();
    pysyntax::visit::walk_module(&mut defs, module);
    let mut flow = Flow { ids: defs.ids, edges: Vec::new() };
    flow.body(&module.body);
    flow.edges
}

#[derive(Default)]
struct DefOrder {
    ids: HashMap<String, String>,
}

impl DefOrder {
    fn define(&mut self, name: &str) {
        let next = self.ids.len() + 1;
        self.ids.entry(name.to_string()).or_insert_with(|| format!("v{next}"));
    }

    fn target(&mut self, e: &Expr) {
        match e {
            Expr::Name(id) => self.define(&id.name),
            Expr::Tuple(elts) | Expr::List(elts) => elts.iter().for_each(|x| self.target(x)),
            Expr::Starred(inner) => self.target(inner),
            Expr::Attribute { value, .. } | Expr::Subscript { value, .. } => self.target(value),
            _ => {}
        }
    }
}

impl pysyntax::visit::Visitor for DefOrder {
    fn visit_stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Import(names) => {
                for a in names {
                    let bound = a.asname.clone().unwrap_or_else(|| a.name.split('.').next().unwrap_or_default().into());
                    self.define(&bound);
                }
            }
            Stmt::ImportFrom { names, .. } => {
                for a in names {
                    self.define(a.asname.as_deref().unwrap_or(&a.name));
                }
            }
            _ => {}
        }
        pysyntax::visit::walk_stmt(self, stmt);
    }

    fn visit_target(&mut self, target: &Expr, kind: pysyntax::visit::TargetKind) {
        if kind != pysyntax::visit::TargetKind::Del {
            self.target(target);
        }
        pysyntax::visit::walk_expr(self, target);
    }

    fn visit_binding(&mut self, ident: &Ident, kind: pysyntax::visit::BindingKind) {
        use pysyntax::visit::BindingKind::*;
        if !matches!(kind, Global | Nonlocal) {
            self.define(&ident.name);
        }
    }
}

struct Flow {
    ids: HashMap<String, String>,
    edges: Vec<(String, String)>,
}

impl Flow {
    fn id(&self, name: &str) -> String {
        self.ids.get(name).cloned().unwrap_or_else(|| format!("free:{name}"))
    }

    fn body(&mut self, body: &[Stmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn sink(&mut self, e: &Expr, kind: &str) {
        let reads = self.reads(e);
        for r in reads {
            self.edges.push((r, format!("sink:{kind}")));
        }
    }

    fn define_from(&mut self, defined: &[String], reads: &[String]) {
        for d in defined {
            if reads.is_empty() {
                self.edges.push((NO_SOURCE.to_string(), d.clone()));
            } else {
                for r in reads {
                    self.edges.push((r.clone(), d.clone()));
                }
            }
        }
    }

    /// Variables defined by a target plus the reads hidden inside it
    /// (subscript indices, attribute bases).
    fn target_parts(&mut self, target: &Expr, defined: &mut Vec<String>, reads: &mut Vec<String>) {
        match target {
            Expr::Name(id) => defined.push(self.id(&id.name)),
            Expr::Tuple(elts) | Expr::List(elts) => {
                for e in elts {
                    self.target_parts(e, defined, reads);
                }
            }
            Expr::Starred(inner) => self.target_parts(inner, defined, reads),
            Expr::Subscript { value, index } => {
                self.target_parts(value, defined, reads);
                reads.extend(self.reads(index));
            }
            Expr::Attribute { value, .. } => self.target_parts(value, defined, reads),
            other => reads.extend(self.reads(other)),
        }
    }

    fn assign(&mut self, target: &Expr, value: &Expr) {
        if let (Expr::Tuple(ts) | Expr::List(ts), Expr::Tuple(vs) | Expr::List(vs)) = (target, value) {
            let starred = |xs: &[Expr]| xs.iter().any(|x| matches!(x, Expr::Starred(_)));
            if ts.len() == vs.len() && !starred(ts) && !starred(vs) {
                for (t, v) in ts.iter().zip(vs) {
                    self.assign(t, v);
                }
                return;
            }
        }
        let mut reads = self.reads(value);
        let mut defined = Vec::new();
        self.target_parts(target, &mut defined, &mut reads);
        self.define_from(&defined, &reads);
    }

    fn params(&mut self, params: &Params) {
        for p in params.iter() {
            let reads = p.default.as_ref().map(|d| self.reads(d)).unwrap_or_default();
            let id = self.id(&p.name.name);
            self.define_from(&[id], &reads);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Expr(e) => self.sink(e, "expr"),
            Stmt::Assign { targets, value } => {
                for t in targets {
                    self.assign(t, value);
                }
            }
            Stmt::AugAssign { target, value, .. } => {
                let mut reads = self.reads(value);
                reads.extend(self.reads(target));
                let mut defined = Vec::new();
                self.target_parts(target, &mut defined, &mut Vec::new());
                self.define_from(&defined, &reads);
            }
            Stmt::AnnAssign { target, value, .. } => {
                if let Some(v) = value {
                    self.assign(target, v);
                }
            }
            Stmt::Pass | Stmt::Break | Stmt::Continue | Stmt::Global(_) | Stmt::Nonlocal(_) => {}
            Stmt::Return(v) => {
                if let Some(v) = v {
                    self.sink(v, "return");
                }
            }
            Stmt::Raise { exc, cause } => {
                for e in [exc, cause].into_iter().flatten() {
                    self.sink(e, "raise");
                }
            }
            Stmt::Del(targets) => targets.iter().for_each(|t| self.sink(t, "del")),
            Stmt::Assert { test, msg } => {
                self.sink(test, "assert");
                if let Some(m) = msg {
                    self.sink(m, "assert");
                }
            }
            Stmt::Import(names) => {
                for a in names {
                    let bound = a.asname.clone().unwrap_or_else(|| a.name.split('.').next().unwrap_or_default().into());
                    let id = self.id(&bound);
                    self.define_from(&[id], &[]);
                }
            }
            Stmt::ImportFrom { names, .. } => {
                for a in names.iter().filter(|a| a.name != "*") {
                    let id = self.id(a.asname.as_deref().unwrap_or(&a.name));
                    self.define_from(&[id], &[]);
                }
            }
            Stmt::If { test, body, orelse } => {
                self.sink(test, "if");
                self.body(body);
                self.body(orelse);
            }
            Stmt::While { test, body, orelse } => {
                self.sink(test, "while");
                self.body(body);
                self.body(orelse);
            }
            Stmt::For { target, iter, body, orelse, .. } => {
                let reads = self.reads(iter);
                let mut defined = Vec::new();
                let mut extra = Vec::new();
                self.target_parts(target, &mut defined, &mut extra);
                let mut all = reads;
                all.extend(extra);
                self.define_from(&defined, &all);
                self.body(body);
                self.body(orelse);
            }
            Stmt::With { items, body, .. } => {
                for item in items {
                    match &item.vars {
                        Some(v) => self.assign(v, &item.context),
                        None => self.sink(&item.context, "with"),
                    }
                }
                self.body(body);
            }
            Stmt::Try { body, handlers, orelse, finalbody } => {
                self.body(body);
                for h in handlers {
                    let reads = h.typ.as_ref().map(|t| self.reads(t)).unwrap_or_default();
                    match &h.name {
                        Some(n) => {
                            let id = self.id(&n.name);
                            self.define_from(&[id], &reads);
                        }
                        None => {
                            for r in reads {
                                self.edges.push((r, "sink:except".into()));
                            }
                        }
                    }
                    self.body(&h.body);
                }
                self.body(orelse);
                self.body(finalbody);
            }
            Stmt::FunctionDef(def) => {
                for d in &def.decorators {
                    self.sink(d, "decorator");
                }
                let id = self.id(&def.name.name);
                self.define_from(&[id], &[]);
                self.params(&def.params);
                self.body(&def.body);
            }
            Stmt::ClassDef(def) => {
                let mut reads = Vec::new();
                for b in &def.bases {
                    match b {
                        Arg::Positional(e) | Arg::Starred(e) | Arg::DoubleStarred(e) => reads.extend(self.reads(e)),
                        Arg::Keyword { value, .. } => reads.extend(self.reads(value)),
                    }
                }
                let id = self.id(&def.name.name);
                self.define_from(&[id], &reads);
                self.body(&def.body);
            }
        }
    }

    /// Variables read by an expression, in textual order. Definitions made
    /// inside the expression (comprehension targets, walrus, lambda
    /// parameters) are recorded as edges on the way.
    fn reads(&mut self, e: &Expr) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_reads(e, &mut out);
        out
    }

    fn collect_reads(&mut self, e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Name(id) => out.push(self.id(&id.name)),
            Expr::NamedExpr { target, value } => {
                let reads = self.reads(value);
                let id = self.id(&target.name);
                self.define_from(std::slice::from_ref(&id), &reads);
                out.extend(reads);
                out.push(id);
            }
            Expr::ListComp { elt, generators }
            | Expr::SetComp { elt, generators }
            | Expr::GeneratorExp { elt, generators } => {
                self.generators(generators, out);
                self.collect_reads(elt, out);
            }
            Expr::DictComp { key, value, generators } => {
                self.generators(generators, out);
                self.collect_reads(key, out);
                self.collect_reads(value, out);
            }
            Expr::Lambda { params, body } => {
                self.params(params);
                self.collect_reads(body, out);
            }
            other => {
                struct Children<'a>(Vec<&'a Expr>);
                impl<'a> Children<'a> {
                    fn of(e: &'a Expr) -> Vec<&'a Expr> {
                        let mut c = Children(Vec::new());
                        c.push_children(e);
                        c.0
                    }
                    fn push_children(&mut self, e: &'a Expr) {
                        match e {
                            Expr::Str(parts) => {
                                for part in parts {
                                    if let StrPart::Formatted(fs) = part {
                                        self.fparts(&fs.parts);
                                    }
                                }
                            }
                            Expr::Tuple(xs) | Expr::List(xs) | Expr::Set(xs) => self.0.extend(xs.iter()),
                            Expr::Dict(items) => {
                                for item in items {
                                    match item {
                                        DictItem::KeyValue(k, v) => {
                                            self.0.push(k);
                                            self.0.push(v);
                                        }
                                        DictItem::Unpack(v) => self.0.push(v),
                                    }
                                }
                            }
                            Expr::Attribute { value, .. } => self.0.push(value),
                            Expr::Subscript { value, index } => {
                                self.0.push(value);
                                self.0.push(index);
                            }
                            Expr::Slice { lower, upper, step } => {
                                for x in [lower, upper, step].into_iter().flatten() {
                                    self.0.push(x);
                                }
                            }
                            Expr::Call { func, args } => {
                                self.0.push(func);
                                for a in args {
                                    match a {
                                        Arg::Positional(x) | Arg::Starred(x) | Arg::DoubleStarred(x) => self.0.push(x),
                                        Arg::Keyword { value, .. } => self.0.push(value),
                                    }
                                }
                            }
                            Expr::Starred(x) | Expr::Await(x) | Expr::YieldFrom(x) => self.0.push(x),
                            Expr::Yield(Some(x)) => self.0.push(x),
                            Expr::UnaryOp { operand, .. } => self.0.push(operand),
                            Expr::BinOp { left, right, .. } => {
                                self.0.push(left);
                                self.0.push(right);
                            }
                            Expr::BoolOp { values, .. } => self.0.extend(values.iter()),
                            Expr::Compare { left, comparators, .. } => {
                                self.0.push(left);
                                self.0.extend(comparators.iter());
                            }
                            Expr::IfExp { test, body, orelse } => {
                                self.0.push(body);
                                self.0.push(test);
                                self.0.push(orelse);
                            }
                            _ => {}
                        }
                    }
                    fn fparts(&mut self, parts: &'a [FPart]) {
                        for part in parts {
                            if let FPart::Field(f) = part {
                                self.0.push(&f.expr);
                                if let Some(spec) = &f.spec {
                                    self.fparts(spec);
                                }
                            }
                        }
                    }
                }
                for child in Children::of(other) {
                    self.collect_reads(child, out);
                }
            }
        }
    }

    fn generators(&mut self, generators: &[Comprehension], out: &mut Vec<String>) {
        for g in generators {
            let reads = self.reads(&g.iter);
            let mut defined = Vec::new();
            let mut extra = Vec::new();
            self.target_parts(&g.target, &mut defined, &mut extra);
            self.define_from(&defined, &reads);
            out.extend(reads);
            for cond in &g.ifs {
                self.collect_reads(cond, out);
            }
        }
    }
}

/// Percentage of candidate def-use edges found in the reference (clipped).
pub fn dataflow_match(candidate: &str, reference: &str) -> Result<f64, CompileError> {
    let c = pysyntax::parse_module(candidate)?;
    let r = pysyntax::parse_module(reference)?;
    Ok(clipped_fraction(&multiset(dataflow_edges(&c)), &multiset(dataflow_edges(&r))))
}

// ---- combined score ---------------------------------------------------

/// Per-text features, computed once and reused across many comparisons.
#[derive(Debug, Clone)]
pub struct Prepared {
    ngrams: NgramTable,
    subtrees: Option<HashMap<String, usize>>,
    edges: Option<HashMap<(String, String), usize>>,
}

impl Prepared {
    pub fn new(text: &str) -> Self {
        let tokens = pynorm::tokenize_lenient(text);
        let ngrams = NgramTable::new(&tokens.texts());
        let (subtrees, edges) = match pysyntax::parse_module(text) {
            Ok(m) => (Some(multiset(subtrees(&project(&m)))), Some(multiset(dataflow_edges(&m)))),
            Err(_) => (None, None),
        };
        Prepared { ngrams, subtrees, edges }
    }

    pub fn parses(&self) -> bool {
        self.subtrees.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.len == 0
    }
}

pub fn score_prepared(candidate: &Prepared, reference: &Prepared, config: &CodeBleuConfig) -> ScoreBreakdown {
    let flags = Flags {
        empty_candidate: candidate.is_empty(),
        empty_reference: reference.is_empty(),
        candidate_unparseable: !candidate.parses(),
        reference_unparseable: !reference.parses(),
    };
    if flags.empty_candidate || flags.empty_reference {
        log::warn!("n-gram match on an empty token stream is defined as 0");
    }
    let ngram = bleu_tables(&candidate.ngrams, &reference.ngrams, 1.0, config.smoothing);
    let weighted_ngram = bleu_tables(&candidate.ngrams, &reference.ngrams, config.keyword_weight, config.smoothing);
    let (syntax, dataflow) = match (&candidate.subtrees, &reference.subtrees, &candidate.edges, &reference.edges) {
        (Some(cs), Some(rs), Some(ce), Some(re)) => (clipped_fraction(cs, rs), clipped_fraction(ce, re)),
        _ => (0.0, 0.0),
    };
    let w = config.weights;
    let combined = w[0] * ngram + w[1] * weighted_ngram + w[2] * syntax + w[3] * dataflow;
    ScoreBreakdown { ngram, weighted_ngram, syntax, dataflow, combined, weights: w, flags }
}

/// CodeBLEU of `candidate` against `reference`.
pub fn codebleu(candidate: &str, reference: &str, config: &CodeBleuConfig) -> ScoreBreakdown {
    score_prepared(&Prepared::new(candidate), &Prepared::new(reference), config)
}

/// Mean of the combined score in both directions.
pub fn symmetric(a: &Prepared, b: &Prepared, config: &CodeBleuConfig) -> f64 {
    0.5 * (score_prepared(a, b, config).combined + score_prepared(b, a, config).combined)
}
