//! Random program generator shared by the property tests.

use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "xs", "n", "total", "_tmp"]).prop_map(String::from),
        (0u32..1000).prop_map(|n| n.to_string()),
        prop::sample::select(vec!["'s'", "\"q\"", "None", "True", "1.5", "0x1f", "b'k'"]).prop_map(String::from),
    ]
}

pub fn expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 32, 3, |inner| {
        let binop = prop::sample::select(vec!["+", "-", "*", "//", "%", "**", "<<", "&", "|", "^", "/", "@"]);
        let cmp = prop::sample::select(vec!["<", "<=", "==", "!=", "in", "not in", "is", "is not"]);
        prop_oneof![
            (inner.clone(), binop, inner.clone()).prop_map(|(a, o, b)| format!("({a} {o} {b})")),
            (inner.clone(), cmp, inner.clone()).prop_map(|(a, o, b)| format!("({a} {o} {b})")),
            (inner.clone(), prop::sample::select(vec!["and", "or"]), inner.clone())
                .prop_map(|(a, o, b)| format!("({a} {o} {b})")),
            (prop::sample::select(vec!["-", "+", "~", "not "]), inner.clone()).prop_map(|(o, a)| format!("({o}{a})")),
            prop::collection::vec(inner.clone(), 0..3).prop_map(|v| format!("f({})", v.join(", "))),
            prop::collection::vec(inner.clone(), 0..3).prop_map(|v| format!("[{}]", v.join(", "))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| format!("({})", v.join(", "))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{{{a}: {b}}}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}[{b}]")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}[{b}:]")),
            inner.clone().prop_map(|a| format!("({a}).attr")),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| format!("({a} if {b} else {c})")),
            inner.clone().prop_map(|a| format!("(lambda q: {a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("[{a} for v in {b} if v]")),
        ]
    })
}

fn target() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "xs[0]", "obj.field", "a, b"]).prop_map(String::from)
}

fn simple_stmt() -> impl Strategy<Value = String> {
    prop_oneof![
        (target(), expr()).prop_map(|(t, e)| format!("{t} = {e}")),
        (prop::sample::select(vec!["a", "total"]), prop::sample::select(vec!["+=", "-=", "*=", "//="]), expr())
            .prop_map(|(t, o, e)| format!("{t} {o} {e}")),
        expr().prop_map(|e| format!("print({e})")),
        Just("pass".to_string()),
        Just("import os.path as p".to_string()),
        Just("from math import gcd, inf".to_string()),
        expr().prop_map(|e| format!("assert {e}, 'msg'")),
        Just("del a".to_string()),
    ]
}

fn indent(block: &str) -> String {
    block.lines().map(|l| format!("    {l}\n")).collect()
}

fn stmt() -> impl Strategy<Value = String> {
    simple_stmt().prop_map(|s| s + "\n").prop_recursive(3, 24, 3, |inner| {
        let body = prop::collection::vec(inner, 1..3).prop_map(|v| v.concat());
        prop_oneof![
            (expr(), body.clone()).prop_map(|(c, b)| format!("if {c}:\n{}", indent(&b))),
            (expr(), body.clone(), body.clone())
                .prop_map(|(c, b, e)| format!("if {c}:\n{}else:\n{}", indent(&b), indent(&e))),
            (expr(), body.clone()).prop_map(|(c, b)| format!("while {c}:\n{}", indent(&b))),
            (expr(), body.clone()).prop_map(|(c, b)| format!("for i, j in {c}:\n{}", indent(&b))),
            body.clone().prop_map(|b| format!("def g(x, y=1, *args, **kw):\n{}    return x\n", indent(&b))),
            body.clone().prop_map(|b| format!("try:\n{}except ValueError as err:\n    pass\n", indent(&b))),
            body.prop_map(|b| format!("class K(Base):\n{}", indent(&b))),
        ]
    })
}

pub fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(stmt(), 1..5).prop_map(|v| v.concat())
}
