//! Helpers shared by the integration tests and the acceptance harness:
//! fixture loading, independent oracles and a stub executor for the mini
//! corpus.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;

use codeeff_core::corpus::{self, Corpus, Schema};
use codeeff_core::runner::{ShimReport, StubExecutor};
use pysyntax::TokenKind;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub struct Program {
    pub name: String,
    pub source: String,
    pub input: Option<String>,
}

/// The 50 fixture programs, sorted by name.
pub fn programs() -> Vec<Program> {
    let dir = fixture_dir().join("programs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("fixture dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "py"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Program {
            name: p.file_stem().unwrap().to_string_lossy().into_owned(),
            source: std::fs::read_to_string(&p).unwrap(),
            input: std::fs::read_to_string(p.with_extension("in")).ok(),
        })
        .collect()
}

pub fn mini_corpus_path() -> PathBuf {
    fixture_dir().join("mini/mini_corpus.jsonl")
}

pub fn mini_corpus() -> Corpus {
    corpus::load_dataset(&mini_corpus_path(), Schema::Flat).expect("mini corpus loads")
}

pub fn python() -> Option<String> {
    let py = std::env::var("CODEEFF_PYTHON").unwrap_or_else(|_| "python3".into());
    Command::new(&py).arg("-c").arg("pass").status().ok().filter(|s| s.success()).map(|_| py)
}

/// Runs `source` under the interpreter and returns stdout.
pub fn run_python(py: &str, source: &str, input: &str) -> Result<String, String> {
    use std::io::Write;
    let mut child = Command::new(py)
        .arg("-c")
        .arg(source)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(input.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

// ---- consistent renaming ------------------------------------------------

/// Renames every name in `renames` wherever it occurs as a plain name
/// token. Attribute names (after `.`) and keyword-argument names in calls
/// are left alone; parameters with defaults inside `def` headers are
/// renamed. Names that occur inside f-strings must not be passed in.
pub fn rename_tokens(source: &str, renames: &BTreeMap<String, String>) -> String {
    let tokens = pysyntax::tokenize(source).expect("fixture lexes");
    // true for a def parameter list, false for other brackets.
    let mut brackets: Vec<bool> = Vec::new();
    let mut edits = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let prev = |k: usize| i.checked_sub(k).map(|j| &tokens[j]);
        if t.kind == TokenKind::Op {
            match t.text.as_str() {
                "(" | "[" | "{" => {
                    let is_def = t.text == "(" && prev(2).is_some_and(|p| p.is_keyword("def"));
                    brackets.push(is_def);
                }
                ")" | "]" | "}" => {
                    brackets.pop();
                }
                _ => {}
            }
            continue;
        }
        if t.kind != TokenKind::Name {
            continue;
        }
        let Some(new) = renames.get(&t.text) else { continue };
        if prev(1).is_some_and(|p| p.is_op(".")) {
            continue;
        }
        let next_is_assign = tokens.get(i + 1).is_some_and(|n| n.is_op("="));
        let after_sep = prev(1).is_some_and(|p| p.is_op("(") || p.is_op(",") || p.is_op("**"));
        let in_call = brackets.last().is_some_and(|is_def| !is_def);
        if next_is_assign && after_sep && in_call {
            continue;
        }
        edits.push((t.span, new.as_str()));
    }
    let mut out = String::with_capacity(source.len());
    let mut pos = 0;
    for (span, new) in edits {
        out.push_str(&source[pos..span.start]);
        out.push_str(new);
        pos = span.end;
    }
    out.push_str(&source[pos..]);
    out
}

/// Names appearing inside f-string tokens.
pub fn fstring_words(source: &str) -> BTreeSet<String> {
    let mut words = BTreeSet::new();
    for t in pysyntax::tokenize(source).expect("fixture lexes") {
        if t.kind == TokenKind::FString {
            let mut cur = String::new();
            for c in t.text.chars().chain(std::iter::once(' ')) {
                if c.is_alphanumeric() || c == '_' {
                    cur.push(c);
                } else if !cur.is_empty() {
                    words.insert(std::mem::take(&mut cur));
                }
            }
        }
    }
    words
}

/// A random renaming of a random subset of `names` to fresh identifiers
/// that cannot collide with anything already in `source`.
pub fn random_renaming<R: Rng>(rng: &mut R, source: &str, names: &[String]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        if rng.random_bool(0.7) {
            let fresh = loop {
                let len = rng.random_range(1..8);
                let tail: String = (0..len).map(|_| (b'a' + rng.random_range(0..26u8)) as char).collect();
                let cand = format!("q{i}_{tail}");
                if !source.contains(&cand) {
                    break cand;
                }
            };
            out.insert(name.clone(), fresh);
        }
    }
    out
}

// ---- BLEU oracle --------------------------------------------------------

/// Sentence BLEU, orders 1..=4 with uniform weights, brevity penalty
/// `exp(1 - r/c)` when `c <= r`. Orders the candidate is too short for are
/// left out of the geometric mean. A zero match count becomes `eps / total`
/// or, with `add_one`, `1 / (total + 1)`. Counting is done by direct
/// comparison of windows, without hashing.
pub fn bleu_oracle(cand: &[&str], refr: &[&str], eps: f64, add_one: bool) -> f64 {
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut logs = Vec::new();
    for n in 1..=4usize {
        if cand.len() < n {
            continue;
        }
        let cw: Vec<&[&str]> = cand.windows(n).collect();
        let rw: Vec<&[&str]> = if refr.len() >= n { refr.windows(n).collect() } else { Vec::new() };
        let mut seen: Vec<&[&str]> = Vec::new();
        let mut matched = 0usize;
        for g in &cw {
            if seen.contains(g) {
                continue;
            }
            seen.push(g);
            let in_cand = cw.iter().filter(|x| *x == g).count();
            let in_ref = rw.iter().filter(|x| *x == g).count();
            matched += in_cand.min(in_ref);
        }
        let total = cw.len() as f64;
        let p = if matched > 0 {
            matched as f64 / total
        } else if add_one {
            1.0 / (total + 1.0)
        } else {
            eps / total
        };
        logs.push(p.ln());
    }
    let geo = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let (c, r) = (cand.len() as f64, refr.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * bp * geo
}

// ---- assignment oracle -------------------------------------------------

/// Best total over all injective row-to-column maps of the smaller side.
pub fn brute_force_assignment(scores: &[Vec<f64>]) -> f64 {
    let n = scores.len();
    let m = scores.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return 0.0;
    }
    fn go(scores: &[Vec<f64>], row: usize, used: &mut Vec<bool>, transpose: bool) -> f64 {
        let rows = if transpose { scores[0].len() } else { scores.len() };
        if row == rows {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..used.len() {
            if used[c] {
                continue;
            }
            used[c] = true;
            let v = if transpose { scores[c][row] } else { scores[row][c] };
            best = best.max(v + go(scores, row + 1, used, transpose));
            used[c] = false;
        }
        best
    }
    if n <= m {
        go(scores, 0, &mut vec![false; m], false)
    } else {
        go(scores, 0, &mut vec![false; n], true)
    }
}

// ---- rank correlation oracle ------------------------------------------

/// Ranks by counting: rank = 1 + #smaller + (#equal - 1) / 2.
pub fn ranks_by_counting(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

// ---- stub executor for the mini corpus ----------------------------------

/// Canned reports for the mini corpus: every solution prints the expected
/// output, fast solutions take a per-test time placing them between the
/// profile's minimum and median, slow ones between median and maximum.
pub fn mini_stub(corpus: &Corpus) -> StubExecutor {
    let mut table: HashMap<(String, String), (String, f64)> = HashMap::new();
    for s in &corpus.samples {
        let p = &corpus.problems[&s.problem_id];
        let prof = p.profile.expect("mini problems carry profiles");
        let fast = s.id.ends_with("-fast");
        let target = if fast { (prof.t_min_ms * prof.t_med_ms).sqrt() } else { (prof.t_med_ms * prof.t_max_ms).sqrt() };
        let per_test = target / 47.0;
        for t in p.judge_tests() {
            table.insert((s.source.clone(), t.input.clone()), (t.expected_output.clone(), per_test));
        }
    }
    StubExecutor::new(move |source, input| match table.get(&(source.to_string(), input.to_string())) {
        Some((out, ms)) => {
            let mut r = ShimReport::ok(out.clone(), *ms);
            r.cpu_ms = *ms;
            r
        }
        None => ShimReport::ok("", 1.0).with_status(codeeff_core::runner::ShimStatus::RuntimeError),
    })
}

// ---- end-to-end pipeline ------------------------------------------------

pub struct E2eOutcome {
    /// (sample id, passed tests, total tests)
    pub runs: Vec<(String, usize, usize)>,
    /// problem id -> (npi of fast, npi of slow)
    pub npi: BTreeMap<String, (f64, f64)>,
    pub pairs: Vec<codeeff_core::corpus::CodePair>,
    pub violations: Vec<codeeff_core::corpus::Violation>,
    pub dropped: Vec<codeeff_core::pairing::DropRecord>,
    pub elapsed: std::time::Duration,
}

impl E2eOutcome {
    pub fn all_pass(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(|(_, p, t)| p == t)
    }

    pub fn npi_ordered(&self) -> usize {
        self.npi.values().filter(|(f, s)| f > s).count()
    }

    pub fn pairs_strictly_faster(&self) -> bool {
        self.pairs.iter().all(|p| match (p.efficient.scaled_time_ms, p.inefficient.scaled_time_ms) {
            (Some(e), Some(i)) => e < i,
            _ => false,
        })
    }
}

/// Times every sample of `corpus` with `executor`, scores NPI against the
/// stored profiles, then builds pairs.
pub fn run_e2e(
    corpus: &Corpus,
    executor: &dyn codeeff_core::runner::Executor,
    runs_per_test: u32,
    exec: codeeff_core::Execution,
) -> E2eOutcome {
    use codeeff_core::efficiency;
    use codeeff_core::pairing::{build_pairs, PairingConfig};
    use codeeff_core::runner::{run_candidate, Limits};

    let start = std::time::Instant::now();
    let mut timed = corpus.clone();
    let mut runs = Vec::new();
    let mut npis: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for s in &mut timed.samples {
        let p = &corpus.problems[&s.problem_id];
        let limits = Limits { time_limit_ms: p.time_limit_ms, memory_limit_kb: p.memory_limit_kb, runs_per_test };
        let r = run_candidate(executor, &s.id, &s.source, p.judge_tests(), &limits, exec).expect("runner works");
        runs.push((s.id.clone(), r.passed, r.total));
        s.scaled_time_ms = r.scaled_time_ms;
        let npi = r.scaled_time_ms.and_then(|t| efficiency::npi(t, p.profile.as_ref()?).ok());
        s.npi = npi;
        let entry = npis.entry(s.problem_id.clone()).or_insert((f64::NAN, f64::NAN));
        let v = npi.unwrap_or(f64::NAN);
        if s.id.ends_with("-fast") {
            entry.0 = v;
        } else {
            entry.1 = v;
        }
    }
    let out = build_pairs(&timed, &PairingConfig::default(), exec).expect("pipeline runs");
    let violations = codeeff_core::corpus::validate(&out.corpus);
    E2eOutcome { runs, npi: npis, pairs: out.corpus.pairs, violations, dropped: out.dropped, elapsed: start.elapsed() }
}
