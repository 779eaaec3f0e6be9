//! Dataset model and its line-delimited JSON storage.
//!
//! Every line is one self-contained record tagged by a `"record"` field:
//! `manifest`, `problem`, `sample` or `pair`. Pair records embed their
//! problem so a single line is a usable dataset. Unknown fields on problems
//! and samples are kept in `extra` and written back unchanged.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::pynorm;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    /// Problems with matched efficient/inefficient pairs and alternates.
    Pairs,
    /// Flat code records with their problems.
    Flat,
    /// Code, time and NPI only.
    Npi,
}

impl Schema {
    pub fn name(self) -> &'static str {
        match self {
            Schema::Pairs => "pairs",
            Schema::Flat => "flat",
            Schema::Npi => "npi",
        }
    }

    pub fn max_difficulty(self) -> u32 {
        match self {
            Schema::Pairs => 18,
            Schema::Flat | Schema::Npi => 27,
        }
    }
}

impl std::str::FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pairs" => Ok(Schema::Pairs),
            "flat" => Ok(Schema::Flat),
            "npi" => Ok(Schema::Npi),
            other => Err(format!("unknown schema {other:?} (expected pairs, flat or npi)")),
        }
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoTest {
    pub input: String,
    pub expected_output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyProfile {
    pub t_min_ms: f64,
    pub t_med_ms: f64,
    pub t_max_ms: f64,
}

impl EfficiencyProfile {
    pub fn new(t_min_ms: f64, t_med_ms: f64, t_max_ms: f64) -> Result<Self, String> {
        let p = EfficiencyProfile { t_min_ms, t_med_ms, t_max_ms };
        p.check()?;
        Ok(p)
    }

    /// Ordering and positivity check.
    pub fn check(&self) -> Result<(), String> {
        let all = [self.t_min_ms, self.t_med_ms, self.t_max_ms];
        if all.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(format!("profile times must be positive, got {all:?}"));
        }
        if !(self.t_min_ms <= self.t_med_ms && self.t_med_ms <= self.t_max_ms) {
            return Err(format!(
                "profile must satisfy t_min <= t_med <= t_max, got {} / {} / {}",
                self.t_min_ms, self.t_med_ms, self.t_max_ms
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    #[serde(default)]
    pub statement: String,
    #[serde(default)]
    pub input_format: String,
    #[serde(default)]
    pub output_format: String,
    #[serde(default)]
    pub public_tests: Vec<IoTest>,
    #[serde(default)]
    pub hidden_tests: Vec<IoTest>,
    pub difficulty: u32,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    pub time_limit_ms: u64,
    pub memory_limit_kb: u64,
    /// Absent until the problem has been timed; computed from samples when
    /// needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<EfficiencyProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source_urls: Vec<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Problem {
    pub fn new(id: impl Into<String>, difficulty: u32) -> Self {
        Problem {
            id: id.into(),
            statement: String::new(),
            input_format: String::new(),
            output_format: String::new(),
            public_tests: Vec::new(),
            hidden_tests: Vec::new(),
            difficulty,
            tags: BTreeSet::new(),
            time_limit_ms: 2000,
            memory_limit_kb: 262_144,
            profile: None,
            source_urls: Vec::new(),
            extra: Map::new(),
        }
    }

    /// Hidden tests, or the public ones when no hidden tests exist.
    pub fn judge_tests(&self) -> &[IoTest] {
        if self.hidden_tests.is_empty() {
            &self.public_tests
        } else {
            &self.hidden_tests
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Human,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSample {
    pub id: String,
    pub problem_id: String,
    pub source: String,
    pub token_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_memory_kb: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub npi: Option<f64>,
    #[serde(default)]
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_ok: Option<bool>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl CodeSample {
    /// A sample with its token count filled in from the tokenizer.
    pub fn new(id: impl Into<String>, problem_id: impl Into<String>, source: impl Into<String>) -> Self {
        let source = source.into();
        let token_count = pynorm::tokenize_lenient(&source).len();
        CodeSample {
            id: id.into(),
            problem_id: problem_id.into(),
            source,
            token_count,
            measured_time_ms: None,
            scaled_time_ms: None,
            peak_memory_kb: None,
            npi: None,
            origin: Origin::Human,
            compile_ok: None,
            extra: Map::new(),
        }
    }

    /// Scaled time if present, else measured time.
    pub fn time_ms(&self) -> Option<f64> {
        self.scaled_time_ms.or(self.measured_time_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodePair {
    pub problem_id: String,
    pub inefficient: CodeSample,
    pub efficient: CodeSample,
    #[serde(default)]
    pub alternates: Vec<CodeSample>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub problems: BTreeMap<String, Problem>,
    pub samples: Vec<CodeSample>,
    pub pairs: Vec<CodePair>,
}

impl Corpus {
    pub fn problem(&self, id: &str) -> Option<&Problem> {
        self.problems.get(id)
    }

    pub fn add_problem(&mut self, problem: Problem) {
        self.problems.insert(problem.id.clone(), problem);
    }

    /// Samples grouped by problem id, in corpus order.
    pub fn samples_by_problem(&self) -> BTreeMap<&str, Vec<&CodeSample>> {
        let mut out: BTreeMap<&str, Vec<&CodeSample>> = BTreeMap::new();
        for s in &self.samples {
            out.entry(s.problem_id.as_str()).or_default().push(s);
        }
        out
    }

    /// Loose samples followed by pair members not already seen, deduplicated
    /// by id.
    pub fn all_samples(&self) -> Vec<&CodeSample> {
        let mut seen = HashSet::new();
        let members = self.pairs.iter().flat_map(|p| [&p.inefficient, &p.efficient].into_iter().chain(&p.alternates));
        self.samples.iter().chain(members).filter(|s| seen.insert(s.id.as_str())).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty() && self.samples.is_empty() && self.pairs.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: record {record_id:?}: field `{field}`: {message}")]
    Schema { line: usize, record_id: String, field: String, message: String },
}

/// One broken rule found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub record_id: String,
    pub rule: String,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}] {}: {}", self.record_id, self.rule, self.field, self.message)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io { path: path.display().to_string(), source }
}

fn record_id(v: &Value) -> String {
    let get = |v: &Value, k: &str| v.get(k).and_then(Value::as_str).map(str::to_string);
    get(v, "id")
        .or_else(|| {
            let pid = get(v, "problem_id")?;
            let ineff = v.get("inefficient").and_then(|s| get(s, "id")).unwrap_or_default();
            Some(format!("{pid}/{ineff}"))
        })
        .unwrap_or_else(|| "?".to_string())
}

/// Pulls the offending field name out of a serde message.
fn serde_field(message: &str) -> String {
    for marker in ["missing field `", "unknown field `", "field `"] {
        if let Some(pos) = message.find(marker) {
            let rest = &message[pos + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "?".to_string()
}

fn check_problem(p: &Problem, schema: Schema) -> Result<(), (String, String)> {
    if p.difficulty > schema.max_difficulty() {
        return Err((
            "difficulty".into(),
            format!("{} is outside 0..={} for schema {schema}", p.difficulty, schema.max_difficulty()),
        ));
    }
    if schema == Schema::Pairs && p.tags.is_empty() {
        return Err(("tags".into(), "must be non-empty".into()));
    }
    if p.time_limit_ms == 0 {
        return Err(("time_limit_ms".into(), "must be positive".into()));
    }
    if p.memory_limit_kb == 0 {
        return Err(("memory_limit_kb".into(), "must be positive".into()));
    }
    if let Some(profile) = &p.profile {
        profile.check().map_err(|m| ("profile".to_string(), m))?;
    }
    Ok(())
}

fn check_sample(s: &CodeSample, schema: Schema) -> Result<(), (String, String)> {
    for (field, value) in [("measured_time_ms", s.measured_time_ms), ("scaled_time_ms", s.scaled_time_ms)] {
        if let Some(t) = value {
            if !(t.is_finite() && t > 0.0) {
                return Err((field.into(), format!("must be positive, got {t}")));
            }
        }
    }
    if let Some(npi) = s.npi {
        if !(0.0..=100.0).contains(&npi) {
            return Err(("npi".into(), format!("must lie in [0, 100], got {npi}")));
        }
    }
    if schema == Schema::Npi {
        if s.npi.is_none() {
            return Err(("npi".into(), "required under schema npi".into()));
        }
        if s.time_ms().is_none() {
            return Err(("scaled_time_ms".into(), "a time is required under schema npi".into()));
        }
    }
    Ok(())
}

/// Guesses the schema of a dataset file from its manifest, or from the
/// record kinds present when there is none.
pub fn sniff_schema(path: &Path) -> Result<Schema, CorpusError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut saw_pair = false;
    let mut saw_problem = false;
    let mut all_samples_have_npi = true;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Json { line: i + 1, message: e.to_string() })?;
        match v.get("record").and_then(Value::as_str) {
            Some("manifest") => {
                if let Some(s) = v.get("schema").and_then(Value::as_str) {
                    return s.parse().map_err(|m| CorpusError::Schema {
                        line: i + 1,
                        record_id: "manifest".into(),
                        field: "schema".into(),
                        message: m,
                    });
                }
            }
            Some("pair") => saw_pair = true,
            Some("problem") => saw_problem = true,
            Some("sample") => all_samples_have_npi &= v.get("npi").is_some_and(Value::is_number),
            _ => {}
        }
    }
    Ok(if saw_pair {
        Schema::Pairs
    } else if !saw_problem && all_samples_have_npi {
        Schema::Npi
    } else {
        Schema::Flat
    })
}

/// Parses dataset text. Lines are numbered from 1; blank lines are skipped.
pub fn parse_dataset(text: &str, schema: Schema) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(line).map_err(|e| CorpusError::Json { line: line_no, message: e.to_string() })?;
        let id = record_id(&value);
        let schema_err = |record_id: &str, field: &str, message: String| CorpusError::Schema {
            line: line_no,
            record_id: record_id.to_string(),
            field: field.to_string(),
            message,
        };
        let Value::Object(mut obj) = value else {
            return Err(schema_err(&id, "record", "line is not a JSON object".into()));
        };
        let kind = match obj.remove("record") {
            Some(Value::String(s)) => s,
            Some(_) | None => return Err(schema_err(&id, "record", "missing record type tag".into())),
        };
        match kind.as_str() {
            "manifest" => {
                let declared = obj.get("schema").and_then(Value::as_str).unwrap_or_default();
                if declared != schema.name() {
                    return Err(schema_err(
                        "manifest",
                        "schema",
                        format!("file declares {declared:?} but {:?} was requested", schema.name()),
                    ));
                }
                if let Some(v) = obj.get("version").and_then(Value::as_u64) {
                    if v > FORMAT_VERSION as u64 {
                        return Err(schema_err("manifest", "version", format!("unsupported version {v}")));
                    }
                }
            }
            "problem" => {
                let p: Problem = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| schema_err(&id, &serde_field(&e.to_string()), e.to_string()))?;
                check_problem(&p, schema).map_err(|(f, m)| schema_err(&id, &f, m))?;
                insert_problem(&mut corpus, p).map_err(|m| schema_err(&id, "id", m))?;
            }
            "sample" => {
                let s: CodeSample = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| schema_err(&id, &serde_field(&e.to_string()), e.to_string()))?;
                check_sample(&s, schema).map_err(|(f, m)| schema_err(&id, &f, m))?;
                corpus.samples.push(s);
            }
            "pair" => {
                if schema != Schema::Pairs {
                    return Err(schema_err(&id, "record", format!("pair records are not allowed under schema {schema}")));
                }
                let problem = obj.remove("problem");
                let pair: CodePair = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| schema_err(&id, &serde_field(&e.to_string()), e.to_string()))?;
                for s in std::iter::once(&pair.inefficient).chain([&pair.efficient]).chain(&pair.alternates) {
                    check_sample(s, schema).map_err(|(f, m)| schema_err(&s.id, &f, m))?;
                }
                if let Some(pv) = problem {
                    let pid = record_id(&pv);
                    let p: Problem = serde_json::from_value(pv)
                        .map_err(|e| schema_err(&pid, &serde_field(&e.to_string()), e.to_string()))?;
                    check_problem(&p, schema).map_err(|(f, m)| schema_err(&pid, &f, m))?;
                    if p.id != pair.problem_id {
                        return Err(schema_err(&id, "problem_id", format!("embedded problem is {:?}", p.id)));
                    }
                    insert_problem(&mut corpus, p).map_err(|m| schema_err(&pid, "problem", m))?;
                }
                corpus.pairs.push(pair);
            }
            other => return Err(schema_err(&id, "record", format!("unknown record type {other:?}"))),
        }
    }
    Ok(corpus)
}

fn insert_problem(corpus: &mut Corpus, p: Problem) -> Result<(), String> {
    match corpus.problems.get(&p.id) {
        Some(existing) if *existing != p => Err(format!("conflicting definitions of problem {:?}", p.id)),
        Some(_) => Ok(()),
        None => {
            corpus.problems.insert(p.id.clone(), p);
            Ok(())
        }
    }
}

/// Reads a dataset file under the given schema.
pub fn load_dataset(path: &Path, schema: Schema) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_dataset(&text, schema)
}

/// Serializes a corpus: pair records (each embedding its problem), then
/// problems not referenced by any pair, then samples.
pub fn to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    let tagged = |kind: &str, v: Value| -> String {
        let mut obj = Map::new();
        obj.insert("record".into(), Value::String(kind.into()));
        if let Value::Object(fields) = v {
            obj.extend(fields);
        }
        Value::Object(obj).to_string()
    };
    let mut paired = HashSet::new();
    for pair in &corpus.pairs {
        let mut v = serde_json::to_value(pair).expect("pair serializes");
        if let (Some(p), Value::Object(obj)) = (corpus.problems.get(&pair.problem_id), &mut v) {
            obj.insert("problem".into(), serde_json::to_value(p).expect("problem serializes"));
            paired.insert(pair.problem_id.as_str());
        }
        out.push_str(&tagged("pair", v));
        out.push('\n');
    }
    for p in corpus.problems.values().filter(|p| !paired.contains(p.id.as_str())) {
        out.push_str(&tagged("problem", serde_json::to_value(p).expect("problem serializes")));
        out.push('\n');
    }
    for s in &corpus.samples {
        out.push_str(&tagged("sample", serde_json::to_value(s).expect("sample serializes")));
        out.push('\n');
    }
    out
}

/// Writes a corpus as line-delimited JSON. No manifest is written, so an
/// empty corpus produces an empty file.
pub fn save_dataset(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(to_jsonl(corpus).as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// The manifest line for a schema, for callers that want one.
pub fn manifest_line(schema: Schema) -> String {
    serde_json::json!({"record": "manifest", "schema": schema.name(), "version": FORMAT_VERSION}).to_string()
}

fn sample_violations(s: &CodeSample, out: &mut Vec<Violation>) {
    let mut push = |rule: &str, field: &str, message: String| {
        out.push(Violation { record_id: s.id.clone(), rule: rule.into(), field: field.into(), message });
    };
    if let Some(npi) = s.npi {
        if !(0.0..=100.0).contains(&npi) {
            push("npi_range", "npi", format!("{npi} outside [0, 100]"));
        }
    }
    for (field, value) in [("measured_time_ms", s.measured_time_ms), ("scaled_time_ms", s.scaled_time_ms)] {
        if let Some(t) = value {
            if !(t.is_finite() && t > 0.0) {
                push("positive_time", field, format!("{t} is not positive"));
            }
        }
    }
    if s.peak_memory_kb == Some(0) {
        push("positive_memory", "peak_memory_kb", "must be positive".into());
    }
    if let Some(n) = pynorm::token_count(&s.source) {
        if n != s.token_count {
            push("token_count", "token_count", format!("stored {} but tokenizer gives {n}", s.token_count));
        }
    }
}

/// Checks every type invariant. Never fails; problems are returned as data.
pub fn validate(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    fn push(out: &mut Vec<Violation>, record_id: &str, rule: &str, field: &str, message: String) {
        out.push(Violation { record_id: record_id.into(), rule: rule.into(), field: field.into(), message });
    }

    for (key, p) in &corpus.problems {
        if *key != p.id {
            push(&mut out, &p.id, "problem_key", "id", format!("stored under key {key:?}"));
        }
        if p.difficulty > Schema::Flat.max_difficulty() {
            push(&mut out, &p.id, "difficulty_range", "difficulty", format!("{} exceeds 27", p.difficulty));
        }
        if p.time_limit_ms == 0 {
            push(&mut out, &p.id, "positive_limit", "time_limit_ms", "must be positive".into());
        }
        if p.memory_limit_kb == 0 {
            push(&mut out, &p.id, "positive_limit", "memory_limit_kb", "must be positive".into());
        }
        if let Some(profile) = &p.profile {
            if let Err(m) = profile.check() {
                push(&mut out, &p.id, "profile_order", "profile", m);
            }
        }
    }

    let mut seen = HashSet::new();
    for s in &corpus.samples {
        sample_violations(s, &mut out);
        if !seen.insert(s.id.as_str()) {
            push(&mut out, &s.id, "unique_id", "id", "duplicate sample id".into());
        }
        // Sample-only files (npi schema) carry no problem records at all.
        if !corpus.problems.is_empty() && !corpus.problems.contains_key(&s.problem_id) {
            push(&mut out, &s.id, "problem_ref", "problem_id", format!("unknown problem {:?}", s.problem_id));
        }
    }

    for pair in &corpus.pairs {
        let pid = format!("{}/{}", pair.problem_id, pair.inefficient.id);
        if !corpus.problems.contains_key(&pair.problem_id) {
            push(&mut out, &pid, "problem_ref", "problem_id", format!("unknown problem {:?}", pair.problem_id));
        }
        for s in std::iter::once(&pair.inefficient).chain([&pair.efficient]).chain(&pair.alternates) {
            sample_violations(s, &mut out);
            if s.problem_id != pair.problem_id {
                let msg = format!("belongs to {:?}, pair is {:?}", s.problem_id, pair.problem_id);
                push(&mut out, &s.id, "pair_problem", "problem_id", msg);
            }
        }
        match (pair.efficient.scaled_time_ms, pair.inefficient.scaled_time_ms) {
            (Some(e), Some(i)) if e < i => {}
            (Some(e), Some(i)) => {
                let msg = format!("efficient {e} ms is not below inefficient {i} ms");
                push(&mut out, &pid, "pair_faster", "scaled_time_ms", msg);
            }
            _ => push(&mut out, &pid, "pair_timed", "scaled_time_ms", "both pair members need a scaled time".into()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(id: &str, pid: &str, src: &str, t: Option<f64>) -> CodeSample {
        let mut s = CodeSample::new(id, pid, src);
        s.scaled_time_ms = t;
        s
    }

    fn pair_corpus() -> Corpus {
        let mut p = Problem::new("p1", 3);
        p.tags.insert("math".into());
        p.hidden_tests.push(IoTest { input: "1\n".into(), expected_output: "1\n".into() });
        let mut c = Corpus::default();
        c.add_problem(p);
        c.pairs.push(CodePair {
            problem_id: "p1".into(),
            inefficient: sample("a", "p1", "print(1)", Some(20.0)),
            efficient: sample("b", "p1", "print(1)\n", Some(10.0)),
            alternates: vec![],
        });
        c
    }

    #[test]
    fn one_pair_round_trip() {
        let c = pair_corpus();
        assert!(validate(&c).is_empty(), "{:?}", validate(&c));
        let text = to_jsonl(&c);
        assert_eq!(text.lines().count(), 1);
        let back = parse_dataset(&text, Schema::Pairs).unwrap();
        assert_eq!(back.pairs.len(), 1);
        assert_eq!(back.problems.len(), 1);
        assert_eq!(back, c);
    }

    #[test]
    fn empty_corpus_is_empty_text() {
        assert_eq!(to_jsonl(&Corpus::default()), "");
        assert_eq!(parse_dataset("", Schema::Flat).unwrap(), Corpus::default());
    }

    #[test]
    fn absent_optionals_are_omitted() {
        let text = to_jsonl(&pair_corpus());
        assert!(!text.contains("null"));
        assert!(!text.contains("npi"));
        assert!(!text.contains("profile"));
    }

    #[test]
    fn difficulty_19_rejected_for_pairs() {
        let mut c = pair_corpus();
        c.problems.get_mut("p1").unwrap().difficulty = 19;
        let err = parse_dataset(&to_jsonl(&c), Schema::Pairs).unwrap_err();
        match err {
            CorpusError::Schema { field, record_id, .. } => {
                assert_eq!(field, "difficulty");
                assert_eq!(record_id, "p1");
            }
            other => panic!("{other}"),
        }
        // The flat profile allows up to 27.
        let mut flat = c.clone();
        flat.pairs.clear();
        flat.add_problem(c.problems["p1"].clone());
        assert!(parse_dataset(&to_jsonl(&flat), Schema::Flat).is_ok());
    }

    #[test]
    fn profile_ordering_error() {
        let line = r#"{"record":"problem","id":"q","difficulty":1,"time_limit_ms":1000,"memory_limit_kb":1024,"profile":{"t_min_ms":5,"t_med_ms":4,"t_max_ms":9}}"#;
        match parse_dataset(line, Schema::Flat).unwrap_err() {
            CorpusError::Schema { field, .. } => assert_eq!(field, "profile"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = format!("{}\n{{not json\n", to_jsonl(&pair_corpus()).trim_end());
        match parse_dataset(&text, Schema::Pairs).unwrap_err() {
            CorpusError::Json { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let line = r#"{"record":"sample","id":"s1","problem_id":"p","token_count":0}"#;
        match parse_dataset(line, Schema::Flat).unwrap_err() {
            CorpusError::Schema { field, record_id, .. } => {
                assert_eq!(field, "source");
                assert_eq!(record_id, "s1");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_fields_survive() {
        let line = r#"{"record":"sample","id":"s1","problem_id":"p","source":"","token_count":0,"memory_note":{"k":[1,2]}}"#;
        let c = parse_dataset(line, Schema::Flat).unwrap();
        assert_eq!(c.samples[0].extra["memory_note"]["k"][1], 2);
        assert!(to_jsonl(&c).contains(r#""memory_note":{"k":[1,2]}"#));
    }

    #[test]
    fn manifest_must_match() {
        let text = manifest_line(Schema::Npi);
        assert!(parse_dataset(&text, Schema::Npi).is_ok());
        assert!(parse_dataset(&text, Schema::Flat).is_err());
    }

    #[test]
    fn slower_efficient_is_one_violation() {
        let mut c = pair_corpus();
        c.pairs[0].efficient.scaled_time_ms = Some(20.0);
        let v = validate(&c);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, "pair_faster");
    }

    #[test]
    fn npi_120_is_one_violation() {
        let mut c = Corpus::default();
        let mut s = sample("s", "p", "x = 1", None);
        s.npi = Some(120.0);
        c.samples.push(s);
        let v = validate(&c);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, "npi_range");
        assert_eq!(v[0].record_id, "s");
    }

    #[test]
    fn token_count_mismatch_flagged() {
        let mut c = Corpus::default();
        let mut s = sample("s", "p", "x = 1", None);
        s.token_count = 7;
        c.samples.push(s);
        assert_eq!(validate(&c)[0].rule, "token_count");
    }

    #[test]
    fn sniffing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        save_dataset(&pair_corpus(), &path).unwrap();
        assert_eq!(sniff_schema(&path).unwrap(), Schema::Pairs);
        let mut c = Corpus::default();
        let mut s = sample("s", "p", "x = 1", Some(3.0));
        s.npi = Some(50.0);
        c.samples.push(s);
        save_dataset(&c, &path).unwrap();
        assert_eq!(sniff_schema(&path).unwrap(), Schema::Npi);
        assert_eq!(load_dataset(&path, Schema::Npi).unwrap(), c);
    }
}
