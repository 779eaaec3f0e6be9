//! Judge harness: runs a program against I/O tests under limits, takes the
//! median of repeated runs and scales the total to a fixed test count.
//!
//! Process execution goes through an [`Executor`]. [`NativeExecutor`] spawns
//! the interpreter directly, [`CommandShim`] talks to an external measuring
//! shim over one JSON line per run, and [`StubExecutor`] returns canned
//! reports for tests.

use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{CodeSample, EfficiencyProfile, IoTest};
use crate::efficiency;
use crate::par::{self, Execution};

/// Per-test times are scaled to this many tests.
pub const REFERENCE_TEST_COUNT: f64 = 47.0;

/// Stdout beyond this size is reported as a digest.
pub const STDOUT_INLINE_LIMIT: usize = 1 << 20;
/// Stdout beyond this size is not kept at all.
const STDOUT_HARD_CAP: usize = 64 << 20;
pub const STDERR_TAIL: usize = 2048;

/// Environment variable naming the Python interpreter.
pub const PYTHON_ENV: &str = "CODEEFF_PYTHON";

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("no tests to run")]
    NoTests,
    #[error("no candidates")]
    NoCandidates,
    #[error("every candidate failed estimation")]
    AllCandidatesFailed,
    #[error("executor failure: {0}")]
    Infrastructure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShimStatus {
    Ok,
    Timeout,
    RuntimeError,
    Oom,
}

/// One measured run, as reported by a shim.
///
/// When stdout exceeds [`STDOUT_INLINE_LIMIT`], `stdout` is empty and
/// `stdout_sha256` holds the hex SHA-256 of the normalized output
/// (see [`normalize_output`]) with `stdout_bytes` its raw length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimReport {
    pub status: ShimStatus,
    pub wall_ms: f64,
    pub cpu_ms: f64,
    pub max_rss_kb: u64,
    #[serde(default)]
    pub stdout: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdout_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdout_bytes: Option<u64>,
    #[serde(default)]
    pub stderr_tail: String,
}

impl ShimReport {
    pub fn ok(stdout: impl Into<String>, wall_ms: f64) -> Self {
        ShimReport {
            status: ShimStatus::Ok,
            wall_ms,
            cpu_ms: wall_ms,
            max_rss_kb: 0,
            stdout: stdout.into(),
            stdout_sha256: None,
            stdout_bytes: None,
            stderr_tail: String::new(),
        }
    }

    pub fn with_status(mut self, status: ShimStatus) -> Self {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub time_limit_ms: u64,
    pub memory_limit_kb: u64,
    pub runs_per_test: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { time_limit_ms: 2000, memory_limit_kb: 262_144, runs_per_test: 30 }
    }
}

impl Limits {
    pub fn check(&self) -> Result<(), RunnerError> {
        if self.time_limit_ms == 0 || self.memory_limit_kb == 0 || self.runs_per_test == 0 {
            return Err(RunnerError::Infrastructure(format!("limits must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Verdict for one test. Variants are ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStatus {
    Pass,
    WrongAnswer,
    RuntimeError,
    Timeout,
    CompileError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub status: TestStatus,
    pub median_wall_ms: f64,
    pub median_cpu_ms: f64,
    pub max_rss_kb: u64,
    pub runs: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub sample_id: String,
    pub per_test: Vec<TestOutcome>,
    pub passed: usize,
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_time_ms: Option<f64>,
    pub io_pass: bool,
}

pub trait Executor: Send + Sync {
    /// `Ok(Err(message))` when the source does not compile.
    fn check_compile(&self, source: &str) -> Result<Result<(), String>, RunnerError>;

    fn execute(&self, source: &str, input: &str, limits: &Limits) -> Result<ShimReport, RunnerError>;
}

fn compile_with_parser(source: &str) -> Result<(), String> {
    pysyntax::parse_module(source).map(|_| ()).map_err(|e| e.to_string())
}

/// Strips trailing whitespace from every line and drops trailing blank lines.
pub fn normalize_output(text: &str) -> String {
    let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

pub fn output_digest(text: &str) -> String {
    Sha256::digest(normalize_output(text).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn outputs_match(report: &ShimReport, expected: &str) -> bool {
    match &report.stdout_sha256 {
        Some(d) => *d == output_digest(expected),
        None => normalize_output(&report.stdout) == normalize_output(expected),
    }
}

fn tail(bytes: &[u8], n: usize) -> String {
    let start = bytes.len().saturating_sub(n);
    String::from_utf8_lossy(&bytes[start..]).into_owned()
}

fn stdout_fields(bytes: &[u8]) -> (String, Option<String>, Option<u64>) {
    let text = String::from_utf8_lossy(bytes).into_owned();
    if bytes.len() > STDOUT_INLINE_LIMIT {
        let digest = output_digest(&text);
        (String::new(), Some(digest), Some(bytes.len() as u64))
    } else {
        (text, None, None)
    }
}

fn drain<R: Read + Send + 'static>(mut r: R, cap: usize) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    })
}

/// Runs programs with a local Python interpreter.
#[derive(Debug, Clone)]
pub struct NativeExecutor {
    pub python: PathBuf,
}

impl Default for NativeExecutor {
    fn default() -> Self {
        let python = std::env::var_os(PYTHON_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("python3"));
        NativeExecutor { python }
    }
}

impl NativeExecutor {
    pub fn new(python: impl Into<PathBuf>) -> Self {
        NativeExecutor { python: python.into() }
    }

    /// Whether the interpreter can be started at all.
    pub fn available(&self) -> bool {
        Command::new(&self.python)
            .arg("-c")
            .arg("pass")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok_and(|s| s.success())
    }

    fn run_file(&self, dir: &Path, program: &Path, input: &Path, limits: &Limits) -> Result<ShimReport, RunnerError> {
        use std::os::unix::process::CommandExt;

        let stdin = fs::File::open(input)?;
        let mut cmd = Command::new(&self.python);
        cmd.arg(program).current_dir(dir).stdin(stdin).stdout(Stdio::piped()).stderr(Stdio::piped());
        let mem_bytes = limits.memory_limit_kb.saturating_mul(1024) as libc::rlim_t;
        // SAFETY: only async-signal-safe calls between fork and exec.
        unsafe {
            cmd.pre_exec(move || {
                if libc::setpgid(0, 0) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                let lim = libc::rlimit { rlim_cur: mem_bytes, rlim_max: mem_bytes };
                if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                Ok(())
            });
        }
        let start = Instant::now();
        let mut child = cmd.spawn().map_err(|e| RunnerError::Infrastructure(format!("cannot start {:?}: {e}", self.python)))?;
        let pid = child.id() as libc::pid_t;
        let out = drain(child.stdout.take().expect("piped"), STDOUT_HARD_CAP);
        let err = drain(child.stderr.take().expect("piped"), STDOUT_HARD_CAP);

        let limit = Duration::from_millis(limits.time_limit_ms);
        let mut status: libc::c_int = 0;
        // SAFETY: rusage is plain data.
        let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
        let mut timed_out = false;
        loop {
            // SAFETY: pid is our child; status and usage are valid out-pointers.
            let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
            if r == pid {
                break;
            }
            if r < 0 {
                return Err(RunnerError::Infrastructure(format!("wait4 failed: {}", std::io::Error::last_os_error())));
            }
            if start.elapsed() > limit {
                timed_out = true;
                // SAFETY: signalling our own process group.
                unsafe {
                    libc::killpg(pid, libc::SIGKILL);
                    libc::wait4(pid, &mut status, 0, &mut usage);
                }
                break;
            }
            std::thread::sleep(Duration::from_micros(500));
        }
        let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
        // Clean up anything the program left in its group.
        // SAFETY: as above; fails harmlessly when the group is gone.
        unsafe {
            libc::killpg(pid, libc::SIGKILL);
        }
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        let tv = |t: libc::timeval| t.tv_sec as f64 * 1000.0 + t.tv_usec as f64 / 1000.0;
        let cpu_ms = tv(usage.ru_utime) + tv(usage.ru_stime);
        let stderr_tail = tail(&stderr, STDERR_TAIL);

        let exited_ok = libc::WIFEXITED(status) && libc::WEXITSTATUS(status) == 0;
        let status = if timed_out {
            ShimStatus::Timeout
        } else if exited_ok {
            ShimStatus::Ok
        } else if stderr_tail.contains("MemoryError") {
            ShimStatus::Oom
        } else {
            ShimStatus::RuntimeError
        };
        let (stdout, stdout_sha256, stdout_bytes) = stdout_fields(&stdout);
        Ok(ShimReport {
            status,
            wall_ms,
            cpu_ms,
            max_rss_kb: usage.ru_maxrss.max(0) as u64,
            stdout,
            stdout_sha256,
            stdout_bytes,
            stderr_tail,
        })
    }
}

impl Executor for NativeExecutor {
    fn check_compile(&self, source: &str) -> Result<Result<(), String>, RunnerError> {
        let dir = tempfile::tempdir()?;
        let path = dir.path().join("candidate.py");
        fs::write(&path, source)?;
        let out = Command::new(&self.python)
            .arg("-c")
            .arg("import sys\nwith open(sys.argv[1], 'rb') as f:\n    compile(f.read(), 'candidate.py', 'exec')")
            .arg(&path)
            .output()
            .map_err(|e| RunnerError::Infrastructure(format!("cannot start {:?}: {e}", self.python)))?;
        if out.status.success() {
            Ok(Ok(()))
        } else {
            let err = String::from_utf8_lossy(&out.stderr);
            let last = err.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("compile error");
            Ok(Err(last.to_string()))
        }
    }

    fn execute(&self, source: &str, input: &str, limits: &Limits) -> Result<ShimReport, RunnerError> {
        let dir = tempfile::tempdir()?;
        let program = dir.path().join("main.py");
        let input_path = dir.path().join("input.txt");
        fs::write(&program, source)?;
        fs::write(&input_path, input)?;
        self.run_file(dir.path(), &program, &input_path, limits)
    }
}

/// Talks to an external shim: `shim <program> <input-file> <time_ms> <mem_kb>`
/// printing one [`ShimReport`] JSON line.
#[derive(Debug, Clone)]
pub struct CommandShim {
    pub command: PathBuf,
    pub prefix_args: Vec<String>,
    /// Extra wall time allowed beyond the program's limit before the shim
    /// itself is considered unresponsive.
    pub grace: Duration,
}

impl CommandShim {
    pub fn new(command: impl Into<PathBuf>) -> Self {
        CommandShim { command: command.into(), prefix_args: Vec::new(), grace: Duration::from_secs(10) }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.prefix_args = args.into_iter().map(Into::into).collect();
        self
    }
}

/// Parses the first non-empty line of shim output.
pub fn parse_shim_line(stdout: &str) -> Result<ShimReport, RunnerError> {
    let line = stdout
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| RunnerError::Infrastructure("shim produced no report".into()))?;
    serde_json::from_str(line).map_err(|e| RunnerError::Infrastructure(format!("bad shim report {line:?}: {e}")))
}

impl Executor for CommandShim {
    fn check_compile(&self, source: &str) -> Result<Result<(), String>, RunnerError> {
        Ok(compile_with_parser(source))
    }

    fn execute(&self, source: &str, input: &str, limits: &Limits) -> Result<ShimReport, RunnerError> {
        let dir = tempfile::tempdir()?;
        let program = dir.path().join("main.py");
        let input_path = dir.path().join("input.txt");
        fs::write(&program, source)?;
        fs::write(&input_path, input)?;
        let mut child = Command::new(&self.command)
            .args(&self.prefix_args)
            .arg(&program)
            .arg(&input_path)
            .arg(limits.time_limit_ms.to_string())
            .arg(limits.memory_limit_kb.to_string())
            .current_dir(dir.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| RunnerError::Infrastructure(format!("cannot start shim {:?}: {e}", self.command)))?;
        let out = drain(child.stdout.take().expect("piped"), STDOUT_HARD_CAP);
        let err = drain(child.stderr.take().expect("piped"), STDERR_TAIL * 4);
        let deadline = Instant::now() + Duration::from_millis(limits.time_limit_ms) + self.grace;
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if Instant::now() > deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(RunnerError::Infrastructure("shim unresponsive".into()));
            }
            std::thread::sleep(Duration::from_millis(1));
        }
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        parse_shim_line(&String::from_utf8_lossy(&stdout)).map_err(|e| match e {
            RunnerError::Infrastructure(m) => RunnerError::Infrastructure(format!("{m}; stderr: {}", tail(&stderr, 512))),
            other => other,
        })
    }
}

type StubFn = dyn Fn(&str, &str) -> ShimReport + Send + Sync;

/// Returns reports computed by a closure of `(source, input)`. Compile
/// checks use the in-crate parser.
pub struct StubExecutor {
    respond: Box<StubFn>,
}

impl StubExecutor {
    pub fn new(respond: impl Fn(&str, &str) -> ShimReport + Send + Sync + 'static) -> Self {
        StubExecutor { respond: Box::new(respond) }
    }
}

impl Executor for StubExecutor {
    fn check_compile(&self, source: &str) -> Result<Result<(), String>, RunnerError> {
        Ok(compile_with_parser(source))
    }

    fn execute(&self, source: &str, input: &str, _limits: &Limits) -> Result<ShimReport, RunnerError> {
        Ok((self.respond)(source, input))
    }
}

fn verdict(report: &ShimReport, expected: &str) -> (TestStatus, Option<String>) {
    match report.status {
        ShimStatus::Ok if outputs_match(report, expected) => (TestStatus::Pass, None),
        ShimStatus::Ok => (TestStatus::WrongAnswer, None),
        ShimStatus::Timeout => (TestStatus::Timeout, None),
        ShimStatus::RuntimeError => (TestStatus::RuntimeError, None),
        ShimStatus::Oom => (TestStatus::RuntimeError, Some("out of memory".into())),
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// `sum(per_test_times) * 47 / n_tests`.
pub fn scale_time(per_test_times: &[f64], n_tests: usize) -> f64 {
    per_test_times.iter().sum::<f64>() * REFERENCE_TEST_COUNT / n_tests as f64
}

/// Runs `source` on every test. Each test runs once; tests that pass are
/// re-run until `runs_per_test` runs exist, and timings are medians.
pub fn run_candidate(
    executor: &dyn Executor,
    sample_id: &str,
    source: &str,
    tests: &[IoTest],
    limits: &Limits,
    exec: Execution,
) -> Result<RunResult, RunnerError> {
    if tests.is_empty() {
        return Err(RunnerError::NoTests);
    }
    limits.check()?;
    if let Err(msg) = executor.check_compile(source)? {
        let outcome = TestOutcome {
            status: TestStatus::CompileError,
            median_wall_ms: 0.0,
            median_cpu_ms: 0.0,
            max_rss_kb: 0,
            runs: 0,
            note: Some(msg),
        };
        return Ok(RunResult {
            sample_id: sample_id.to_string(),
            per_test: vec![outcome; tests.len()],
            passed: 0,
            total: tests.len(),
            scaled_time_ms: None,
            io_pass: false,
        });
    }

    let first: Vec<Result<ShimReport, RunnerError>> =
        par::map(exec, tests, |t| executor.execute(source, &t.input, limits));
    let first: Vec<ShimReport> = first.into_iter().collect::<Result<_, _>>()?;

    // Remaining runs, only for tests whose first run passed.
    let extra = limits.runs_per_test as usize - 1;
    let tasks: Vec<(usize, usize)> = first
        .iter()
        .enumerate()
        .filter(|(i, r)| verdict(r, &tests[*i].expected_output).0 == TestStatus::Pass)
        .flat_map(|(i, _)| (0..extra).map(move |k| (i, k)))
        .collect();
    let more: Vec<Result<ShimReport, RunnerError>> =
        par::map(exec, &tasks, |&(i, _)| executor.execute(source, &tests[i].input, limits));
    let mut reports: Vec<Vec<ShimReport>> = first.into_iter().map(|r| vec![r]).collect();
    for (&(i, _), r) in tasks.iter().zip(more) {
        reports[i].push(r?);
    }

    let per_test: Vec<TestOutcome> = reports
        .iter()
        .zip(tests)
        .map(|(runs, test)| {
            let (status, note) =
                runs.iter().map(|r| verdict(r, &test.expected_output)).max_by_key(|v| v.0).expect("at least one run");
            TestOutcome {
                status,
                median_wall_ms: median(&mut runs.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
                median_cpu_ms: median(&mut runs.iter().map(|r| r.cpu_ms).collect::<Vec<_>>()),
                max_rss_kb: runs.iter().map(|r| r.max_rss_kb).max().unwrap_or(0),
                runs: runs.len() as u32,
                note,
            }
        })
        .collect();
    let passed = per_test.iter().filter(|t| t.status == TestStatus::Pass).count();
    let io_pass = passed == tests.len();
    let scaled_time_ms = io_pass.then(|| {
        let medians: Vec<f64> = per_test.iter().map(|t| t.median_wall_ms).collect();
        scale_time(&medians, tests.len())
    });
    Ok(RunResult { sample_id: sample_id.to_string(), per_test, passed, total: tests.len(), scaled_time_ms, io_pass })
}

/// What an estimator predicts for a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    TimeMs(f64),
    /// An NPI predicted directly, bypassing the profile.
    Npi(f64),
}

pub trait TimeEstimator: Sync {
    fn estimate(&self, sample: &CodeSample) -> Result<Estimate, String>;
}

/// Measures candidates by running them; failing candidates are errors.
pub struct Measured<'a> {
    pub executor: &'a dyn Executor,
    pub tests: &'a [IoTest],
    pub limits: Limits,
}

impl TimeEstimator for Measured<'_> {
    fn estimate(&self, sample: &CodeSample) -> Result<Estimate, String> {
        let r = run_candidate(self.executor, &sample.id, &sample.source, self.tests, &self.limits, Execution::Sequential)
            .map_err(|e| e.to_string())?;
        match r.scaled_time_ms {
            Some(t) if r.io_pass => Ok(Estimate::TimeMs(t)),
            _ => Err(format!("fails I/O tests ({}/{} passed)", r.passed, r.total)),
        }
    }
}

/// Predictions read from a JSON object of sample id to milliseconds.
#[derive(Debug, Clone, Default)]
pub struct External {
    pub predictions: HashMap<String, f64>,
}

impl External {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(External { predictions: serde_json::from_str(text)? })
    }

    pub fn from_file(path: &Path) -> Result<Self, RunnerError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| RunnerError::Infrastructure(format!("{}: {e}", path.display())))
    }
}

impl TimeEstimator for External {
    fn estimate(&self, sample: &CodeSample) -> Result<Estimate, String> {
        self.predictions.get(&sample.id).map(|t| Estimate::TimeMs(*t)).ok_or_else(|| format!("no prediction for {:?}", sample.id))
    }
}

/// Wraps a closure as an estimator.
pub struct FnEstimator<F>(pub F);

impl<F> TimeEstimator for FnEstimator<F>
where
    F: Fn(&CodeSample) -> Result<Estimate, String> + Sync,
{
    fn estimate(&self, sample: &CodeSample) -> Result<Estimate, String> {
        (self.0)(sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub sample: CodeSample,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub npi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub chosen: CodeSample,
    pub ranked: Vec<RankedCandidate>,
}

/// Ranks candidates by NPI (descending), then estimated time, then input
/// order. Candidates whose estimate failed go last, flagged.
pub fn npi_filter(
    candidates: &[CodeSample],
    estimator: &dyn TimeEstimator,
    profile: &EfficiencyProfile,
    exec: Execution,
) -> Result<FilterOutcome, RunnerError> {
    if candidates.is_empty() {
        return Err(RunnerError::NoCandidates);
    }
    let estimates = par::map(exec, candidates, |c| estimator.estimate(c));
    let mut ranked: Vec<RankedCandidate> = candidates
        .iter()
        .zip(estimates)
        .map(|(c, est)| {
            let mut r = RankedCandidate { sample: c.clone(), estimated_time_ms: None, npi: None, failure: None };
            match est {
                Ok(Estimate::TimeMs(t)) => match efficiency::npi(t, profile) {
                    Ok(v) => {
                        r.estimated_time_ms = Some(t);
                        r.npi = Some(v);
                    }
                    Err(e) => r.failure = Some(e.to_string()),
                },
                Ok(Estimate::Npi(v)) if (0.0..=100.0).contains(&v) => r.npi = Some(v),
                Ok(Estimate::Npi(v)) => r.failure = Some(format!("predicted NPI {v} outside [0, 100]")),
                Err(e) => r.failure = Some(e),
            }
            r
        })
        .collect();
    // Stable sort keeps input order among equals.
    ranked.sort_by(|a, b| {
        let key = |r: &RankedCandidate| (r.npi.is_none(), -r.npi.unwrap_or(0.0), r.estimated_time_ms.unwrap_or(f64::INFINITY));
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
    });
    if ranked[0].npi.is_none() {
        return Err(RunnerError::AllCandidatesFailed);
    }
    Ok(FilterOutcome { chosen: ranked[0].sample.clone(), ranked })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn io(input: &str, out: &str) -> IoTest {
        IoTest { input: input.into(), expected_output: out.into() }
    }

    fn echo_stub() -> StubExecutor {
        // Echoes its input; pretends each run takes 10 ms.
        StubExecutor::new(|_, input| ShimReport::ok(input, 10.0))
    }

    #[test]
    fn scale_examples() {
        assert_eq!(scale_time(&[10.0; 47], 47), 470.0);
        assert_eq!(scale_time(&[10.0], 1), 470.0);
        assert_eq!(scale_time(&[5.0, 15.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0], 10), 470.0);
    }

    #[test]
    fn output_policy() {
        assert_eq!(normalize_output("1  \n2\t\n\n\n"), "1\n2");
        assert_ne!(normalize_output(" 1"), normalize_output("1"));
        let mut r = ShimReport::ok("", 1.0);
        r.stdout_sha256 = Some(output_digest("abc\n"));
        assert!(outputs_match(&r, "abc   \n\n"));
    }

    #[test]
    fn passing_runs_repeat() {
        let limits = Limits { runs_per_test: 3, ..Limits::default() };
        let r = run_candidate(&echo_stub(), "s", "pass", &[io("1\n", "1"), io("2\n", "3")], &limits, Execution::Sequential)
            .unwrap();
        assert_eq!(r.per_test[0].status, TestStatus::Pass);
        assert_eq!(r.per_test[0].runs, 3);
        assert_eq!(r.per_test[1].status, TestStatus::WrongAnswer);
        assert_eq!(r.per_test[1].runs, 1);
        assert_eq!(r.passed, 1);
        assert!(!r.io_pass);
        assert_eq!(r.scaled_time_ms, None);
    }

    #[test]
    fn all_pass_gets_scaled_time() {
        let limits = Limits { runs_per_test: 5, ..Limits::default() };
        let tests = [io("a", "a"), io("b", "b")];
        let r = run_candidate(&echo_stub(), "s", "pass", &tests, &limits, Execution::Parallel).unwrap();
        assert!(r.io_pass);
        assert_eq!(r.scaled_time_ms, Some(470.0));
    }

    #[test]
    fn compile_error_runs_nothing() {
        let stub = StubExecutor::new(|_, _| panic!("must not run"));
        let r = run_candidate(&stub, "s", "def f(:", &[io("", "")], &Limits::default(), Execution::Sequential).unwrap();
        assert_eq!(r.per_test[0].status, TestStatus::CompileError);
        assert_eq!(r.per_test[0].runs, 0);
        assert_eq!(r.passed, 0);
    }

    #[test]
    fn oom_is_runtime_error_with_note() {
        let stub = StubExecutor::new(|_, _| ShimReport::ok("", 1.0).with_status(ShimStatus::Oom));
        let r = run_candidate(&stub, "s", "pass", &[io("", "")], &Limits::default(), Execution::Sequential).unwrap();
        assert_eq!(r.per_test[0].status, TestStatus::RuntimeError);
        assert_eq!(r.per_test[0].note.as_deref(), Some("out of memory"));
    }

    #[test]
    fn shim_line_round_trip() {
        let r = ShimReport::ok("1\n", 3.5);
        let line = serde_json::to_string(&r).unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(parse_shim_line(&format!("{line}\n")).unwrap(), r);
        assert!(parse_shim_line("").is_err());
        assert!(parse_shim_line("{\"status\":\"weird\"}").is_err());
    }

    fn cand(id: &str) -> CodeSample {
        CodeSample::new(id, "p", "pass")
    }

    #[test]
    fn filter_prefers_fast() {
        let profile = EfficiencyProfile::new(100.0, 200.0, 400.0).unwrap();
        let times: HashMap<String, f64> = [("a".to_string(), 100.0), ("b".to_string(), 300.0)].into();
        let est = External { predictions: times };
        let out = npi_filter(&[cand("b"), cand("a")], &est, &profile, Execution::Sequential).unwrap();
        assert_eq!(out.chosen.id, "a");
        assert_eq!(out.ranked[0].npi, Some(100.0));
        assert_eq!(out.ranked[1].npi, Some(25.0));
    }

    #[test]
    fn filter_ties_and_failures() {
        let profile = EfficiencyProfile::new(100.0, 200.0, 400.0).unwrap();
        let est = FnEstimator(|s: &CodeSample| if s.id == "bad" { Err("boom".into()) } else { Ok(Estimate::TimeMs(150.0)) });
        let out = npi_filter(&[cand("bad"), cand("x"), cand("y")], &est, &profile, Execution::Sequential).unwrap();
        assert_eq!(out.chosen.id, "x");
        assert_eq!(out.ranked[2].sample.id, "bad");
        assert_eq!(out.ranked[2].failure.as_deref(), Some("boom"));
        let single = npi_filter(&[cand("z")], &est, &profile, Execution::Sequential).unwrap();
        assert_eq!(single.chosen.id, "z");
        assert!(matches!(npi_filter(&[cand("bad")], &est, &profile, Execution::Sequential), Err(RunnerError::AllCandidatesFailed)));
    }

    #[test]
    fn direct_npi_estimates() {
        let profile = EfficiencyProfile::new(100.0, 200.0, 400.0).unwrap();
        let est = FnEstimator(|s: &CodeSample| Ok(Estimate::Npi(if s.id == "a" { 40.0 } else { 90.0 })));
        let out = npi_filter(&[cand("a"), cand("b")], &est, &profile, Execution::Sequential).unwrap();
        assert_eq!(out.chosen.id, "b");
        assert_eq!(out.ranked[0].estimated_time_ms, None);
    }
}
