//! Command-line front end. [`dispatch`] parses arguments and runs one
//! subcommand, returning what would be printed and the exit code, so the
//! binary is a thin shell around it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use codeeff_core::codebleu::{self, CodeBleuConfig, Smoothing};
use codeeff_core::corpus::{self, CodeSample, Corpus, EfficiencyProfile, Schema};
use codeeff_core::efficiency;
use codeeff_core::evalstats::{self, PredictionRecord, ScoredSample};
use codeeff_core::ioccb;
use codeeff_core::pairing::{self, PairingConfig};
use codeeff_core::par;
use codeeff_core::pynorm::{self, Denylist};
use codeeff_core::runner::{self, CommandShim, Executor, External, Limits, Measured, NativeExecutor, TimeEstimator};
use codeeff_core::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "codeeff", version, about = "Code-efficiency benchmark toolkit")]
struct Cli {
    /// Print exactly one JSON document on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized step (overrides a config file seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for run, filter and build-pairs (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Strip noise statements and standardize identifiers.
    Normalize {
        file: PathBuf,
        /// Statement patterns to strip, one per line (default: built-in list).
        #[arg(long)]
        denylist: Option<PathBuf>,
        /// Only standardize identifiers.
        #[arg(long)]
        no_strip: bool,
    },
    #[command(subcommand)]
    Score(Score),
    /// Judge one program against a problem's tests.
    Run {
        file: PathBuf,
        #[arg(long)]
        problem: String,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        judge: JudgeArgs,
    },
    /// Pick the candidate with the highest NPI.
    Filter {
        candidates_dir: PathBuf,
        #[arg(long)]
        problem: String,
        /// Dataset holding the problem and its efficiency profile.
        #[arg(long)]
        dataset: PathBuf,
        /// `measured` or `external:<file>` (JSON object of id to milliseconds).
        #[arg(long, default_value = "measured")]
        estimator: String,
        #[command(flatten)]
        judge: JudgeArgs,
    },
    /// Build efficient/inefficient pairs from a timed solution corpus.
    BuildPairs {
        dataset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// key=value file with pairing settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        denylist: Option<PathBuf>,
    },
    #[command(subcommand)]
    Stats(Stats),
    /// Per-difficulty and per-tag summary of scored samples, as CSV.
    Report {
        scores: PathBuf,
        dataset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    #[command(subcommand)]
    Eval(Eval),
}

#[derive(Subcommand, Debug)]
enum Score {
    Codebleu {
        candidate: PathBuf,
        reference: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    Ioccb {
        candidate: PathBuf,
        truth: PathBuf,
        #[arg(long = "alt")]
        alternates: Vec<PathBuf>,
        #[command(flatten)]
        metric: MetricArgs,
    },
    Npi {
        #[arg(long)]
        time: f64,
        /// `t_min,t_med,t_max` in milliseconds.
        #[arg(long)]
        profile: String,
    },
}

#[derive(Subcommand, Debug)]
enum Stats {
    Breakpoints {
        #[arg(long)]
        difficulty: u32,
        dataset: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Eval {
    Rmse { predictions: PathBuf },
    Spearman { predictions: PathBuf },
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Four comma-separated weights summing to 1.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    keyword_weight: Option<f64>,
    /// `epsilon:<value>` or `add-one`.
    #[arg(long)]
    smoothing: Option<String>,
}

#[derive(Args, Debug)]
struct JudgeArgs {
    #[arg(long, default_value_t = 30)]
    runs: u32,
    /// Defaults to the problem's limit.
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    memory_limit_kb: Option<u64>,
    /// External shim command; programs run with a local interpreter otherwise.
    #[arg(long)]
    shim: Option<PathBuf>,
    /// Arguments placed before the program path when calling the shim.
    #[arg(long = "shim-arg", allow_hyphen_values = true)]
    shim_args: Vec<String>,
}

struct Ctx {
    json: bool,
    seed: Option<u64>,
    jobs: Option<usize>,
}

/// What a subcommand prints: a JSON document and its human rendering.
struct Output {
    doc: serde_json::Value,
    text: String,
}

impl Output {
    fn new(doc: impl Serialize, text: impl Into<String>) -> Result<Self> {
        Ok(Output { doc: serde_json::to_value(doc)?, text: text.into() })
    }
}

pub fn dispatch<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome { exit_code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                CommandOutcome { exit_code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let ctx = Ctx { json: cli.json, seed: cli.seed, jobs: cli.jobs };
    match execute(&ctx, cli.command) {
        Ok(out) => {
            let stdout = if ctx.json {
                format!("{}\n", serde_json::to_string_pretty(&out.doc).expect("value serializes"))
            } else {
                out.text
            };
            CommandOutcome { exit_code: EXIT_OK, stdout, stderr: String::new() }
        }
        Err(e) => CommandOutcome { exit_code: EXIT_FAILURE, stdout: String::new(), stderr: format!("error: {e:#}\n") },
    }
}

fn execute(ctx: &Ctx, command: Command) -> Result<Output> {
    match command {
        Command::Normalize { file, denylist, no_strip } => {
            let source = read(&file)?;
            let normalized = if no_strip {
                pynorm::standardize_identifiers(&source)
            } else {
                pynorm::normalize(&source, &load_denylist(denylist.as_deref())?)
            }
            .with_context(|| format!("{} does not parse", file.display()))?;
            let text = normalized.source.clone();
            Output::new(normalized, text)
        }
        Command::Score(s) => score(s),
        Command::Run { file, problem, dataset, judge } => {
            let corpus = load(&dataset)?;
            let p = corpus.problem(&problem).ok_or_else(|| anyhow!("no problem {problem:?} in {}", dataset.display()))?;
            let limits = judge.limits(p.time_limit_ms, p.memory_limit_kb);
            let executor = judge.executor()?;
            let source = read(&file)?;
            let id = file_id(&file);
            let r = par::with_jobs(ctx.jobs, || {
                runner::run_candidate(executor.as_ref(), &id, &source, p.judge_tests(), &limits, Execution::default())
            })?;
            let mut text = format!("{}: passed {}/{}", r.sample_id, r.passed, r.total);
            if let Some(t) = r.scaled_time_ms {
                text.push_str(&format!(", scaled time {t:.3} ms"));
            }
            text.push('\n');
            for (i, t) in r.per_test.iter().enumerate() {
                text.push_str(&format!("  test {i}: {:?} {:.3} ms\n", t.status, t.median_wall_ms));
            }
            Output::new(r, text)
        }
        Command::Filter { candidates_dir, problem, dataset, estimator, judge } => {
            filter(ctx, &candidates_dir, &problem, &dataset, &estimator, &judge)
        }
        Command::BuildPairs { dataset, output, config, denylist } => {
            let corpus = load(&dataset)?;
            let mut cfg = match &config {
                Some(path) => parse_config(&read(path)?).with_context(|| format!("in {}", path.display()))?,
                None => PairingConfig::default(),
            };
            if let Some(seed) = ctx.seed {
                cfg.seed = seed;
            }
            let deny = load_denylist(denylist.as_deref())?;
            let built = par::with_jobs(ctx.jobs, || pairing::build_pairs_with(&corpus, &cfg, &deny, Execution::default()))?;
            let text = format!("{}\n{}", corpus::manifest_line(Schema::Pairs), corpus::to_jsonl(&built.corpus));
            fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
            let doc = json!({
                "output": output,
                "problems": built.corpus.problems.len(),
                "pairs": built.corpus.pairs.len(),
                "dropped": built.dropped,
            });
            let summary = format!(
                "{} pairs over {} problems written to {} ({} drops)\n",
                built.corpus.pairs.len(),
                built.corpus.problems.len(),
                output.display(),
                built.dropped.len()
            );
            Output::new(doc, summary)
        }
        Command::Stats(Stats::Breakpoints { difficulty, dataset }) => {
            let table = efficiency::bucket_proportions(&load(&dataset)?, difficulty)?;
            let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
            let text = format!(
                "difficulty {} over {} problems\nbreakpoints  {}\nweights      {}\nnormalized   {}\n",
                table.difficulty,
                table.n_problems(),
                fmt(&table.breakpoints),
                fmt(&table.bucket_weights),
                fmt(&table.normalized_weights)
            );
            Output::new(table, text)
        }
        Command::Report { scores, dataset, output } => {
            let scored: Vec<ScoredSample> = read_records(&scores)?;
            let rows = evalstats::grouped_report(&scored, &load(&dataset)?, &evalstats::default_buckets());
            let csv = evalstats::report_csv(&rows);
            fs::write(&output, &csv).with_context(|| format!("writing {}", output.display()))?;
            Output::new(rows, csv)
        }
        Command::Eval(Eval::Rmse { predictions }) => {
            let records: Vec<PredictionRecord> = read_records(&predictions)?;
            let value = evalstats::rmse(&records)?;
            Output::new(json!({ "rmse": value, "n": records.len() }), format!("{value}\n"))
        }
        Command::Eval(Eval::Spearman { predictions }) => {
            let records: Vec<PredictionRecord> = read_records(&predictions)?;
            let predicted: Vec<f64> = records.iter().map(|r| r.predicted).collect();
            let actual: Vec<f64> = records.iter().map(|r| r.actual).collect();
            let r = evalstats::spearman(&predicted, &actual)?;
            Output::new(r, format!("rho {} (p = {:.3e}, n = {})\n", r.rho, r.p_value, r.n))
        }
    }
}

fn score(s: Score) -> Result<Output> {
    match s {
        Score::Codebleu { candidate, reference, metric } => {
            let b = codebleu::codebleu(&read(&candidate)?, &read(&reference)?, &metric.config()?);
            let text = format!(
                "combined {:.4}\nngram {:.4}\nweighted_ngram {:.4}\nsyntax {:.4}\ndataflow {:.4}\n",
                b.combined, b.ngram, b.weighted_ngram, b.syntax, b.dataflow
            );
            Output::new(b, text)
        }
        Score::Ioccb { candidate, truth, alternates, metric } => {
            let alts = alternates.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
            let alt_refs: Vec<&str> = alts.iter().map(String::as_str).collect();
            let r = ioccb::ioccb_with(&read(&candidate)?, &read(&truth)?, &alt_refs, &metric.config()?, Execution::default())?;
            let text = format!("{:.4}{}\n", r.score, if r.normalization_applied { "" } else { " (raw, not normalized)" });
            Output::new(r, text)
        }
        Score::Npi { time, profile } => {
            let value = efficiency::npi(time, &parse_profile(&profile)?)?;
            Output::new(json!({ "npi": value }), format!("{value}\n"))
        }
    }
}

fn filter(ctx: &Ctx, dir: &Path, problem: &str, dataset: &Path, estimator: &str, judge: &JudgeArgs) -> Result<Output> {
    let corpus = load(dataset)?;
    let p = corpus.problem(problem).ok_or_else(|| anyhow!("no problem {problem:?} in {}", dataset.display()))?;
    let profile = match p.profile {
        Some(profile) => profile,
        None => {
            let times: Vec<f64> =
                corpus.all_samples().into_iter().filter(|s| s.problem_id == problem).filter_map(CodeSample::time_ms).collect();
            efficiency::profile_from_times(&times).context("problem has no profile and no timed samples")?
        }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "py"));
    paths.sort();
    let candidates =
        paths.iter().map(|path| Ok(CodeSample::new(file_id(path), problem, read(path)?))).collect::<Result<Vec<_>>>()?;

    let executor;
    let est: Box<dyn TimeEstimator + '_> = match estimator.split_once(':') {
        None if estimator == "measured" => {
            executor = judge.executor()?;
            let limits = judge.limits(p.time_limit_ms, p.memory_limit_kb);
            Box::new(Measured { executor: executor.as_ref(), tests: p.judge_tests(), limits })
        }
        Some(("external", file)) => Box::new(External::from_file(Path::new(file))?),
        _ => bail!("unknown estimator {estimator:?} (expected measured or external:<file>)"),
    };
    let out = par::with_jobs(ctx.jobs, || runner::npi_filter(&candidates, est.as_ref(), &profile, Execution::default()))?;

    let path_of = |id: &str| paths.iter().find(|p| file_id(p) == id).cloned().unwrap_or_default();
    let chosen = path_of(&out.chosen.id);
    let ranking: Vec<_> = out
        .ranked
        .iter()
        .map(|r| {
            json!({
                "id": r.sample.id,
                "path": path_of(&r.sample.id),
                "estimated_time_ms": r.estimated_time_ms,
                "npi": r.npi,
                "failure": r.failure,
            })
        })
        .collect();
    let mut text = format!("{}\n", chosen.display());
    for r in &out.ranked {
        match (&r.npi, &r.failure) {
            (Some(v), _) => text.push_str(&format!("  {} npi {v:.3}\n", r.sample.id)),
            (None, Some(f)) => text.push_str(&format!("  {} failed: {f}\n", r.sample.id)),
            (None, None) => text.push_str(&format!("  {}\n", r.sample.id)),
        }
    }
    Output::new(json!({ "chosen": chosen, "ranking": ranking }), text)
}

impl MetricArgs {
    fn config(&self) -> Result<CodeBleuConfig> {
        let base = CodeBleuConfig::default();
        let weights = match &self.weights {
            Some(w) => parse_floats::<4>(w).context("--weights")?,
            None => base.weights,
        };
        let mut cfg = CodeBleuConfig::new(weights, self.keyword_weight.unwrap_or(base.keyword_weight))?;
        if let Some(s) = &self.smoothing {
            cfg = cfg.with_smoothing(parse_smoothing(s)?);
        }
        Ok(cfg)
    }
}

impl JudgeArgs {
    fn limits(&self, time_limit_ms: u64, memory_limit_kb: u64) -> Limits {
        Limits {
            time_limit_ms: self.time_limit_ms.unwrap_or(time_limit_ms),
            memory_limit_kb: self.memory_limit_kb.unwrap_or(memory_limit_kb),
            runs_per_test: self.runs,
        }
    }

    fn executor(&self) -> Result<Box<dyn Executor>> {
        if let Some(shim) = &self.shim {
            return Ok(Box::new(CommandShim::new(shim).with_args(self.shim_args.iter().cloned())));
        }
        let native = NativeExecutor::default();
        if !native.available() {
            bail!("cannot start {} (set {} or pass --shim)", native.python.display(), runner::PYTHON_ENV);
        }
        Ok(Box::new(native))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path) -> Result<Corpus> {
    let schema = corpus::sniff_schema(path).with_context(|| format!("reading {}", path.display()))?;
    corpus::load_dataset(path, schema).with_context(|| format!("loading {}", path.display()))
}

fn load_denylist(path: Option<&Path>) -> Result<Denylist> {
    match path {
        Some(p) => Denylist::from_file(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(Denylist::default()),
    }
}

fn file_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// A JSON array, or one JSON value per non-empty line.
fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N]> {
    let parts = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| anyhow!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_profile(s: &str) -> Result<EfficiencyProfile> {
    let [lo, med, hi] = parse_floats::<3>(s).context("--profile")?;
    EfficiencyProfile::new(lo, med, hi).map_err(|e| anyhow!(e))
}

fn parse_smoothing(s: &str) -> Result<Smoothing> {
    match s.split_once(':') {
        _ if s == "add-one" || s == "add_one" => Ok(Smoothing::AddOne),
        Some(("epsilon", v)) => Ok(Smoothing::Epsilon(v.parse().context("smoothing epsilon")?)),
        _ => bail!("unknown smoothing {s:?} (expected epsilon:<value> or add-one)"),
    }
}

/// Reads `key = value` lines into a pairing configuration. Blank lines and
/// `#` comments are ignored; unknown keys are errors.
pub fn parse_config(text: &str) -> Result<PairingConfig> {
    let mut cfg = PairingConfig::default();
    let (mut weights, mut keyword_weight, mut smoothing) = (None, None, None);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: &dyn std::fmt::Display| anyhow!("line {}: {key}: {e}", i + 1);
        match key {
            "dedup_threshold" => cfg.dedup_threshold = value.parse().map_err(|e| bad(&e))?,
            "abs_token_limit" => cfg.abs_token_limit = value.parse().map_err(|e| bad(&e))?,
            "rel_length_factor" => cfg.rel_length_factor = value.parse().map_err(|e| bad(&e))?,
            "cluster_scale" => cfg.cluster_scale = value.parse().map_err(|e| bad(&e))?,
            "efficiency_split_npi" => cfg.efficiency_split_npi = value.parse().map_err(|e| bad(&e))?,
            "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
            "weights" => weights = Some(parse_floats::<4>(value).map_err(|e| bad(&e))?),
            "keyword_weight" => keyword_weight = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
            "smoothing" => smoothing = Some(parse_smoothing(value).map_err(|e| bad(&e))?),
            _ => bail!("line {}: unknown key {key:?}", i + 1),
        }
    }
    if weights.is_some() || keyword_weight.is_some() {
        let smoothing = cfg.codebleu.smoothing;
        cfg.codebleu = CodeBleuConfig::new(
            weights.unwrap_or(cfg.codebleu.weights),
            keyword_weight.unwrap_or(cfg.codebleu.keyword_weight),
        )?
        .with_smoothing(smoothing);
    }
    if let Some(s) = smoothing {
        cfg.codebleu.smoothing = s;
    }
    cfg.check()?;
    Ok(cfg)
}
