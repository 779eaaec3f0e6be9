//! Acceptance checks: one PASS/FAIL line per criterion. Tolerances are the
//! constants below. Run with `cargo test -p codeeff-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use codeeff_core::codebleu::{codebleu, CodeBleuConfig};
use codeeff_core::corpus::{CodeSample, Corpus, EfficiencyProfile, Problem};
use codeeff_core::efficiency::{bucket_proportions, npi, time_breakpoint};
use codeeff_core::evalstats::{rmse, rmse_values, spearman, PredictionRecord, Quantity};
use codeeff_core::ioccb::ioccb;
use codeeff_core::pairing::assign_max;
use codeeff_core::pynorm;
use codeeff_core::runner::{npi_filter, Estimate, FnEstimator, NativeExecutor};
use codeeff_core::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NPI_EXACT_TOL: f64 = 1e-9;
const NPI_EXACT_BUDGET: Duration = Duration::from_secs(1);
const NPI_DRAWS: usize = 10_000;
const NPI_LIMIT_TOL: f64 = 1e-6;
const RENAMINGS_PER_FILE: usize = 10;
const SELF_SCORE_TOL: f64 = 1e-9;
const PROJECTION_PAIRS: usize = 20;
const PROJECTION_TOL: f64 = 1e-6;
const HUNGARIAN_TRIALS: usize = 200;
const HUNGARIAN_MAX_DIM: usize = 7;
const SPEARMAN_TRIALS: usize = 1000;
const SPEARMAN_MAX_N: usize = 50;
const SPEARMAN_TOL: f64 = 1e-9;
const RMSE_FIXTURE: f64 = 3.5355339;
const RMSE_FIXTURE_TOL: f64 = 1e-6;
const ZERO_R_TRIALS: usize = 100;
const ZERO_R_TOL: f64 = 1e-9;
const E2E_RUNS_PER_TEST: u32 = 5;
const E2E_MIN_ORDERED: usize = 4;
const E2E_PAIRS: usize = 5;
const E2E_BUDGET: Duration = Duration::from_secs(600);

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn npi_exactness() -> Check {
    let start = Instant::now();
    let p = EfficiencyProfile::new(100.0, 200.0, 400.0).unwrap();
    for (t, want) in [(200.0, 50.0), (100.0, 100.0), (400.0, 0.0), (150.0, 75.0), (300.0, 25.0)] {
        let got = npi(t, &p).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= NPI_EXACT_TOL, || format!("npi({t}) = {got}, want {want}"))?;
    }
    let took = start.elapsed();
    ensure(took < NPI_EXACT_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("5 substitutions exact, {took:?}"))
}

fn npi_monotone_continuous() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut limit_checks = 0;
    for _ in 0..NPI_DRAWS {
        let lo = rng.random_range(1.0..500.0);
        let med = lo + rng.random_range(0.0..500.0);
        let hi = med + rng.random_range(0.0..500.0);
        let p = EfficiencyProfile::new(lo, med, hi).unwrap();
        let (a, b) = (rng.random_range(0.5..2000.0), rng.random_range(0.5..2000.0));
        let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
        let (v1, v2) = (npi(t1, &p).unwrap(), npi(t2, &p).unwrap());
        ensure(v1 >= v2, || format!("{p:?}: npi({t1}) = {v1} < npi({t2}) = {v2}"))?;
        if lo < med && med < hi {
            let h = 1e-9 * (med - lo).min(hi - med);
            let (l, r) = (npi(med - h, &p).unwrap(), npi(med + h, &p).unwrap());
            ensure((l - 50.0).abs() <= NPI_LIMIT_TOL && (r - 50.0).abs() <= NPI_LIMIT_TOL, || {
                format!("{p:?}: limits {l} / {r}")
            })?;
            limit_checks += 1;
        }
    }
    Ok(format!("{NPI_DRAWS} draws monotone, {limit_checks} median limits at 50"))
}

fn normalization() -> Check {
    let programs = common::programs();
    ensure(programs.len() == 50, || format!("{} fixture files", programs.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut variants = 0;
    for p in &programs {
        let once = pynorm::standardize_identifiers(&p.source).map_err(|e| format!("{}: {e}", p.name))?;
        let twice = pynorm::standardize_identifiers(&once.source).map_err(|e| format!("{}: {e}", p.name))?;
        ensure(once.source == twice.source, || format!("{}: not idempotent", p.name))?;
        let skip = common::fstring_words(&p.source);
        let names: Vec<String> = once.rename_map.keys().filter(|k| !skip.contains(*k)).cloned().collect();
        for _ in 0..RENAMINGS_PER_FILE {
            let renames = common::random_renaming(&mut rng, &p.source, &names);
            let variant = common::rename_tokens(&p.source, &renames);
            let got = pynorm::standardize_identifiers(&variant).map_err(|e| format!("{}: {e}", p.name))?;
            ensure(got.source == once.source, || format!("{}: renaming {renames:?} changed standard form", p.name))?;
            variants += 1;
        }
    }
    Ok(format!("50 files idempotent, {variants} renamed variants invariant"))
}

fn codebleu_self_and_projection() -> Check {
    let programs = common::programs();
    let cfg = CodeBleuConfig::default();
    for p in &programs {
        let s = codebleu(&p.source, &p.source, &cfg).combined;
        ensure((s - 100.0).abs() <= SELF_SCORE_TOL, || format!("{}: self score {s}", p.name))?;
    }
    let proj = CodeBleuConfig::new([1.0, 0.0, 0.0, 0.0], cfg.keyword_weight).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..PROJECTION_PAIRS {
        let a = &programs[rng.random_range(0..programs.len())].source;
        let b = &programs[rng.random_range(0..programs.len())].source;
        let (ta, tb) = (pynorm::tokenize_lenient(a), pynorm::tokenize_lenient(b));
        let want = common::bleu_oracle(&ta.texts(), &tb.texts(), 0.1, false);
        let got = codebleu(a, b, &proj).combined;
        worst = worst.max((got - want).abs());
    }
    ensure(worst <= PROJECTION_TOL, || format!("projection off by {worst}"))?;
    Ok(format!("{} self scores 100, projection max error {worst:.1e}", programs.len()))
}

fn ioccb_fallback_and_clamp() -> Check {
    let gt = "n = int(input())\nprint(n * (n + 1) // 2)\n";
    let alt = "n = int(input())\ns = 0\nfor i in range(n + 1):\n    s += i\nprint(s)\n";
    for bad in ["n = int(input()\nprint(n)\n", "def f(:\n    pass\n"] {
        let r = ioccb(bad, gt, &[alt]).map_err(|e| e.to_string())?;
        let raw_max = r.o_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ensure(!r.normalization_applied && r.score == raw_max, || format!("fallback gave {r:?}"))?;
    }
    let fixtures = [
        ("a = int(input())\nb = a * 2\nprint(b + a)\n", "def b(a):\n    return a * 2\nprint(b(int(input())))\n"),
        ("b = int(input())\nc = b * 2\nprint(c + b)\n", "def c(b):\n    return b * 2\nprint(c(int(input())))\n"),
    ];
    for (g, t) in fixtures {
        let r = ioccb(g, t, &[]).map_err(|e| e.to_string())?;
        ensure(r.normalization_applied && r.s_avg < r.o_avg, || format!("not a clamp case: {r:?}"))?;
        ensure(r.score == r.s_max, || format!("score {} != s_max {}", r.score, r.s_max))?;
    }
    Ok("2 uncompilable inputs fall back to raw max, 2 clamp fixtures score s_max".into())
}

fn hungarian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for trial in 0..HUNGARIAN_TRIALS {
        let n = rng.random_range(1..=HUNGARIAN_MAX_DIM);
        let m = rng.random_range(1..=HUNGARIAN_MAX_DIM);
        // Integer-valued scores keep every sum exact.
        let scores: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=100) as f64).collect()).collect();
        let a = assign_max(&scores);
        let got: f64 = a.iter().enumerate().filter_map(|(i, j)| j.map(|j| scores[i][j])).sum();
        let want = common::brute_force_assignment(&scores);
        ensure(got == want, || format!("trial {trial}: {got} vs brute force {want} on {scores:?}"))?;
    }
    Ok(format!("{HUNGARIAN_TRIALS} rectangular matrices up to {HUNGARIAN_MAX_DIM}x{HUNGARIAN_MAX_DIM} optimal"))
}

fn spearman_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut compared = 0;
    let mut worst = 0.0f64;
    while compared < SPEARMAN_TRIALS {
        let n = rng.random_range(3..=SPEARMAN_MAX_N);
        let levels = rng.random_range(2..8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let (rx, ry) = (common::ranks_by_counting(&x), common::ranks_by_counting(&y));
        if rx.iter().all(|r| *r == rx[0]) || ry.iter().all(|r| *r == ry[0]) {
            continue;
        }
        let r = spearman(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((r.rho - common::pearson_direct(&rx, &ry)).abs());
        let own = spearman(&x, &x).map_err(|e| e.to_string())?.rho;
        ensure(own == 1.0, || format!("rho(x, x) = {own}"))?;
        compared += 1;
    }
    ensure(worst <= SPEARMAN_TOL, || format!("max error {worst}"))?;
    Ok(format!("{SPEARMAN_TRIALS} tied vectors, max error {worst:.1e}, rho(x,x) = 1"))
}

fn rmse_checks() -> Check {
    let recs: Vec<PredictionRecord> = [(0.0, 3.0), (0.0, 4.0)]
        .iter()
        .map(|&(p, a)| PredictionRecord { sample_id: String::new(), predicted: p, actual: a, quantity: Quantity::TimeMs })
        .collect();
    let fixture = rmse(&recs).map_err(|e| e.to_string())?;
    ensure((fixture - RMSE_FIXTURE).abs() <= RMSE_FIXTURE_TOL, || format!("fixture rmse {fixture}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..ZERO_R_TRIALS {
        let n = rng.random_range(1..100);
        let actual: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1000.0)).collect();
        let mean = actual.iter().sum::<f64>() / n as f64;
        let got = rmse_values(&vec![mean; n], &actual).map_err(|e| e.to_string())?;
        let want = common::population_std(&actual);
        ensure((got - want).abs() <= ZERO_R_TOL, || format!("zero-r {got} vs std {want}"))?;
    }
    Ok(format!("fixture {fixture:.7}, {ZERO_R_TRIALS} zero-r vectors match population std"))
}

fn end_to_end() -> Check {
    let corpus = common::mini_corpus();
    ensure(corpus.problems.len() == 5 && corpus.samples.len() == 10, || "mini corpus shape".into())?;
    let stub = common::mini_stub(&corpus);
    let canned = common::run_e2e(&corpus, &stub, E2E_RUNS_PER_TEST, Execution::Parallel);
    let judge = |label: &str, out: &common::E2eOutcome| -> Result<String, String> {
        ensure(out.all_pass(), || format!("{label}: failing runs {:?}", out.runs))?;
        ensure(out.npi_ordered() >= E2E_MIN_ORDERED, || format!("{label}: NPI order {:?}", out.npi))?;
        ensure(out.pairs.len() == E2E_PAIRS, || {
            format!("{label}: {} pairs, NPI {:?}, dropped {:?}", out.pairs.len(), out.npi, out.dropped)
        })?;
        ensure(out.pairs_strictly_faster(), || format!("{label}: a pair is not strictly faster"))?;
        ensure(out.violations.is_empty(), || format!("{label}: {:?}", out.violations))?;
        ensure(out.elapsed < E2E_BUDGET, || format!("{label}: took {:?}", out.elapsed))?;
        Ok(format!("{label}: 10/10 pass, NPI ordered {}/5, {} pairs, {:.1?}", out.npi_ordered(), out.pairs.len(), out.elapsed))
    };
    let stub_line = judge("stub", &canned)?;
    let native = NativeExecutor::default();
    if !native.available() {
        return Ok(format!("{stub_line}; native skipped (no interpreter)"));
    }
    let measured = common::run_e2e(&corpus, &native, E2E_RUNS_PER_TEST, Execution::Parallel);
    Ok(format!("{}; {stub_line}", judge("native", &measured)?))
}

fn npi_filter_dominance() -> Check {
    let profile = EfficiencyProfile::new(100.0, 200.0, 400.0).unwrap();
    let grid = [60.0, 100.0, 130.0, 200.0, 260.0, 400.0, 700.0];
    let mut sets = 0;
    for n in 1..=4u32 {
        for code in 0..grid.len().pow(n) {
            let times: Vec<f64> = (0..n).map(|k| grid[code / grid.len().pow(k) % grid.len()]).collect();
            let cands: Vec<CodeSample> =
                (0..times.len()).map(|i| CodeSample::new(format!("{i}"), "p", format!("print({i})\n"))).collect();
            let est = FnEstimator(|s: &CodeSample| Ok(Estimate::TimeMs(times[s.id.parse::<usize>().unwrap()])));
            let out = npi_filter(&cands, &est, &profile, Execution::Sequential).map_err(|e| e.to_string())?;
            let best = times.iter().map(|t| npi(*t, &profile).unwrap()).fold(f64::MIN, f64::max);
            let chosen = npi(times[out.chosen.id.parse::<usize>().unwrap()], &profile).unwrap();
            ensure(chosen == best, || format!("times {times:?}: chose NPI {chosen}, max {best}"))?;
            sets += 1;
        }
    }
    Ok(format!("{sets} enumerated candidate sets, chosen NPI always the maximum"))
}

fn breakpoints() -> Check {
    let tp = time_breakpoint(&[100.0, 250.0, 600.0], 20.0).map_err(|e| e.to_string())?;
    ensure(tp == 200.0, || format!("TP(20%) = {tp}"))?;
    let mut c = Corpus::default();
    let mut p = Problem::new("mid", 1);
    p.profile = Some(EfficiencyProfile::new(100.0, 350.0, 600.0).unwrap());
    c.add_problem(p);
    for (i, t) in [150.0, 250.0, 350.0, 450.0, 550.0].into_iter().enumerate() {
        let mut s = CodeSample::new(format!("s{i}"), "mid", "print(1)\n");
        s.scaled_time_ms = Some(t);
        c.samples.push(s);
    }
    let table = bucket_proportions(&c, 1).map_err(|e| e.to_string())?;
    ensure(table.problems[0].counts == [1, 1, 1, 1, 1], || format!("counts {:?}", table.problems[0].counts))?;
    Ok("TP(20%) = 200, midpoint counts (1,1,1,1,1)".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("npi-exactness", npi_exactness),
        ("npi-monotone-continuous", npi_monotone_continuous),
        ("normalization-idempotence-alpha", normalization),
        ("codebleu-self-score-projection", codebleu_self_and_projection),
        ("ioccb-fallback-clamp", ioccb_fallback_and_clamp),
        ("hungarian-optimality", hungarian),
        ("spearman-oracle", spearman_oracle),
        ("rmse", rmse_checks),
        ("runner-pipeline-e2e", end_to_end),
        ("npi-filter-dominance", npi_filter_dominance),
        ("breakpoints", breakpoints),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
