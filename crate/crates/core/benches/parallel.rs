use std::path::Path;

use codeeff_core::codebleu::{CodeBleuConfig, Prepared};
use codeeff_core::corpus::{CodeSample, Corpus, EfficiencyProfile, Problem};
use codeeff_core::ioccb::ioccb_with;
use codeeff_core::pairing::{build_pairs, similarity_matrix, PairingConfig};
use codeeff_core::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fixture_sources() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/programs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "py"))
        .collect();
    paths.sort();
    paths.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
}

fn bench_similarity(c: &mut Criterion) {
    let prepared: Vec<Prepared> = fixture_sources().iter().map(|s| Prepared::new(s)).collect();
    let cfg = CodeBleuConfig::default();
    let mut group = c.benchmark_group("similarity_matrix");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| similarity_matrix(&prepared, &cfg, exec))
        });
    }
    group.finish();
}

fn bench_ioccb(c: &mut Criterion) {
    let sources = fixture_sources();
    let alternates: Vec<&str> = sources[1..20].iter().map(String::as_str).collect();
    let cfg = CodeBleuConfig::default();
    let mut group = c.benchmark_group("ioccb");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| ioccb_with(&sources[25], &sources[0], &alternates, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

// Two problems whose samples are the fixture programs with spread-out times.
fn synthetic_corpus() -> Corpus {
    let mut c = Corpus::default();
    for (k, pid) in ["a", "b"].into_iter().enumerate() {
        let mut p = Problem::new(pid, 1);
        p.profile = Some(EfficiencyProfile::new(100.0, 500.0, 900.0).unwrap());
        c.add_problem(p);
        for (i, src) in fixture_sources().into_iter().enumerate().skip(k).step_by(2) {
            let mut s = CodeSample::new(format!("{pid}{i}"), pid, src);
            s.scaled_time_ms = Some(100.0 + (i * 37 % 50) as f64 * 16.0);
            c.samples.push(s);
        }
    }
    c
}

fn bench_build_pairs(c: &mut Criterion) {
    let corpus = synthetic_corpus();
    let cfg = PairingConfig::default();
    let mut group = c.benchmark_group("build_pairs");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| build_pairs(&corpus, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_similarity, bench_ioccb, bench_build_pairs);
criterion_main!(benches);
