//! IOCCB: CodeBLEU of generated code against a ground truth and its
//! alternates, before (O set) and after (S set) identifier standardization.
//!
//! `score = min(100, S_max + sqrt(max(0, S_avg - O_avg)))`

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::codebleu::{score_prepared, CodeBleuConfig, Prepared};
use crate::par::{self, Execution};
use crate::pynorm::{self, CompileError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoccbResult {
    pub o_scores: Vec<f64>,
    pub s_scores: Vec<f64>,
    pub o_avg: f64,
    pub s_avg: f64,
    pub s_max: f64,
    pub score: f64,
    pub normalization_applied: bool,
    /// Indices (into the alternates argument) of alternates dropped because
    /// they did not parse.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_alternates: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum IoccbError {
    #[error("reference set is empty")]
    EmptyReferences,
    #[error("ground truth does not parse: {0}")]
    GroundTruthUnparseable(#[from] CompileError),
}

pub fn ioccb(generated: &str, ground_truth: &str, alternates: &[&str]) -> Result<IoccbResult, IoccbError> {
    ioccb_with(generated, ground_truth, alternates, &CodeBleuConfig::default(), Execution::default())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

struct Reference {
    raw: Prepared,
    standardized: Prepared,
}

pub fn ioccb_with(
    generated: &str,
    ground_truth: &str,
    alternates: &[&str],
    config: &CodeBleuConfig,
    exec: Execution,
) -> Result<IoccbResult, IoccbError> {
    if ground_truth.trim().is_empty() {
        return Err(IoccbError::EmptyReferences);
    }
    let gt_std = pynorm::standardize_identifiers(ground_truth)?;

    // References deduplicated by their standardized text.
    let mut seen = HashSet::new();
    let mut texts: Vec<(&str, String)> = Vec::new();
    seen.insert(gt_std.source.clone());
    texts.push((ground_truth, gt_std.source));
    let mut dropped = Vec::new();
    for (i, alt) in alternates.iter().enumerate() {
        match pynorm::standardize_identifiers(alt) {
            Ok(n) => {
                if seen.insert(n.source.clone()) {
                    texts.push((alt, n.source));
                }
            }
            Err(e) => {
                log::warn!("dropping alternate {i}: {e}");
                dropped.push(i);
            }
        }
    }

    let refs: Vec<Reference> =
        par::map(exec, &texts, |(raw, std)| Reference { raw: Prepared::new(raw), standardized: Prepared::new(std) });

    let gen_raw = Prepared::new(generated);
    let o_scores: Vec<f64> = par::map(exec, &refs, |r| score_prepared(&gen_raw, &r.raw, config).combined);
    let o_avg = mean(&o_scores);

    if generated.trim().is_empty() {
        return Ok(IoccbResult {
            s_scores: o_scores.clone(),
            s_avg: o_avg,
            s_max: max(&o_scores),
            o_scores,
            o_avg,
            score: 0.0,
            normalization_applied: false,
            dropped_alternates: dropped,
        });
    }

    let (s_scores, normalization_applied) = match pynorm::standardize_identifiers(generated) {
        Ok(g) => {
            let gen_std = Prepared::new(&g.source);
            (par::map(exec, &refs, |r| score_prepared(&gen_std, &r.standardized, config).combined), true)
        }
        Err(e) => {
            log::warn!("generated code does not parse, skipping normalization: {e}");
            (o_scores.clone(), false)
        }
    };
    let s_avg = mean(&s_scores);
    let s_max = max(&s_scores);
    let score = if normalization_applied {
        (s_max + (s_avg - o_avg).max(0.0).sqrt()).min(100.0)
    } else {
        max(&o_scores)
    };
    Ok(IoccbResult {
        o_scores,
        s_scores,
        o_avg,
        s_avg,
        s_max,
        score: score.clamp(0.0, 100.0),
        normalization_applied,
        dropped_alternates: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GT: &str = "n = int(input())\ntotal = 0\nfor i in range(n):\n    total += i\nprint(total)\n";

    #[test]
    fn identical_scores_100() {
        let r = ioccb(GT, GT, &[]).unwrap();
        assert_eq!(r.o_scores.len(), 1);
        assert!((r.o_scores[0] - 100.0).abs() < 1e-9);
        assert!((r.s_scores[0] - 100.0).abs() < 1e-9);
        assert!((r.score - 100.0).abs() < 1e-9);
        assert!(r.normalization_applied);
    }

    #[test]
    fn renamed_copy_recovers() {
        let renamed = "m = int(input())\nacc = 0\nfor j in range(m):\n    acc += j\nprint(acc)\n";
        let r = ioccb(renamed, GT, &[]).unwrap();
        assert!((r.s_max - 100.0).abs() < 1e-9);
        assert!(r.score >= r.s_max);
        assert!(r.s_max >= r.o_scores[0]);
        assert!(r.o_scores[0] < 100.0);
    }

    #[test]
    fn syntax_error_skips_normalization() {
        let bad = "n = int(input()\nprint(n)\n";
        let alt = "import sys\nprint(sum(range(int(sys.stdin.readline()))))\n";
        let r = ioccb(bad, GT, &[alt]).unwrap();
        assert!(!r.normalization_applied);
        assert_eq!(r.s_scores, r.o_scores);
        assert_eq!(r.score, r.o_scores.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn duplicate_references_collapse() {
        let alt = "print(sum(range(int(input()))))\n";
        let a = ioccb(GT, GT, &[alt]).unwrap();
        let b = ioccb(GT, GT, &[alt, GT, "z = int(input())\ntotal = 0\nfor i in range(z):\n    total += i\nprint(total)\n"]).unwrap();
        assert_eq!(a.score, b.score);
        assert_eq!(a.o_scores.len(), 2);
        assert_eq!(b.o_scores.len(), 2);
    }

    #[test]
    fn unparseable_alternate_is_dropped() {
        let r = ioccb(GT, GT, &["def (:"]).unwrap();
        assert_eq!(r.dropped_alternates, vec![0]);
        assert_eq!(r.o_scores.len(), 1);
    }

    #[test]
    fn errors_and_empty_generated() {
        assert!(matches!(ioccb(GT, "  \n", &[]), Err(IoccbError::EmptyReferences)));
        assert!(matches!(ioccb(GT, "x = (", &[]), Err(IoccbError::GroundTruthUnparseable(_))));
        assert_eq!(ioccb("", GT, &[]).unwrap().score, 0.0);
    }
}
