//! Normalized Performance Index, efficiency profiles and the time-bucket
//! statistics over a corpus.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EfficiencyProfile};

/// Fraction of samples dropped from each tail before computing a profile.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.005;

/// Breakpoint percentages, as fractions.
pub const BREAKPOINTS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EfficiencyError {
    #[error("execution time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("invalid profile: {0}")]
    BadProfile(String),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("percentage must lie in [0, 100], got {0}")]
    BadPercentage(f64),
    #[error("no problem at difficulty {0} has timed samples")]
    NoProblems(u32),
}

/// NPI of a run taking `t_c` ms against a problem profile.
///
/// Linear from 100 at `t_min` to 50 at `t_med` and on to 0 at `t_max`,
/// clamped outside `[t_min, t_max]`. Flat segments of the profile collapse
/// to their limits.
pub fn npi(t_c: f64, profile: &EfficiencyProfile) -> Result<f64, EfficiencyError> {
    if !t_c.is_finite() || t_c <= 0.0 {
        return Err(EfficiencyError::NonPositiveTime(t_c));
    }
    profile.check().map_err(EfficiencyError::BadProfile)?;
    let EfficiencyProfile { t_min_ms: lo, t_med_ms: med, t_max_ms: hi } = *profile;
    let v = if t_c == med {
        50.0
    } else if t_c < med {
        if t_c <= lo {
            100.0
        } else {
            50.0 + 50.0 * (med - t_c) / (med - lo)
        }
    } else if t_c >= hi {
        0.0
    } else {
        50.0 * (hi - t_c) / (hi - med)
    };
    Ok(v.clamp(0.0, 100.0))
}

/// Sorted copy of `times` with `floor(n * tail)` samples removed from each end.
pub fn trim(times: &[f64], tail: f64) -> Vec<f64> {
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (sorted.len() as f64 * tail).floor() as usize;
    // Keep at least one sample.
    let k = k.min(sorted.len().saturating_sub(1) / 2);
    sorted[k..sorted.len() - k].to_vec()
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn check_times(times: &[f64], needed: usize) -> Result<(), EfficiencyError> {
    if times.len() < needed {
        return Err(EfficiencyError::TooFewSamples { needed, got: times.len() });
    }
    if let Some(&bad) = times.iter().find(|t| !t.is_finite() || **t <= 0.0) {
        return Err(EfficiencyError::NonPositiveTime(bad));
    }
    Ok(())
}

pub fn profile_from_times(times: &[f64]) -> Result<EfficiencyProfile, EfficiencyError> {
    profile_from_times_with(times, DEFAULT_TAIL_FRACTION)
}

/// Trims each tail by `tail` and takes min / median / max of the rest.
pub fn profile_from_times_with(times: &[f64], tail: f64) -> Result<EfficiencyProfile, EfficiencyError> {
    check_times(times, 3)?;
    let kept = trim(times, tail);
    Ok(EfficiencyProfile {
        t_min_ms: kept[0],
        t_med_ms: median_sorted(&kept),
        t_max_ms: kept[kept.len() - 1],
    })
}

/// `T_min + p (T_max - T_min)` for a percentage `p` over the trimmed times.
pub fn time_breakpoint(times: &[f64], p_percent: f64) -> Result<f64, EfficiencyError> {
    if !(0.0..=100.0).contains(&p_percent) {
        return Err(EfficiencyError::BadPercentage(p_percent));
    }
    check_times(times, 2)?;
    let kept = trim(times, DEFAULT_TAIL_FRACTION);
    if kept.len() < 2 {
        return Err(EfficiencyError::TooFewSamples { needed: 2, got: kept.len() });
    }
    Ok(breakpoint(kept[0], kept[kept.len() - 1], p_percent / 100.0))
}

fn breakpoint(lo: f64, hi: f64, fraction: f64) -> f64 {
    lo + fraction * (hi - lo)
}

pub fn breakpoints(lo: f64, hi: f64) -> [f64; 6] {
    BREAKPOINTS.map(|p| breakpoint(lo, hi, p))
}

/// Interval index of `t` among five intervals. Each interval holds its left
/// end; the last also holds its right end. `None` outside the range.
pub fn bucket_of(t: f64, bp: &[f64; 6]) -> Option<usize> {
    if t < bp[0] || t > bp[5] {
        return None;
    }
    if bp[0] == bp[5] {
        return Some(0);
    }
    (0..4).find(|&k| bp[k] <= t && t < bp[k + 1]).or(Some(4))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemBuckets {
    pub problem_id: String,
    pub breakpoints: [f64; 6],
    pub counts: [usize; 5],
    /// Timed samples falling outside the problem's range.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointTable {
    pub difficulty: u32,
    /// Mean of the per-problem breakpoints.
    pub breakpoints: [f64; 6],
    /// Mean per-problem count in each interval.
    pub bucket_weights: [f64; 5],
    /// Extension: mean per-problem share of samples in each interval.
    pub normalized_weights: [f64; 5],
    pub problems: Vec<ProblemBuckets>,
}

impl BreakpointTable {
    pub fn n_problems(&self) -> usize {
        self.problems.len()
    }
}

/// Per-difficulty interval counts averaged over the problems at `difficulty`.
///
/// Each problem's range comes from its stored profile when present, else
/// from the trimmed times of its samples.
pub fn bucket_proportions(corpus: &Corpus, difficulty: u32) -> Result<BreakpointTable, EfficiencyError> {
    let samples = corpus.all_samples();
    let mut problems = Vec::new();
    for p in corpus.problems.values().filter(|p| p.difficulty == difficulty) {
        let times: Vec<f64> =
            samples.iter().filter(|s| s.problem_id == p.id).filter_map(|s| s.time_ms()).filter(|t| *t > 0.0).collect();
        if times.is_empty() {
            continue;
        }
        let (lo, hi) = match &p.profile {
            Some(prof) => (prof.t_min_ms, prof.t_max_ms),
            None => {
                let kept = trim(&times, DEFAULT_TAIL_FRACTION);
                (kept[0], kept[kept.len() - 1])
            }
        };
        let bp = breakpoints(lo, hi);
        let mut counts = [0usize; 5];
        let mut excluded = 0;
        for t in &times {
            match bucket_of(*t, &bp) {
                Some(k) => counts[k] += 1,
                None => excluded += 1,
            }
        }
        problems.push(ProblemBuckets { problem_id: p.id.clone(), breakpoints: bp, counts, excluded });
    }
    if problems.is_empty() {
        return Err(EfficiencyError::NoProblems(difficulty));
    }
    let n = problems.len() as f64;
    let mut mean_bp = [0.0; 6];
    let mut weights = [0.0; 5];
    let mut normalized = [0.0; 5];
    for pb in &problems {
        for (m, b) in mean_bp.iter_mut().zip(pb.breakpoints) {
            *m += b / n;
        }
        let total: usize = pb.counts.iter().sum();
        for k in 0..5 {
            weights[k] += pb.counts[k] as f64 / n;
            if total > 0 {
                normalized[k] += pb.counts[k] as f64 / total as f64 / n;
            }
        }
    }
    Ok(BreakpointTable { difficulty, breakpoints: mean_bp, bucket_weights: weights, normalized_weights: normalized, problems })
}
