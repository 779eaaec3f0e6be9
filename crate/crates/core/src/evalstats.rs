//! Evaluation statistics: Spearman rank correlation, RMSE and grouped
//! score reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined for a constant vector")]
    Constant,
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    TimeMs,
    Npi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub predicted: f64,
    pub actual: f64,
    pub quantity: Quantity,
}

/// Root mean squared error of predictions.
pub fn rmse(records: &[PredictionRecord]) -> Result<f64, StatsError> {
    let predicted: Vec<f64> = records.iter().map(|r| r.predicted).collect();
    let actual: Vec<f64> = records.iter().map(|r| r.actual).collect();
    rmse_values(&predicted, &actual)
}

pub fn rmse_values(predicted: &[f64], actual: &[f64]) -> Result<f64, StatsError> {
    if predicted.len() != actual.len() {
        return Err(StatsError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (a - p) * (a - p)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    /// Two-sided, from the t approximation with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    let n = x.len();
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * dist.sf(t.abs())).clamp(f64::MIN_POSITIVE, 1.0)
    };
    Ok(SpearmanResult { rho, p_value, n })
}

/// One evaluated generated program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub sample_id: String,
    pub problem_id: String,
    pub io_pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub npi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ioccb: Option<f64>,
}

/// Named inclusive difficulty range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyBucket {
    pub name: String,
    pub min: u32,
    pub max: u32,
}

pub fn default_buckets() -> Vec<DifficultyBucket> {
    [("Introductory", 0, 0), ("Interview", 1, 3), ("Competition", 4, 18)]
        .into_iter()
        .map(|(name, min, max)| DifficultyBucket { name: name.into(), min, max })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupType {
    Difficulty,
    Tag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub group_type: GroupType,
    pub group: String,
    pub n: usize,
    pub io_pass_pct: f64,
    /// Mean over samples that have an NPI.
    pub mean_npi: Option<f64>,
    pub mean_ioccb: Option<f64>,
}

#[derive(Default)]
struct Acc {
    n: usize,
    passed: usize,
    npi: Vec<f64>,
    ioccb: Vec<f64>,
}

impl Acc {
    fn add(&mut self, s: &ScoredSample) {
        self.n += 1;
        self.passed += s.io_pass as usize;
        self.npi.extend(s.npi);
        self.ioccb.extend(s.ioccb);
    }

    fn row(&self, group_type: GroupType, group: &str) -> EvalReport {
        let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        EvalReport {
            group_type,
            group: group.to_string(),
            n: self.n,
            io_pass_pct: 100.0 * self.passed as f64 / self.n as f64,
            mean_npi: mean(&self.npi),
            mean_ioccb: mean(&self.ioccb),
        }
    }
}

/// One row per non-empty difficulty bucket (in bucket order), then one per
/// tag (sorted). A sample counts toward every tag of its problem.
pub fn grouped_report(scored: &[ScoredSample], corpus: &Corpus, buckets: &[DifficultyBucket]) -> Vec<EvalReport> {
    let mut by_bucket: Vec<Acc> = buckets.iter().map(|_| Acc::default()).collect();
    let mut by_tag: BTreeMap<&str, Acc> = BTreeMap::new();
    for s in scored {
        let Some(problem) = corpus.problem(&s.problem_id) else {
            log::warn!("report: {} refers to unknown problem {:?}", s.sample_id, s.problem_id);
            continue;
        };
        if let Some(i) = buckets.iter().position(|b| (b.min..=b.max).contains(&problem.difficulty)) {
            by_bucket[i].add(s);
        }
        for tag in &problem.tags {
            by_tag.entry(tag).or_default().add(s);
        }
    }
    let mut rows: Vec<EvalReport> = buckets
        .iter()
        .zip(&by_bucket)
        .filter(|(_, acc)| acc.n > 0)
        .map(|(b, acc)| acc.row(GroupType::Difficulty, &b.name))
        .collect();
    rows.extend(by_tag.iter().map(|(tag, acc)| acc.row(GroupType::Tag, tag)));
    rows
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "group_type,group,n,io_pass_pct,mean_npi,mean_ioccb";

/// Fixed column order, four decimals, empty cells for missing means.
pub fn report_csv(rows: &[EvalReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for r in rows {
        let kind = match r.group_type {
            GroupType::Difficulty => "difficulty",
            GroupType::Tag => "tag",
        };
        out.push_str(&format!(
            "{kind},{},{},{:.4},{},{}\n",
            csv_field(&r.group),
            r.n,
            r.io_pass_pct,
            opt(r.mean_npi),
            opt(r.mean_ioccb)
        ));
    }
    out
}

/// Plain-text histogram over `[lo, hi]` with `bins` equal bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize, width: usize) -> String {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    let span = hi - lo;
    for &v in values.iter().filter(|v| (lo..=hi).contains(*v)) {
        let i = if span > 0.0 { (((v - lo) / span) * bins as f64) as usize } else { 0 };
        counts[i.min(bins - 1)] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut out = String::new();
    for (i, c) in counts.iter().enumerate() {
        let a = lo + span * i as f64 / bins as f64;
        let b = lo + span * (i + 1) as f64 / bins as f64;
        let bar = "#".repeat(c * width / peak);
        out.push_str(&format!("[{a:>8.2}, {b:>8.2}{} {c:>6} {bar}\n", if i + 1 == bins { ']' } else { ')' }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Problem;

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap().rho, 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().rho, -1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().p_value, 0.0);
        // ranks x: 1, 2.5, 2.5, 4; y: 1, 3, 2, 4.
        // dx = -1.5, 0, 0, 1.5; dy = -1.5, .5, -.5, 1.5; sxy = 4.5, sxx = 4.5, syy = 5.
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::Constant));
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn p_value_against_table() {
        // n = 10, rho = 0.6: t = 0.6 * sqrt(8 / 0.64) = 2.1213; two-sided p ~ 0.0667.
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y = [2.0, 1.0, 4.0, 3.0, 7.0, 10.0, 5.0, 9.0, 6.0, 8.0];
        let r = spearman(&x, &y).unwrap();
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((r.rho - (1.0 - 6.0 * d2 / (10.0 * 99.0))).abs() < 1e-12);
        assert!(r.p_value > 0.0 && r.p_value < 0.2, "{r:?}");
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse_values(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse_values(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 3.5355339059327378).abs() < 1e-12);
        assert!(rmse_values(&[], &[]).is_err());
    }

    fn corpus() -> Corpus {
        let mut c = Corpus::default();
        let mut a = Problem::new("a", 0);
        a.tags = ["dp".to_string(), "math".to_string()].into();
        c.add_problem(a);
        let mut b = Problem::new("b", 5);
        b.tags = ["math".to_string()].into();
        c.add_problem(b);
        c
    }

    fn scored(id: &str, pid: &str, pass: bool, npi: f64) -> ScoredSample {
        ScoredSample { sample_id: id.into(), problem_id: pid.into(), io_pass: pass, npi: Some(npi), ioccb: Some(50.0) }
    }

    #[test]
    fn grouping() {
        let rows = grouped_report(&[scored("s", "a", true, 75.0)], &corpus(), &default_buckets());
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].group, "Introductory");
        assert_eq!(rows[0].mean_npi, Some(75.0));
        assert_eq!(rows[1].group, "dp");
        assert_eq!(rows[2].group, "math");

        let rows = grouped_report(&[scored("s", "a", true, 80.0), scored("t", "b", false, 20.0)], &corpus(), &default_buckets());
        let csv = report_csv(&rows);
        assert_eq!(
            csv,
            "group_type,group,n,io_pass_pct,mean_npi,mean_ioccb\n\
             difficulty,Introductory,1,100.0000,80.0000,50.0000\n\
             difficulty,Competition,1,0.0000,20.0000,50.0000\n\
             tag,dp,1,100.0000,80.0000,50.0000\n\
             tag,math,2,50.0000,50.0000,50.0000\n"
        );
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[0.0, 10.0, 55.0, 100.0], 0.0, 100.0, 2, 10);
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("     2 "));
        assert!(lines[1].ends_with("]      2 ##########"));
    }
}
