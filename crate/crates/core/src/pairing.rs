//! Pair construction: near-duplicate removal, length filtering, the
//! efficient/inefficient split, CodeBLEU-distance clustering, representative
//! selection and assignment of efficient to inefficient representatives.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codebleu::{self, CodeBleuConfig, Prepared};
use crate::corpus::{CodePair, CodeSample, Corpus, EfficiencyProfile};
use crate::efficiency;
use crate::par::{self, Execution};
use crate::pynorm::{self, Denylist};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PairingError {
    #[error("sample {0:?} has no scaled time")]
    MissingTime(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Efficiency(#[from] efficiency::EfficiencyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairingConfig {
    pub dedup_threshold: f64,
    pub abs_token_limit: usize,
    pub rel_length_factor: f64,
    /// Scale α in `k = max(1, round(α √N))`.
    pub cluster_scale: f64,
    pub efficiency_split_npi: f64,
    pub seed: u64,
    pub codebleu: CodeBleuConfig,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig {
            dedup_threshold: 0.99,
            abs_token_limit: 512,
            rel_length_factor: 3.0,
            cluster_scale: 1.0,
            efficiency_split_npi: 50.0,
            seed: 0,
            codebleu: CodeBleuConfig::default(),
        }
    }
}

impl PairingConfig {
    pub fn check(&self) -> Result<(), PairingError> {
        let bad = |m: &str| Err(PairingError::BadConfig(m.to_string()));
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return bad("dedup_threshold must lie in (0, 1]");
        }
        if self.abs_token_limit == 0 {
            return bad("abs_token_limit must be positive");
        }
        if self.rel_length_factor.is_nan() || self.rel_length_factor <= 0.0 {
            return bad("rel_length_factor must be positive");
        }
        if self.cluster_scale.is_nan() || self.cluster_scale <= 0.0 {
            return bad("cluster_scale must be positive");
        }
        if !(0.0..=100.0).contains(&self.efficiency_split_npi) {
            return bad("efficiency_split_npi must lie in [0, 100]");
        }
        Ok(())
    }
}

// ---- longest common contiguous substring ------------------------------

/// Suffix automaton over the characters of one text.
pub struct SuffixAutomaton {
    len: Vec<usize>,
    link: Vec<Option<usize>>,
    next: Vec<HashMap<char, usize>>,
    text_len: usize,
}

impl SuffixAutomaton {
    pub fn new(text: &str) -> Self {
        let mut sa = SuffixAutomaton { len: vec![0], link: vec![None], next: vec![HashMap::new()], text_len: 0 };
        let mut last = 0;
        for c in text.chars() {
            sa.text_len += 1;
            let cur = sa.push(sa.len[last] + 1, None, HashMap::new());
            let mut p = Some(last);
            while let Some(q) = p {
                if sa.next[q].contains_key(&c) {
                    break;
                }
                sa.next[q].insert(c, cur);
                p = sa.link[q];
            }
            match p {
                None => sa.link[cur] = Some(0),
                Some(p) => {
                    let q = sa.next[p][&c];
                    if sa.len[p] + 1 == sa.len[q] {
                        sa.link[cur] = Some(q);
                    } else {
                        let clone = sa.push(sa.len[p] + 1, sa.link[q], sa.next[q].clone());
                        let mut pp = Some(p);
                        while let Some(x) = pp {
                            if sa.next[x].get(&c) != Some(&q) {
                                break;
                            }
                            sa.next[x].insert(c, clone);
                            pp = sa.link[x];
                        }
                        sa.link[q] = Some(clone);
                        sa.link[cur] = Some(clone);
                    }
                }
            }
            last = cur;
        }
        sa
    }

    fn push(&mut self, len: usize, link: Option<usize>, next: HashMap<char, usize>) -> usize {
        self.len.push(len);
        self.link.push(link);
        self.next.push(next);
        self.len.len() - 1
    }

    /// Length in characters of the longest common contiguous substring with
    /// `other`.
    pub fn longest_common(&self, other: &str) -> usize {
        let (mut v, mut l, mut best) = (0usize, 0usize, 0usize);
        for c in other.chars() {
            while v != 0 && !self.next[v].contains_key(&c) {
                v = self.link[v].unwrap_or(0);
                l = self.len[v];
            }
            if let Some(&n) = self.next[v].get(&c) {
                v = n;
                l += 1;
            } else {
                v = 0;
                l = 0;
            }
            best = best.max(l);
        }
        best
    }

    pub fn similarity(&self, other: &str) -> f64 {
        let other_len = other.chars().count();
        let longer = self.text_len.max(other_len);
        if longer == 0 {
            return 1.0;
        }
        self.longest_common(other) as f64 / longer as f64
    }
}

/// Longest common contiguous substring length over the longer text's length.
pub fn lccs_similarity(a: &str, b: &str) -> f64 {
    SuffixAutomaton::new(a).similarity(b)
}

// ---- filters ----------------------------------------------------------

/// Greedy scan in input order; within each problem a sample is dropped when
/// its similarity to an already retained sample exceeds `threshold`.
pub fn dedup(samples: &[CodeSample], threshold: f64) -> Vec<CodeSample> {
    let mut retained: Vec<CodeSample> = Vec::new();
    let mut automata: HashMap<&str, Vec<SuffixAutomaton>> = HashMap::new();
    for s in samples {
        let kept = automata.entry(s.problem_id.as_str()).or_default();
        if let Some(sim) = kept.iter().map(|a| a.similarity(&s.source)).find(|sim| *sim > threshold) {
            log::info!("dedup: dropping {} (similarity {sim:.4})", s.id);
            continue;
        }
        kept.push(SuffixAutomaton::new(&s.source));
        retained.push(s.clone());
    }
    retained
}

/// Drops samples above the absolute token limit, then samples longer than
/// `rel_length_factor` times their problem's mean token count.
pub fn length_filter(samples: &[CodeSample], config: &PairingConfig) -> Vec<CodeSample> {
    let mut sums: HashMap<&str, (usize, usize)> = HashMap::new();
    for s in samples {
        let e = sums.entry(s.problem_id.as_str()).or_default();
        e.0 += s.token_count;
        e.1 += 1;
    }
    samples
        .iter()
        .filter(|s| {
            if s.token_count > config.abs_token_limit {
                log::info!("length: dropping {} ({} tokens > {})", s.id, s.token_count, config.abs_token_limit);
                return false;
            }
            let (sum, n) = sums[s.problem_id.as_str()];
            let limit = config.rel_length_factor * sum as f64 / n as f64;
            if s.token_count as f64 > limit {
                log::info!("length: dropping {} ({} tokens > {limit:.1})", s.id, s.token_count);
                return false;
            }
            true
        })
        .cloned()
        .collect()
}

/// `(efficient, inefficient)`: efficient samples have NPI of their scaled
/// time at least `split_npi`.
pub fn split_by_efficiency(
    samples: &[CodeSample],
    profile: &EfficiencyProfile,
    split_npi: f64,
) -> Result<(Vec<CodeSample>, Vec<CodeSample>), PairingError> {
    let (mut eff, mut ineff) = (Vec::new(), Vec::new());
    for s in samples {
        let t = s.scaled_time_ms.ok_or_else(|| PairingError::MissingTime(s.id.clone()))?;
        if efficiency::npi(t, profile)? >= split_npi {
            eff.push(s.clone());
        } else {
            ineff.push(s.clone());
        }
    }
    Ok((eff, ineff))
}

// ---- clustering -------------------------------------------------------

/// Standardized source, or the source itself when it does not parse.
fn standardized(source: &str) -> String {
    pynorm::standardize_identifiers(source).map(|n| n.source).unwrap_or_else(|_| source.to_string())
}

fn prepare_all(samples: &[CodeSample], exec: Execution) -> Vec<Prepared> {
    par::map(exec, samples, |s| Prepared::new(&standardized(&s.source)))
}

/// Symmetrized CodeBLEU between every pair (diagonal 100).
pub fn similarity_matrix(prepared: &[Prepared], config: &CodeBleuConfig, exec: Execution) -> Vec<Vec<f64>> {
    let n = prepared.len();
    let upper: Vec<Vec<f64>> = par::map_range(exec, n, |i| {
        (i + 1..n).map(|j| codebleu::symmetric(&prepared[i], &prepared[j], config)).collect()
    });
    let mut m = vec![vec![100.0; n]; n];
    for i in 0..n {
        for (off, v) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            m[i][j] = *v;
            m[j][i] = *v;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Sample id to cluster index.
    pub assignment: BTreeMap<String, usize>,
    /// Member indices (into the input) of each cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    /// Representative sample id of each cluster.
    pub representatives: Vec<String>,
}

fn within_sum(members: &[usize], dist: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            s += dist[i][j];
        }
    }
    s
}

/// Splits `members` (at least two) into two groups around two medoids.
fn two_medoid(members: &[usize], dist: &[Vec<f64>], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let n = members.len();
    // Farthest pair first, then random restarts.
    let mut inits = Vec::new();
    let mut best = (0, 1, f64::NEG_INFINITY);
    for a in 0..n {
        for b in a + 1..n {
            let d = dist[members[a]][members[b]];
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    inits.push((best.0, best.1));
    for _ in 0..4 {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        inits.push((a, b));
    }

    let mut result: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for (a, b) in inits {
        let (mut ma, mut mb) = (a, b);
        let mut groups = (Vec::new(), Vec::new());
        for _ in 0..100 {
            groups = (Vec::new(), Vec::new());
            for x in 0..n {
                let to_b = x == mb || (x != ma && dist[members[x]][members[mb]] < dist[members[x]][members[ma]]);
                if to_b {
                    groups.1.push(x);
                } else {
                    groups.0.push(x);
                }
            }
            let medoid = |g: &[usize]| -> usize {
                let cost = |c: usize| g.iter().map(|&y| dist[members[c]][members[y]]).sum::<f64>();
                let mut best = (g[0], cost(g[0]));
                for &c in &g[1..] {
                    let v = cost(c);
                    if v < best.1 {
                        best = (c, v);
                    }
                }
                best.0
            };
            let (na, nb) = (medoid(&groups.0), medoid(&groups.1));
            if (na, nb) == (ma, mb) {
                break;
            }
            ma = na;
            mb = nb;
        }
        let cost: f64 = groups.0.iter().map(|&x| dist[members[x]][members[ma]]).sum::<f64>()
            + groups.1.iter().map(|&x| dist[members[x]][members[mb]]).sum::<f64>();
        if result.as_ref().is_none_or(|r| cost < r.0) {
            let g0 = groups.0.iter().map(|&x| members[x]).collect();
            let g1 = groups.1.iter().map(|&x| members[x]).collect();
            result = Some((cost, g0, g1));
        }
    }
    let (_, g0, g1) = result.expect("at least one initialization");
    (g0, g1)
}

/// Bisecting 2-medoid clustering of a distance matrix into `k` clusters
/// (lowered to the number of points). Clusters come back ordered by their
/// smallest member.
pub fn cluster_indices(dist: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let k = k.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    while clusters.len() < k {
        let mut pick: Option<(usize, f64, usize)> = None;
        for (idx, c) in clusters.iter().enumerate().filter(|(_, c)| c.len() >= 2) {
            let s = within_sum(c, dist);
            let better = match pick {
                None => true,
                Some((_, bs, bl)) => s > bs || (s == bs && c.len() > bl),
            };
            if better {
                pick = Some((idx, s, c.len()));
            }
        }
        let (idx, _, _) = pick.expect("k <= n leaves a splittable cluster");
        let target = clusters.remove(idx);
        let (a, b) = two_medoid(&target, dist, &mut rng);
        clusters.insert(idx, b);
        clusters.insert(idx, a);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Member of `members` with the largest summed similarity to the others;
/// ties go to the smaller id.
pub fn representative_index(members: &[usize], sim: &[Vec<f64>], ids: &[&str]) -> usize {
    let score = |i: usize| members.iter().filter(|&&j| j != i).map(|&j| sim[i][j]).sum::<f64>();
    let mut best = members[0];
    let mut best_score = score(best);
    for &i in &members[1..] {
        let s = score(i);
        if s > best_score || (s == best_score && ids[i] < ids[best]) {
            best = i;
            best_score = s;
        }
    }
    best
}

pub fn cluster_count(n: usize, scale: f64) -> usize {
    ((scale * (n as f64).sqrt()).round() as usize).max(1)
}

/// Clusters samples by standardized-code CodeBLEU distance.
pub fn cluster(samples: &[CodeSample], k: usize, seed: u64, config: &CodeBleuConfig, exec: Execution) -> ClusterAssignment {
    if k > samples.len() && !samples.is_empty() {
        log::warn!("cluster count {k} exceeds {} samples; using {}", samples.len(), samples.len());
    }
    let prepared = prepare_all(samples, exec);
    let sim = similarity_matrix(&prepared, config, exec);
    cluster_with_similarity(samples, &sim, k, seed)
}

fn cluster_with_similarity(samples: &[CodeSample], sim: &[Vec<f64>], k: usize, seed: u64) -> ClusterAssignment {
    let dist: Vec<Vec<f64>> = sim.iter().map(|row| row.iter().map(|s| 100.0 - s).collect()).collect();
    let clusters = cluster_indices(&dist, k, seed);
    let ids: Vec<&str> = samples.iter().map(|s| s.id.as_str()).collect();
    let mut assignment = BTreeMap::new();
    for (ci, c) in clusters.iter().enumerate() {
        for &i in c {
            assignment.insert(samples[i].id.clone(), ci);
        }
    }
    let representatives = clusters.iter().map(|c| ids[representative_index(c, sim, &ids)].to_string()).collect();
    ClusterAssignment { assignment, clusters, representatives }
}

/// The member with the highest summed symmetrized CodeBLEU to the others.
pub fn representative<'a>(samples: &'a [CodeSample], config: &CodeBleuConfig, exec: Execution) -> Option<&'a CodeSample> {
    if samples.is_empty() {
        return None;
    }
    let sim = similarity_matrix(&prepare_all(samples, exec), config, exec);
    let ids: Vec<&str> = samples.iter().map(|s| s.id.as_str()).collect();
    let members: Vec<usize> = (0..samples.len()).collect();
    Some(&samples[representative_index(&members, &sim, &ids)])
}

// ---- assignment -------------------------------------------------------

/// Minimum-cost perfect assignment on a square matrix. Returns the column
/// of each row plus the row and column potentials.
fn hungarian(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Kuhn augmenting path search over the allowed edges.
fn try_kuhn(row: usize, allowed: &[Vec<usize>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
    for &c in &allowed[row] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        if col_owner[c].is_none_or(|r| try_kuhn(r, allowed, seen, col_owner)) {
            col_owner[c] = Some(row);
            return true;
        }
    }
    false
}

fn has_perfect_matching(rows: &[usize], allowed: &[Vec<usize>], n: usize) -> bool {
    let mut owner = vec![None; n];
    rows.iter().all(|&r| try_kuhn(r, allowed, &mut vec![false; n], &mut owner))
}

/// Maximum-total assignment of rows to columns on a rectangular score
/// matrix. The matrix is padded with zero-score dummies; rows matched to a
/// dummy get `None`. Among optimal assignments the lexicographically
/// smallest (by row order) is returned.
pub fn assign_max(scores: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let n = rows.max(cols);
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i < rows && j < cols { -scores[i][j] } else { 0.0 }).collect())
        .collect();
    let (_, u, v) = hungarian(&cost);
    let scale = cost.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    let eps = 1e-9 * scale * n as f64;
    // Edges tight under the optimal dual are exactly those usable by some
    // optimal assignment.
    let tight: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| (cost[i][j] - u[i] - v[j]).abs() <= eps).collect()).collect();
    let mut allowed = tight.clone();
    for i in 0..n {
        let choice = tight[i]
            .iter()
            .copied()
            .find(|&j| {
                let mut trial = allowed.clone();
                trial[i] = vec![j];
                has_perfect_matching(&(0..n).collect::<Vec<_>>(), &trial, n)
            })
            .expect("the optimal assignment is a perfect matching on tight edges");
        allowed[i] = vec![choice];
    }
    (0..rows).map(|i| Some(allowed[i][0]).filter(|&j| j < cols)).collect()
}

/// Pairs inefficient with efficient representatives by maximizing total
/// symmetrized CodeBLEU on standardized code. Every efficient
/// representative other than a pair's own becomes one of its alternates.
pub fn match_pairs(
    inefficients: &[CodeSample],
    efficients: &[CodeSample],
    config: &CodeBleuConfig,
    exec: Execution,
) -> Vec<CodePair> {
    let pi = prepare_all(inefficients, exec);
    let pe = prepare_all(efficients, exec);
    let scores: Vec<Vec<f64>> =
        par::map(exec, &pi, |a| pe.iter().map(|b| codebleu::symmetric(a, b, config)).collect());
    pairs_from_assignment(inefficients, efficients, &assign_max(&scores))
}

fn pairs_from_assignment(inefficients: &[CodeSample], efficients: &[CodeSample], assignment: &[Option<usize>]) -> Vec<CodePair> {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(i, j)| {
            let j = (*j)?;
            Some(CodePair {
                problem_id: inefficients[i].problem_id.clone(),
                inefficient: inefficients[i].clone(),
                efficient: efficients[j].clone(),
                alternates: efficients.iter().enumerate().filter(|(x, _)| *x != j).map(|(_, s)| s.clone()).collect(),
            })
        })
        .collect()
}

// ---- pipeline ---------------------------------------------------------

/// Why a problem or sample left the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub problem_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub corpus: Corpus,
    pub dropped: Vec<DropRecord>,
}

fn problem_seed(seed: u64, problem_id: &str) -> u64 {
    // FNV-1a, so seeds do not depend on problem order.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in problem_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

struct ProblemResult {
    pairs: Vec<CodePair>,
    profile: Option<EfficiencyProfile>,
    dropped: Vec<DropRecord>,
}

fn build_problem(
    problem_id: &str,
    stored_profile: Option<EfficiencyProfile>,
    samples: Vec<CodeSample>,
    config: &PairingConfig,
    denylist: &Denylist,
    exec: Execution,
) -> ProblemResult {
    let mut dropped = Vec::new();
    let mut drop = |sample: Option<&str>, stage: &str, reason: String| {
        log::info!("{problem_id}: {stage}: {}{reason}", sample.map(|s| format!("{s}: ")).unwrap_or_default());
        dropped.push(DropRecord {
            problem_id: problem_id.to_string(),
            sample_id: sample.map(str::to_string),
            stage: stage.to_string(),
            reason,
        });
    };

    let mut purified = Vec::new();
    for mut s in samples {
        if s.scaled_time_ms.is_none() {
            drop(Some(&s.id), "timing", "no scaled time".into());
            continue;
        }
        match pynorm::purify(&s.source, denylist) {
            Ok(src) => {
                s.token_count = pynorm::tokenize_lenient(&src).len();
                s.source = src;
                purified.push(s);
            }
            Err(e) => drop(Some(&s.id), "purify", e.to_string()),
        }
    }

    let before = purified.len();
    let deduped = dedup(&purified, config.dedup_threshold);
    if deduped.len() < before {
        drop(None, "dedup", format!("{} near-duplicates removed", before - deduped.len()));
    }
    let before = deduped.len();
    let kept = length_filter(&deduped, config);
    if kept.len() < before {
        drop(None, "length", format!("{} over-long samples removed", before - kept.len()));
    }

    let profile = match stored_profile {
        Some(p) => p,
        None => {
            let times: Vec<f64> = kept.iter().filter_map(|s| s.scaled_time_ms).collect();
            match efficiency::profile_from_times(&times) {
                Ok(p) => p,
                Err(e) => {
                    drop(None, "profile", e.to_string());
                    return ProblemResult { pairs: Vec::new(), profile: None, dropped };
                }
            }
        }
    };

    let (eff, ineff) = match split_by_efficiency(&kept, &profile, config.efficiency_split_npi) {
        Ok(x) => x,
        Err(e) => {
            drop(None, "split", e.to_string());
            return ProblemResult { pairs: Vec::new(), profile: Some(profile), dropped };
        }
    };
    if eff.is_empty() || ineff.is_empty() {
        let side = if eff.is_empty() { "efficient" } else { "inefficient" };
        drop(None, "split", format!("no {side} samples"));
        return ProblemResult { pairs: Vec::new(), profile: Some(profile), dropped };
    }

    let seed = problem_seed(config.seed, problem_id);
    let reps = |side: &[CodeSample], salt: u64| -> Vec<CodeSample> {
        let k = cluster_count(side.len(), config.cluster_scale);
        let assignment = cluster(side, k, seed ^ salt, &config.codebleu, exec);
        assignment
            .representatives
            .iter()
            .map(|id| side.iter().find(|s| &s.id == id).expect("representative is a member").clone())
            .collect()
    };
    let eff_reps = reps(&eff, 1);
    let ineff_reps = reps(&ineff, 2);

    let with_npi = |mut s: CodeSample| {
        s.npi = s.scaled_time_ms.and_then(|t| efficiency::npi(t, &profile).ok());
        s
    };
    let mut pairs = Vec::new();
    for mut pair in match_pairs(&ineff_reps, &eff_reps, &config.codebleu, exec) {
        let (e, i) = (pair.efficient.scaled_time_ms, pair.inefficient.scaled_time_ms);
        if !matches!((e, i), (Some(e), Some(i)) if e < i) {
            drop(Some(&pair.inefficient.id), "match", format!("partner {} is not strictly faster", pair.efficient.id));
            continue;
        }
        pair.inefficient = with_npi(pair.inefficient);
        pair.efficient = with_npi(pair.efficient);
        pair.alternates = pair.alternates.into_iter().map(with_npi).collect();
        pairs.push(pair);
    }
    ProblemResult { pairs, profile: Some(profile), dropped }
}

/// Runs the full pipeline over every problem. The result holds only pairs
/// and the problems they refer to; samples that were not paired appear only
/// as alternates or not at all.
pub fn build_pairs(corpus: &Corpus, config: &PairingConfig, exec: Execution) -> Result<BuildOutput, PairingError> {
    build_pairs_with(corpus, config, &Denylist::default(), exec)
}

pub fn build_pairs_with(
    corpus: &Corpus,
    config: &PairingConfig,
    denylist: &Denylist,
    exec: Execution,
) -> Result<BuildOutput, PairingError> {
    config.check()?;
    let mut grouped: BTreeMap<String, Vec<CodeSample>> = BTreeMap::new();
    for s in corpus.all_samples() {
        grouped.entry(s.problem_id.clone()).or_default().push(s.clone());
    }
    let mut dropped = Vec::new();
    let jobs: Vec<(String, Vec<CodeSample>)> = grouped
        .into_iter()
        .filter(|(pid, _)| {
            let known = corpus.problems.contains_key(pid);
            if !known {
                dropped.push(DropRecord {
                    problem_id: pid.clone(),
                    sample_id: None,
                    stage: "input".into(),
                    reason: "unknown problem".into(),
                });
            }
            known
        })
        .collect();
    let results = par::map(exec, &jobs, |(pid, samples)| {
        let stored = corpus.problems[pid].profile;
        build_problem(pid, stored, samples.clone(), config, denylist, exec)
    });

    let mut out = Corpus::default();
    for ((pid, _), r) in jobs.iter().zip(results) {
        dropped.extend(r.dropped);
        if r.pairs.is_empty() {
            continue;
        }
        let mut problem = corpus.problems[pid].clone();
        if problem.profile.is_none() {
            problem.profile = r.profile;
        }
        out.add_problem(problem);
        out.pairs.extend(r.pairs);
    }
    Ok(BuildOutput { corpus: out, dropped })
}
