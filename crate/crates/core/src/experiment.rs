//! Replica sweeps over network size, bias and encoding, with summary
//! statistics and rank-sum comparisons between bias groups.
//!
//! Each replica is a pure function of the sweep configuration and its seed,
//! `mix_seed(base_seed, n, bias bits, encoding, replica)`, so the result set
//! does not depend on scheduling or on the number of workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::adaptation::{adaptive_walk, Encoding, SensorMapping, StepSample, TrialRecord, WalkConfig};
use crate::bn::{check_open_unit, generate_network, BooleanNetwork, MAX_K, SENSOR_COUNT};
use crate::error::{ConfigError, Error, Result};
use crate::rng::{mix_seed, ReplicaStreams, Stream};
use crate::world::{random_free_pose, ArenaGeometry, RobotParams, World};

/// Final best performance above which a replica counts as good.
pub const GOOD_THRESHOLD: f64 = 0.7;
/// Samples up to this combined size get an exact rank-sum p value.
pub const EXACT_LIMIT: usize = 12;

fn default_n_values() -> Vec<usize> {
    vec![100]
}
fn default_bias_values() -> Vec<f64> {
    vec![0.1, 0.21, 0.5, 0.79, 0.9]
}
fn default_encodings() -> Vec<Encoding> {
    vec![Encoding::Positive]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub bias_values: Vec<f64>,
    pub encodings: Vec<Encoding>,
    pub replicas: usize,
    pub iterations: usize,
    /// Control steps per trial.
    #[serde(alias = "T")]
    pub steps_per_trial: usize,
    pub theta: f64,
    pub base_seed: u64,
    pub k: usize,
    pub output_bias: f64,
    pub arena: ArenaGeometry,
    pub robot: RobotParams,
    pub reset_pose_each_trial: bool,
    /// Significance level for the bias comparisons.
    pub alpha: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: default_n_values(),
            bias_values: default_bias_values(),
            encodings: default_encodings(),
            replicas: 100,
            iterations: 120,
            steps_per_trial: 1200,
            theta: 0.1,
            base_seed: 1,
            k: 3,
            output_bias: 0.5,
            arena: ArenaGeometry::default(),
            robot: RobotParams::default(),
            reset_pose_each_trial: false,
            alpha: 0.05,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.n_values.is_empty() || self.bias_values.is_empty() || self.encodings.is_empty() {
            return invalid("n_values, bias_values and encodings must be nonempty".into());
        }
        for (name, v) in [
            ("replicas", self.replicas),
            ("iterations", self.iterations),
            ("steps_per_trial", self.steps_per_trial),
        ] {
            if v == 0 {
                return invalid(format!("{name} must be at least 1"));
            }
        }
        for &n in &self.n_values {
            // rewiring needs a node outside the 24 mapped and 2 output nodes
            if n <= SENSOR_COUNT + 2 {
                return Err(ConfigError::TooFewNodes { n, min: SENSOR_COUNT + 3 });
            }
            if self.k == 0 || self.k > MAX_K.min(n) {
                return Err(ConfigError::InDegree { k: self.k, max: MAX_K.min(n) });
            }
        }
        for &b in &self.bias_values {
            check_open_unit("bias", b)?;
        }
        check_open_unit("output_bias", self.output_bias)?;
        check_open_unit("alpha", self.alpha)?;
        if !self.theta.is_finite() {
            return invalid(format!("theta must be finite, got {}", self.theta));
        }
        self.robot.validate()?;
        self.arena.validate(&self.robot)?;
        Ok(())
    }

    /// Every `(n, bias, encoding)` group in sweep order.
    pub fn keys(&self) -> Vec<ConfigKey> {
        let mut keys = Vec::new();
        for &n in &self.n_values {
            for &bias in &self.bias_values {
                for &encoding in &self.encodings {
                    keys.push(ConfigKey { n, bias, encoding });
                }
            }
        }
        keys
    }

    pub fn walk_config(&self, encoding: Encoding) -> WalkConfig {
        WalkConfig {
            encoding,
            theta: self.theta,
            iterations: self.iterations,
            steps_per_trial: self.steps_per_trial,
            reset_pose_each_trial: self.reset_pose_each_trial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigKey {
    pub n: usize,
    pub bias: f64,
    pub encoding: Encoding,
}

impl ConfigKey {
    fn order(&self) -> (usize, u64, Encoding) {
        (self.n, self.bias.to_bits(), self.encoding)
    }

    fn encoding_id(&self) -> u64 {
        match self.encoding {
            Encoding::Positive => 0,
            Encoding::Negative => 1,
        }
    }

    pub fn replica_seed(&self, base_seed: u64, replica: usize) -> u64 {
        mix_seed(&[base_seed, self.n as u64, self.bias.to_bits(), self.encoding_id(), replica as u64])
    }

    /// File stem `<n>_<bias>_<encoding>_<replica>`.
    pub fn replica_stem(&self, replica: usize) -> String {
        format!("{}_{}_{}_{}", self.n, self.bias, self.encoding, replica)
    }
}

#[derive(Debug, Clone)]
pub struct ReplicaResult {
    pub key: ConfigKey,
    pub replica: usize,
    pub seed: u64,
    pub final_best: f64,
    pub records: Vec<TrialRecord>,
    pub wall_seconds: f64,
}

/// Everything one replica needs before its walk starts.
pub struct ReplicaSetup {
    pub network: BooleanNetwork,
    pub mapping: SensorMapping,
    pub world: World,
    pub streams: ReplicaStreams,
}

pub fn setup_replica(cfg: &SweepConfig, key: ConfigKey, seed: u64) -> Result<ReplicaSetup, ConfigError> {
    let streams = ReplicaStreams::new(seed);
    let network = generate_network(key.n, cfg.k, key.bias, cfg.output_bias, &mut streams.stream(Stream::Network))?;
    let mapping = SensorMapping::random(&network, &mut streams.stream(Stream::Mapping));
    let pose = random_free_pose(&cfg.arena, &cfg.robot, &mut streams.stream(Stream::Pose))?;
    let world = World::new(cfg.arena, cfg.robot, pose)?;
    Ok(ReplicaSetup {
        network,
        mapping,
        world,
        streams,
    })
}

/// Runs replica `replica` of group `key`, reporting every control step to `observe`.
pub fn run_replica_observed<F: FnMut(&StepSample)>(
    cfg: &SweepConfig,
    key: ConfigKey,
    replica: usize,
    observe: F,
) -> Result<ReplicaResult, ConfigError> {
    let started = Instant::now();
    let seed = key.replica_seed(cfg.base_seed, replica);
    let ReplicaSetup {
        network,
        mapping,
        mut world,
        streams,
    } = setup_replica(cfg, key, seed)?;
    let walk = adaptive_walk(
        &network,
        mapping,
        &mut world,
        &cfg.walk_config(key.encoding),
        &mut streams.stream(Stream::Rewire),
        observe,
    );
    Ok(ReplicaResult {
        key,
        replica,
        seed,
        final_best: walk.final_best(),
        records: walk.records,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn run_replica(cfg: &SweepConfig, key: ConfigKey, replica: usize) -> Result<ReplicaResult, ConfigError> {
    run_replica_observed(cfg, key, replica, |_| {})
}

/// Runs every replica of every group on a pool of `workers` threads.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<ReplicaResult>> {
    run_sweep_with(cfg, workers, |_| Ok(()))
}

/// Like [`run_sweep`], handing each finished replica to `sink` on the worker
/// that ran it. Results come back in group-then-replica order.
pub fn run_sweep_with<S>(cfg: &SweepConfig, workers: usize, sink: S) -> Result<Vec<ReplicaResult>>
where
    S: Fn(&ReplicaResult) -> Result<()> + Sync,
{
    cfg.validate()?;
    let jobs: Vec<(ConfigKey, usize)> = cfg
        .keys()
        .into_iter()
        .flat_map(|key| (0..cfg.replicas).map(move |r| (key, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        jobs.par_iter()
            .map(|&(key, r)| {
                let result = run_replica(cfg, key, r)?;
                sink(&result)?;
                Ok(result)
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub key: ConfigKey,
    pub replicas: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub good_fraction: f64,
}

/// Quantile of sorted data by linear interpolation between closest ranks:
/// position `(len - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(key: ConfigKey, values: &[f64]) -> Option<SummaryRow> {
    if values.is_empty() {
        warn!("empty group n={} bias={} encoding={} omitted", key.n, key.bias, key.encoding);
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let good = v.iter().filter(|&&x| x > GOOD_THRESHOLD).count();
    Some(SummaryRow {
        key,
        replicas: v.len(),
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
        good_fraction: good as f64 / v.len() as f64,
    })
}

fn group_finals(results: &[ReplicaResult]) -> BTreeMap<(usize, u64, Encoding), (ConfigKey, Vec<f64>)> {
    let mut groups: BTreeMap<_, (ConfigKey, Vec<f64>)> = BTreeMap::new();
    for r in results {
        groups
            .entry(r.key.order())
            .or_insert_with(|| (r.key, Vec::new()))
            .1
            .push(r.final_best);
    }
    groups
}

/// One row per `(n, bias, encoding)` group, sorted by group.
pub fn summarize(results: &[ReplicaResult]) -> Vec<SummaryRow> {
    group_finals(results)
        .into_values()
        .filter_map(|(key, values)| summarize_values(key, &values))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// The first sample tends to be larger.
    Greater,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Mann-Whitney U of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks of the pooled sample, doubled so they are integers.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share (start + 1 + end) / 2
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

/// Wilcoxon rank-sum (Mann-Whitney) test of `a` against `b` with midranks
/// for ties.
///
/// When `|a| + |b| <= 12` the p value is exact: the permutation distribution
/// of the rank sum given the observed ties, counted by dynamic programming.
/// Larger samples use the normal approximation with tie-corrected variance
/// and a continuity correction of 1/2.
pub fn rank_sum_test(a: &[f64], b: &[f64], alternative: Alternative) -> RankSumResult {
    assert!(!a.is_empty() && !b.is_empty(), "rank-sum test needs two nonempty samples");
    let (na, nb) = (a.len(), b.len());
    let total = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let ra2: u64 = ranks[..na].iter().sum();
    let u = (ra2 as f64 - (na * (na + 1)) as f64) / 2.0;

    if total <= EXACT_LIMIT {
        return RankSumResult {
            u,
            p_value: exact_p(&ranks, na, ra2, alternative),
            exact: true,
        };
    }

    let mean = (na * nb) as f64 / 2.0;
    let ties: f64 = tie_sizes(&pooled).map(|t| t * t * t - t).sum();
    let nt = total as f64;
    let var = (na * nb) as f64 / 12.0 * ((nt + 1.0) - ties / (nt * (nt - 1.0)));
    if var <= 0.0 {
        return RankSumResult { u, p_value: 1.0, exact: false };
    }
    let sd = var.sqrt();
    let normal = Normal::standard();
    let p = match alternative {
        Alternative::Greater => normal.sf((u - mean - 0.5) / sd),
        Alternative::TwoSided => (2.0 * normal.sf(((u - mean).abs() - 0.5) / sd)).min(1.0),
    };
    RankSumResult {
        u,
        p_value: p.clamp(0.0, 1.0),
        exact: false,
    }
}

fn tie_sizes(pooled: &[f64]) -> impl Iterator<Item = f64> {
    let mut v = pooled.to_vec();
    v.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i + 1;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        sizes.push((j - i) as f64);
        i = j;
    }
    sizes.into_iter()
}

fn exact_p(ranks: &[u64], na: usize, observed: u64, alternative: Alternative) -> f64 {
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[j][s]: subsets of size j with doubled rank sum s
    let mut ways = vec![vec![0u64; width]; na + 1];
    ways[0][0] = 1;
    for &r in ranks {
        for j in (1..=na).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            let (prev, cur) = (&lower[j - 1], &mut upper[0]);
            for s in (r as usize..width).rev() {
                cur[s] += prev[s - r as usize];
            }
        }
    }
    let counts = &ways[na];
    let all: u64 = counts.iter().sum();
    // centre of the doubled rank-sum distribution: na (N + 1)
    let centre = (na * (ranks.len() + 1)) as i64;
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| match alternative {
            Alternative::Greater => s as u64 >= observed,
            Alternative::TwoSided => (s as i64 - centre).abs() >= (observed as i64 - centre).abs(),
        })
        .map(|(_, &c)| c)
        .sum();
    hits as f64 / all as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasComparison {
    pub n: usize,
    pub encoding: Encoding,
    pub bias_ref: f64,
    pub bias_other: f64,
    pub u: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// One-sided rank-sum tests of the `reference` bias group against every
/// other bias group with the same `n` and encoding.
pub fn compare_biases(
    results: &[ReplicaResult],
    n: usize,
    encoding: Encoding,
    reference: f64,
    alpha: f64,
) -> Vec<BiasComparison> {
    let groups = group_finals(results);
    let in_slice: Vec<&(ConfigKey, Vec<f64>)> = groups
        .values()
        .filter(|(k, _)| k.n == n && k.encoding == encoding)
        .collect();
    let Some((_, ref_values)) = in_slice.iter().find(|(k, _)| k.bias == reference) else {
        warn!("no results for reference bias {reference} (n={n}, {encoding}); comparison omitted");
        return Vec::new();
    };
    in_slice
        .iter()
        .filter(|(k, _)| k.bias != reference)
        .map(|(k, values)| {
            let test = rank_sum_test(ref_values, values, Alternative::Greater);
            BiasComparison {
                n,
                encoding,
                bias_ref: reference,
                bias_other: k.bias,
                u: test.u,
                p_value: test.p_value,
                significant: test.p_value < alpha,
            }
        })
        .collect()
}

/// Every ordered pair of bias groups within each `(n, encoding)` slice.
pub fn all_comparisons(results: &[ReplicaResult], alpha: f64) -> Vec<BiasComparison> {
    let mut slices: Vec<(usize, Encoding)> = Vec::new();
    let mut biases: BTreeMap<(usize, Encoding), Vec<f64>> = BTreeMap::new();
    for (key, _) in group_finals(results).into_values() {
        let slice = (key.n, key.encoding);
        if !slices.contains(&slice) {
            slices.push(slice);
        }
        biases.entry(slice).or_default().push(key.bias);
    }
    slices
        .into_iter()
        .flat_map(|(n, enc)| {
            biases[&(n, enc)]
                .iter()
                .flat_map(|&b| compare_biases(results, n, enc, b, alpha))
                .collect::<Vec<_>>()
        })
        .collect()
}

pub const REPLICA_HEADER: &str = "iteration,q,F_trial,accepted,F_best";
pub const SUMMARY_HEADER: &str = "n,bias,encoding,replicas,min,q1,median,q3,max,good_fraction";
pub const STATS_HEADER: &str = "n,encoding,bias_ref,bias_other,U,p_value,significant";

pub fn replica_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(REPLICA_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{}", r.iteration, r.q, r.f_trial, r.accepted, r.f_best);
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.key.n, r.key.bias, r.key.encoding, r.replicas, r.min, r.q1, r.median, r.q3, r.max, r.good_fraction
        );
    }
    out
}

pub fn stats_csv(rows: &[BiasComparison]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.encoding, r.bias_ref, r.bias_other, r.u, r.p_value, r.significant
        );
    }
    out
}

/// Parses a replica CSV back into records.
pub fn parse_replica_csv(text: &str) -> Result<Vec<TrialRecord>, ConfigError> {
    let mut lines = text.lines();
    if lines.next() != Some(REPLICA_HEADER) {
        return Err(ConfigError::Invalid("replica CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || ConfigError::Invalid(format!("replica CSV line {}: {line:?}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(TrialRecord {
                iteration: f[0].parse().map_err(|_| bad())?,
                q: f[1].parse().map_err(|_| bad())?,
                f_trial: f[2].parse().map_err(|_| bad())?,
                accepted: f[3].parse().map_err(|_| bad())?,
                f_best: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
