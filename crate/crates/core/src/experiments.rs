//! Reproducible Monte Carlo estimates for the infimum and supremum of random
//! map partitions, plus exhaustive ground truth for tiny instances.
//!
//! Trial `i` of a run draws its maps from `derive_trial_rng((seed, i))` and
//! always consumes exactly `t * n` bounded draws. Results are reduced in
//! trial-index order, so output does not depend on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{exact_e_m, exact_inf_min_prob, exact_var_m};
use crate::error::{input, Error, Result};
use crate::partition::{block_stats, join_streaming, meet, partition_from_map};
use crate::random_maps::{derive_trial_rng, mix64, InfWorkspace, SeedSpec, SupWorkspace, TrialRng};

/// Below this many trials no confidence interval is reported.
pub const MIN_TRIALS_FOR_CI: usize = 100;
const Z95: f64 = 1.959_963_984_540_054;
/// Guard on the number of map tuples visited by [`run_exhaustive`].
pub const EXHAUSTIVE_LIMIT: u64 = 100_000_000;
/// Default `M / n` threshold for the singletons kind.
pub const DEFAULT_SINGLETON_FRACTION: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    InfMin,
    SupMax,
    Singletons,
    TwoBlocks,
    LargestBlock,
    ThresholdScan,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::InfMin,
        ExperimentKind::SupMax,
        ExperimentKind::Singletons,
        ExperimentKind::TwoBlocks,
        ExperimentKind::LargestBlock,
        ExperimentKind::ThresholdScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::InfMin => "inf-min",
            ExperimentKind::SupMax => "sup-max",
            ExperimentKind::Singletons => "singletons",
            ExperimentKind::TwoBlocks => "two-blocks",
            ExperimentKind::LargestBlock => "largest-block",
            ExperimentKind::ThresholdScan => "threshold-scan",
        }
    }

    /// Kinds that keep per-trial integer records.
    pub fn keeps_records(self) -> bool {
        matches!(
            self,
            ExperimentKind::Singletons | ExperimentKind::TwoBlocks | ExperimentKind::LargestBlock
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Number of maps; the first `t` of a threshold scan.
    pub t: usize,
    /// Last `t` (inclusive) of a threshold scan.
    pub t_max: Option<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    pub format: OutputFormat,
    /// Success threshold as a fraction of `n` (singletons: `M >= θn`,
    /// largest-block: `L >= θn`). `None` picks the kind's default.
    pub threshold: Option<f64>,
    /// When false, `elapsed_ms` is reported as 0 so output files are byte-stable.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, t: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            kind,
            n,
            t,
            t_max: None,
            trials,
            master_seed,
            workers: 0,
            format: OutputFormat::Csv,
            threshold: None,
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return input("n must be at least 1");
        }
        if self.n > (u32::MAX / 2) as usize {
            return input(format!("n = {} too large", self.n));
        }
        if self.t == 0 {
            return input("t must be at least 1");
        }
        if self.trials == 0 {
            return input("trials must be at least 1");
        }
        match (self.kind, self.t_max) {
            (ExperimentKind::ThresholdScan, None) => {
                return input("threshold-scan needs an inclusive t range (t_max)")
            }
            (ExperimentKind::ThresholdScan, Some(hi)) if hi < self.t => {
                return input(format!("empty t range [{}, {hi}]", self.t))
            }
            _ => {}
        }
        if self.kind == ExperimentKind::TwoBlocks && self.t != 2 {
            return input("two-blocks is defined for t = 2");
        }
        if let Some(th) = self.threshold {
            if !(th.is_finite() && th >= 0.0) {
                return input(format!("threshold must be a non-negative fraction, got {th}"));
            }
        }
        Ok(())
    }

    /// Success threshold as a fraction of `n`.
    pub fn effective_threshold(&self) -> f64 {
        if let Some(th) = self.threshold {
            return th;
        }
        match self.kind {
            ExperimentKind::Singletons => DEFAULT_SINGLETON_FRACTION,
            ExperimentKind::LargestBlock => match self.t {
                0..=2 => (self.n as f64).powf(-0.2),
                3 => 0.01,
                _ => 1.0 / 3.0,
            },
            _ => 0.0,
        }
    }
}

/// Integer statistics of one trial's partition (the infimum for the
/// inf kinds, the supremum otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub num_blocks: u32,
    /// Largest block `L`.
    pub largest: u32,
    /// One-element blocks `M`.
    pub singletons: u32,
    /// Two-element blocks `|A|`.
    pub two_blocks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub kind: ExperimentKind,
    pub n: usize,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    pub success: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub elapsed_ms: u64,
    pub config: ExperimentConfig,
    /// Kind-specific aggregates (means, moments, quantiles, exact comparisons).
    pub summary: BTreeMap<String, f64>,
    pub records: Option<Vec<TrialRecord>>,
}

impl EstimateResult {
    fn new(config: &ExperimentConfig, t: usize, success: u64, elapsed_ms: u64) -> Self {
        let trials = config.trials;
        let p = success as f64 / trials as f64;
        let stderr = (p * (1.0 - p) / trials as f64).sqrt();
        let (ci_lo, ci_hi) = if trials >= MIN_TRIALS_FOR_CI {
            (
                Some((p - Z95 * stderr).max(0.0)),
                Some((p + Z95 * stderr).min(1.0)),
            )
        } else {
            (None, None)
        };
        EstimateResult {
            kind: config.kind,
            n: config.n,
            t,
            trials,
            seed: config.master_seed,
            success,
            estimate: p,
            stderr,
            ci_lo,
            ci_hi,
            elapsed_ms,
            config: config.clone(),
            summary: BTreeMap::new(),
            records: None,
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<EstimateResult>,
    /// `t` values whose estimate falls below the previous row's by more
    /// than two combined standard errors.
    pub monotonicity_violations: Vec<usize>,
}

impl ScanReport {
    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

/// Output of any experiment kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RunOutput {
    Single(EstimateResult),
    Scan(ScanReport),
}

impl RunOutput {
    pub fn rows(&self) -> Vec<&EstimateResult> {
        match self {
            RunOutput::Single(r) => vec![r],
            RunOutput::Scan(s) => s.rows.iter().collect(),
        }
    }
}

struct Scratch {
    inf: InfWorkspace,
    sup: Option<SupWorkspace>,
    counts: Vec<u32>,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            inf: InfWorkspace::default(),
            sup: None,
            counts: Vec::new(),
        }
    }

    fn sup(&mut self, n: usize) -> &mut SupWorkspace {
        self.sup.get_or_insert_with(|| SupWorkspace::new(n))
    }

    fn inf_record(&mut self, n: usize, t: usize, rng: &mut TrialRng) -> TrialRecord {
        let (raw, bound) = self.inf.sample_inf(n, t, rng);
        self.counts.clear();
        self.counts.resize(bound, 0);
        for &l in raw {
            self.counts[l as usize] += 1;
        }
        record_from_sizes(self.counts.iter().map(|&c| c as usize).filter(|&c| c > 0))
    }

    fn sup_record(&mut self, n: usize, t: usize, rng: &mut TrialRng) -> TrialRecord {
        let ws = self.sup(n);
        ws.sample_sup(t, rng);
        record_from_sizes(ws.dsu.set_sizes())
    }
}

fn record_from_sizes(sizes: impl Iterator<Item = usize>) -> TrialRecord {
    let mut r = TrialRecord {
        num_blocks: 0,
        largest: 0,
        singletons: 0,
        two_blocks: 0,
    };
    for s in sizes {
        r.num_blocks += 1;
        r.largest = r.largest.max(s as u32);
        match s {
            1 => r.singletons += 1,
            2 => r.two_blocks += 1,
            _ => {}
        }
    }
    r
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot build worker pool: {e}")))
}

fn count_successes<F>(pool: &rayon::ThreadPool, trials: usize, master: u64, verdict: F) -> u64
where
    F: Fn(&mut Scratch, &mut TrialRng) -> bool + Sync,
{
    pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map_init(Scratch::new, |scratch, i| {
                let mut rng = derive_trial_rng(SeedSpec::new(master, i));
                verdict(scratch, &mut rng)
            })
            .filter(|&ok| ok)
            .count() as u64
    })
}

fn collect_records<F>(
    pool: &rayon::ThreadPool,
    trials: usize,
    master: u64,
    record: F,
) -> Vec<TrialRecord>
where
    F: Fn(&mut Scratch, &mut TrialRng) -> TrialRecord + Sync,
{
    pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map_init(Scratch::new, |scratch, i| {
                let mut rng = derive_trial_rng(SeedSpec::new(master, i));
                record(scratch, &mut rng)
            })
            .collect()
    })
}

fn elapsed(config: &ExperimentConfig, start: Instant) -> u64 {
    if config.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    config.validate()?;
    if config.kind != kind {
        return input(format!("expected a {kind} config, got {}", config.kind));
    }
    Ok(())
}

/// Mean and unbiased variance, accumulated in index order.
fn mean_var(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let len = v.len() as f64;
    let mean = v.iter().sum::<f64>() / len;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (len - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn run_inf_min(config: &ExperimentConfig) -> Result<EstimateResult> {
    expect_kind(config, ExperimentKind::InfMin)?;
    let start = Instant::now();
    let pool = build_pool(config.workers)?;
    let (n, t) = (config.n, config.t);
    let success = count_successes(&pool, config.trials, config.master_seed, |s, rng| {
        let (_, blocks) = s.inf.sample_inf(n, t, rng);
        // meet_raw hands out one fresh id per block
        blocks == n
    });
    let mut r = EstimateResult::new(config, t, success, elapsed(config, start));
    let exact = exact_inf_min_prob(n, t)?;
    r.summary.insert("exact".into(), exact);
    r.summary.insert("z_exact".into(), z_score(r.estimate, exact, r.stderr));
    if t == 2 {
        r.summary.insert("limit".into(), (-0.5f64).exp());
    }
    Ok(r)
}

fn z_score(estimate: f64, expected: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        (estimate - expected) / stderr
    } else if estimate == expected {
        0.0
    } else {
        f64::MAX.copysign(estimate - expected)
    }
}

pub fn run_two_block_poisson(config: &ExperimentConfig) -> Result<EstimateResult> {
    expect_kind(config, ExperimentKind::TwoBlocks)?;
    let start = Instant::now();
    let pool = build_pool(config.workers)?;
    let (n, t) = (config.n, config.t);
    let records = collect_records(&pool, config.trials, config.master_seed, |s, rng| {
        s.inf_record(n, t, rng)
    });
    let success = records.iter().filter(|r| r.two_blocks == 0).count() as u64;
    let mut r = EstimateResult::new(config, t, success, elapsed(config, start));
    let trials = config.trials as f64;
    let a: Vec<f64> = records.iter().map(|r| r.two_blocks as f64).collect();
    let m1 = a.iter().sum::<f64>() / trials;
    let m2 = a.iter().map(|x| x * (x - 1.0) / 2.0).sum::<f64>() / trials;
    r.summary.insert("p_a_zero".into(), r.estimate);
    r.summary.insert("factorial_moment_1".into(), m1);
    r.summary.insert("factorial_moment_2".into(), m2);
    r.summary.insert("limit_p_a_zero".into(), (-0.5f64).exp());
    r.summary.insert("limit_factorial_moment_1".into(), 0.5);
    r.summary.insert("limit_factorial_moment_2".into(), 0.125);
    let mut hist: BTreeMap<u32, u64> = BTreeMap::new();
    for rec in &records {
        *hist.entry(rec.two_blocks).or_insert(0) += 1;
    }
    for (k, c) in hist {
        r.summary.insert(format!("hist_a_{k:03}"), c as f64);
    }
    r.records = Some(records);
    Ok(r)
}

fn sup_max_with_seed(config: &ExperimentConfig, t: usize, master: u64) -> Result<EstimateResult> {
    let start = Instant::now();
    let pool = build_pool(config.workers)?;
    let n = config.n;
    let success = count_successes(&pool, config.trials, master, |s, rng| {
        let ws = s.sup(n);
        ws.sample_sup(t, rng);
        ws.dsu.components() == 1
    });
    let mut r = EstimateResult::new(config, t, success, elapsed(config, start));
    r.seed = master;
    r.summary.insert("exact_mean_singletons".into(), exact_e_m(n, t)?);
    r.summary.insert("log_n".into(), (n as f64).ln());
    Ok(r)
}

pub fn run_sup_max(config: &ExperimentConfig) -> Result<EstimateResult> {
    expect_kind(config, ExperimentKind::SupMax)?;
    sup_max_with_seed(config, config.t, config.master_seed)
}

pub fn run_singletons(config: &ExperimentConfig) -> Result<EstimateResult> {
    expect_kind(config, ExperimentKind::Singletons)?;
    let start = Instant::now();
    let pool = build_pool(config.workers)?;
    let (n, t) = (config.n, config.t);
    let records = collect_records(&pool, config.trials, config.master_seed, |s, rng| {
        s.sup_record(n, t, rng)
    });
    let cut = config.effective_threshold() * n as f64;
    let success = records.iter().filter(|r| r.singletons as f64 >= cut).count() as u64;
    let mut r = EstimateResult::new(config, t, success, elapsed(config, start));
    let (mean, var) = mean_var(records.iter().map(|r| r.singletons as f64));
    let stderr_mean = (var / config.trials as f64).sqrt();
    let exact_mean = exact_e_m(n, t)?;
    let violations = records
        .iter()
        .filter(|r| r.singletons >= 1 && r.num_blocks > 1 && r.largest as usize > n - r.singletons as usize)
        .count();
    r.summary.insert("mean_singletons".into(), mean);
    r.summary.insert("var_singletons".into(), var);
    r.summary.insert("stderr_mean_singletons".into(), stderr_mean);
    r.summary.insert("exact_mean_singletons".into(), exact_mean);
    r.summary.insert("exact_var_singletons".into(), exact_var_m(n, t)?);
    r.summary.insert("z_mean".into(), z_score(mean, exact_mean, stderr_mean));
    r.summary.insert("threshold_fraction".into(), config.effective_threshold());
    r.summary.insert("largest_bound_violations".into(), violations as f64);
    r.records = Some(records);
    Ok(r)
}

pub fn run_largest_block(config: &ExperimentConfig) -> Result<EstimateResult> {
    expect_kind(config, ExperimentKind::LargestBlock)?;
    let start = Instant::now();
    let pool = build_pool(config.workers)?;
    let (n, t) = (config.n, config.t);
    let records = collect_records(&pool, config.trials, config.master_seed, |s, rng| {
        s.sup_record(n, t, rng)
    });
    let nf = n as f64;
    let threshold = config.effective_threshold();
    let success = records
        .iter()
        .filter(|r| r.largest as f64 >= threshold * nf)
        .count() as u64;
    let mut r = EstimateResult::new(config, t, success, elapsed(config, start));
    let trials = config.trials as f64;
    let frac = |pred: &dyn Fn(f64) -> bool| {
        records.iter().filter(|r| pred(r.largest as f64)).count() as f64 / trials
    };
    let mut shares: Vec<f64> = records.iter().map(|r| r.largest as f64 / nf).collect();
    let (mean_share, _) = mean_var(shares.iter().copied());
    let (tail, _) = mean_var(shares.iter().map(|s| (1.0 - s) * (t as f64).exp()));
    shares.sort_by(f64::total_cmp);
    r.summary.insert("threshold_fraction".into(), threshold);
    r.summary.insert("mean_largest_fraction".into(), mean_share);
    r.summary.insert("frac_largest_ge_third".into(), frac(&|l| 3.0 * l >= nf));
    r.summary.insert("frac_largest_ge_0.01n".into(), frac(&|l| l >= 0.01 * nf));
    r.summary.insert("frac_largest_le_n^0.8".into(), frac(&|l| l <= nf.powf(0.8)));
    r.summary.insert("mean_scaled_complement".into(), tail);
    for (name, q) in [("q00", 0.0), ("q10", 0.1), ("q50", 0.5), ("q90", 0.9), ("q100", 1.0)] {
        r.summary.insert(format!("largest_fraction_{name}"), quantile(&shares, q));
    }
    r.records = Some(records);
    Ok(r)
}

/// Master seed of the scan row for `t`.
pub fn scan_row_seed(master_seed: u64, t: usize) -> u64 {
    mix64(master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(t as u64 + 1)))
}

pub fn run_threshold_scan(config: &ExperimentConfig) -> Result<ScanReport> {
    expect_kind(config, ExperimentKind::ThresholdScan)?;
    let t_max = config.t_max.expect("validated");
    let rows = (config.t..=t_max)
        .map(|t| sup_max_with_seed(config, t, scan_row_seed(config.master_seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let monotonicity_violations = rows
        .windows(2)
        .filter(|w| {
            let noise = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].estimate < w[0].estimate - noise
        })
        .map(|w| w[1].t)
        .collect();
    Ok(ScanReport {
        rows,
        monotonicity_violations,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    Ok(match config.kind {
        ExperimentKind::InfMin => RunOutput::Single(run_inf_min(config)?),
        ExperimentKind::SupMax => RunOutput::Single(run_sup_max(config)?),
        ExperimentKind::Singletons => RunOutput::Single(run_singletons(config)?),
        ExperimentKind::TwoBlocks => RunOutput::Single(run_two_block_poisson(config)?),
        ExperimentKind::LargestBlock => RunOutput::Single(run_largest_block(config)?),
        ExperimentKind::ThresholdScan => RunOutput::Scan(run_threshold_scan(config)?),
    })
}

/// Exact expectation over all `n^(t n)` tuples of maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveValue {
    /// Sum of the per-tuple statistic.
    pub total: u64,
    /// Number of tuples, `n^(t n)`.
    pub tuples: u64,
    pub value: f64,
}

/// Ground truth for tiny instances. The per-tuple statistic is the
/// indicator of success for inf-min, sup-max and two-blocks (no two-element
/// block in the infimum), `M` for singletons and `L` for largest-block.
pub fn run_exhaustive(kind: ExperimentKind, n: usize, t: usize) -> Result<ExhaustiveValue> {
    if n == 0 || t == 0 {
        return input("exhaustive run needs n >= 1 and t >= 1");
    }
    let exponent = (t * n) as u32;
    let tuples = (n as u64)
        .checked_pow(exponent)
        .filter(|&c| c <= EXHAUSTIVE_LIMIT)
        .ok_or_else(|| {
            Error::Capacity(format!("{n}^({t}*{n}) map tuples exceed the limit {EXHAUSTIVE_LIMIT}"))
        })?;
    if kind == ExperimentKind::ThresholdScan {
        return input("threshold-scan has no single exhaustive value; use sup-max per t");
    }
    let mut maps = vec![vec![0u32; n]; t];
    let mut total = 0u64;
    for index in 0..tuples {
        let mut rest = index;
        for map in maps.iter_mut() {
            for v in map.iter_mut() {
                *v = (rest % n as u64) as u32;
                rest /= n as u64;
            }
        }
        total += match kind {
            ExperimentKind::InfMin | ExperimentKind::TwoBlocks => {
                let inf = maps[1..].iter().try_fold(partition_from_map(&maps[0])?, |acc, m| {
                    meet(&acc, &partition_from_map(m)?)
                })?;
                let hit = if kind == ExperimentKind::InfMin {
                    inf.is_finest()
                } else {
                    !block_stats(&inf).size_histogram.contains_key(&2)
                };
                hit as u64
            }
            ExperimentKind::SupMax => join_streaming(n, &maps)?.is_coarsest() as u64,
            ExperimentKind::Singletons => block_stats(&join_streaming(n, &maps)?).singletons as u64,
            ExperimentKind::LargestBlock => {
                block_stats(&join_streaming(n, &maps)?).largest_block as u64
            }
            ExperimentKind::ThresholdScan => unreachable!(),
        };
    }
    Ok(ExhaustiveValue {
        total,
        tuples,
        value: total as f64 / tuples as f64,
    })
}
