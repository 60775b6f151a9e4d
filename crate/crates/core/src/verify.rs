//! Self-check suite: inequalities, lattice laws, k-free properties and
//! oracle equivalences, each reported as a named pass/fail line.

use std::f64::consts::E;

use crate::asymptotics::{lambda4_interval, solve_gamma, x_of_c, ROOT_TOL};
use crate::partition::{
    all_partitions, graph_components_oracle, join, join_streaming, kfree_spectrum, meet,
    partition_from_map, refines, verify_kfree_with_spectrum, SetPartition,
};
use crate::random_maps::{derive_trial_rng, fill_uniform_map, SeedSpec, TrialRng};
use crate::stirling::{
    bell_numbers, ratio_bound_holds, ratio_is_monotone, rough_ratio_bound_holds,
    row_is_log_concave, StirlingTable,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

pub const STIRLING_SWEEP_MAX: usize = 300;
pub const LATTICE_TRIPLES: usize = 10_000;
pub const LATTICE_MAX_N: usize = 8;
pub const KFREE_MAX_N: usize = 10;
pub const ORACLE_INSTANCES: usize = 1000;
pub const ORACLE_MAX_N: usize = 64;

pub fn verify_stirling() -> Result<Vec<CheckOutcome>> {
    let table = StirlingTable::build(STIRLING_SWEEP_MAX)?;
    let max = STIRLING_SWEEP_MAX;
    let bell_ok = table.row_sums()[..=30] == bell_numbers(30)[..];
    let concave_bad: Vec<usize> = (3..=max)
        .filter(|&n| !row_is_log_concave(table.row(n).unwrap()))
        .collect();
    let monotone_bad: Vec<usize> = (3..=max)
        .filter(|&n| !ratio_is_monotone(table.row(n).unwrap()))
        .collect();
    let mut ratio_bad = Vec::new();
    let mut rough_bad = Vec::new();
    for k in 2..=max {
        let row = table.row(k)?;
        for l in 2..=k {
            if !ratio_bound_holds(row, l) {
                ratio_bad.push((k, l));
            }
            if !rough_ratio_bound_holds(row, l) {
                rough_bad.push((k, l));
            }
        }
    }
    let describe = |bad: usize| {
        if bad == 0 {
            "no violations".to_string()
        } else {
            format!("{bad} violations")
        }
    };
    Ok(vec![
        CheckOutcome::new(
            "stirling-recurrence",
            table.satisfies_recurrence(),
            format!("rows 0..={max}"),
        ),
        CheckOutcome::new("stirling-bell-sums", bell_ok, "row sums = Bell numbers, n <= 30"),
        CheckOutcome::new(
            "stirling-log-concavity",
            concave_bad.is_empty(),
            format!("3 <= n <= {max}: {}", describe(concave_bad.len())),
        ),
        CheckOutcome::new(
            "stirling-ratio-monotone",
            monotone_bad.is_empty(),
            format!("S(n,k-1)/S(n,k) nondecreasing, n <= {max}: {}", describe(monotone_bad.len())),
        ),
        CheckOutcome::new(
            "stirling-ratio-bound",
            ratio_bad.is_empty(),
            format!("2 <= l <= k <= {max}: {}", describe(ratio_bad.len())),
        ),
        CheckOutcome::new(
            "stirling-rough-ratio-bound",
            rough_bad.is_empty(),
            format!("S(k,l-1)/S(k,l) <= k^2/2, k <= {max}: {}", describe(rough_bad.len())),
        ),
    ])
}

fn random_partition(n: usize, rng: &mut TrialRng) -> SetPartition {
    let mut map = vec![0u32; n];
    fill_uniform_map(&mut map, rng);
    partition_from_map(&map).expect("sampled map is valid")
}

/// First failing lattice law for `(p, q, r)`, if any.
pub fn lattice_law_violation(
    p: &SetPartition,
    q: &SetPartition,
    r: &SetPartition,
) -> Result<Option<&'static str>> {
    let pq_meet = meet(p, q)?;
    let pq_join = join(p, q)?;
    let laws = [
        ("meet commutative", pq_meet == meet(q, p)?),
        ("join commutative", pq_join == join(q, p)?),
        ("meet associative", meet(&pq_meet, r)? == meet(p, &meet(q, r)?)?),
        ("join associative", join(&pq_join, r)? == join(p, &join(q, r)?)?),
        ("meet idempotent", meet(p, p)? == *p),
        ("join idempotent", join(p, p)? == *p),
        ("absorption meet", meet(p, &pq_join)? == *p),
        ("absorption join", join(p, &pq_meet)? == *p),
        ("meet below", refines(&pq_meet, p)? && refines(&pq_meet, q)?),
        ("join above", refines(p, &pq_join)? && refines(q, &pq_join)?),
    ];
    Ok(laws.into_iter().find(|(_, ok)| !ok).map(|(name, _)| name))
}

pub fn verify_lattice(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut failures = Vec::new();
    for i in 0..LATTICE_TRIPLES as u64 {
        let mut rng = derive_trial_rng(SeedSpec::new(seed, i));
        let n = 1 + rng.bounded(LATTICE_MAX_N as u64) as usize;
        let p = random_partition(n, &mut rng);
        let q = random_partition(n, &mut rng);
        let r = random_partition(n, &mut rng);
        if let Some(law) = lattice_law_violation(&p, &q, &r)? {
            failures.push(format!("{law} on ({p}) ({q}) ({r})"));
        }
    }
    // meet is the greatest lower bound, exhaustively for n <= 5
    let mut glb_failures = 0usize;
    for n in 1..=5 {
        let parts: Vec<_> = all_partitions(n).collect();
        for p in &parts {
            for q in &parts {
                let m = meet(p, q)?;
                for r in &parts {
                    if refines(r, p)? && refines(r, q)? && !refines(r, &m)? {
                        glb_failures += 1;
                    }
                }
            }
        }
    }
    Ok(vec![
        CheckOutcome::new(
            "lattice-laws",
            failures.is_empty(),
            match failures.first() {
                None => format!("{LATTICE_TRIPLES} random triples, n <= {LATTICE_MAX_N}"),
                Some(f) => format!("{} failures, first: {f}", failures.len()),
            },
        ),
        CheckOutcome::new(
            "lattice-meet-is-glb",
            glb_failures == 0,
            format!("exhaustive n <= 5: {glb_failures} failures"),
        ),
    ])
}

/// Number of `(partition, a, b)` cases checked and lemma failures over all
/// partitions of sizes `3..=max_n`.
pub fn kfree_exhaustive_scan(max_n: usize) -> Result<(u64, u64)> {
    let mut cases = 0u64;
    let mut failures = 0u64;
    for n in 3..=max_n {
        for p in all_partitions(n) {
            let sizes = p.block_sizes();
            let spectrum = kfree_spectrum(&p);
            for a in 1..n {
                for b in a + 1..n {
                    let report = verify_kfree_with_spectrum(&p, &sizes, &spectrum, a, b)?;
                    cases += 1;
                    failures += report.failures() as u64;
                }
            }
        }
    }
    Ok((cases, failures))
}

pub fn verify_kfree() -> Result<Vec<CheckOutcome>> {
    let (cases, failures) = kfree_exhaustive_scan(KFREE_MAX_N)?;
    Ok(vec![CheckOutcome::new(
        "kfree-lemmas",
        failures == 0,
        format!("{cases} (partition, a, b) cases, n <= {KFREE_MAX_N}: {failures} failures"),
    )])
}

pub fn verify_oracle(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut mismatches = 0usize;
    for i in 0..ORACLE_INSTANCES as u64 {
        let mut rng = derive_trial_rng(SeedSpec::new(seed ^ 0x6f72_6163_6c65, i));
        let n = 1 + rng.bounded(ORACLE_MAX_N as u64) as usize;
        let t = 1 + rng.bounded(5) as usize;
        let maps: Vec<Vec<u32>> = (0..t)
            .map(|_| {
                let mut m = vec![0u32; n];
                fill_uniform_map(&mut m, &mut rng);
                m
            })
            .collect();
        if graph_components_oracle(n, &maps)? != join_streaming(n, &maps)? {
            mismatches += 1;
        }
    }
    Ok(vec![CheckOutcome::new(
        "graph-oracle-vs-join",
        mismatches == 0,
        format!("{ORACLE_INSTANCES} random instances, n <= {ORACLE_MAX_N}: {mismatches} mismatches"),
    )])
}

pub fn verify_roots() -> Result<Vec<CheckOutcome>> {
    let mut gamma_worst = 0.0f64;
    for i in 1..=1000 {
        let c = i as f64 / 1001.0;
        gamma_worst = gamma_worst.max(solve_gamma(c)?.residual);
    }
    let mut x_worst = 0.0f64;
    for i in 1..=1000 {
        let c = i as f64 / 1000.0;
        let x = x_of_c(c)?;
        x_worst = x_worst.max((2.0 * x - E * (c - x).powi(2)).abs());
    }
    let (lo, hi) = lambda4_interval()?;
    let interval_ok = (lo - 0.087412).abs() <= 1e-3 && (hi - 0.340034).abs() <= 1e-3;
    Ok(vec![
        CheckOutcome::new(
            "gamma-residual",
            gamma_worst <= ROOT_TOL,
            format!("max residual {gamma_worst:.3e} on 1000 points"),
        ),
        CheckOutcome::new(
            "x-residual",
            x_worst <= ROOT_TOL,
            format!("max residual {x_worst:.3e} on 1000 points"),
        ),
        CheckOutcome::new(
            "lambda4-interval",
            interval_ok,
            format!("negative on [{lo:.6}, {hi:.6}]"),
        ),
    ])
}

pub fn verify_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = verify_stirling()?;
    out.extend(verify_lattice(seed)?);
    out.extend(verify_kfree()?);
    out.extend(verify_oracle(seed)?);
    out.extend(verify_roots()?);
    Ok(out)
}
