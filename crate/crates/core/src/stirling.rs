//! Stirling numbers of the second kind, exact and in log space.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{input, Error, Result};

pub const DEFAULT_EXACT_CAP: usize = 2000;

/// Environment variable overriding [`DEFAULT_EXACT_CAP`].
pub const CAP_ENV: &str = "RANDMAP_STIRLING_CAP";

/// Largest `n` served by the exact big-integer routines.
pub fn exact_cap() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_EXACT_CAP)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capacity(format!(
            "exact Stirling numbers are capped at n = {cap} (requested n = {n}); use the log-space routines"
        )));
    }
    Ok(())
}

/// Natural log of a positive big integer, from its top 64 bits.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit value fits in f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Advances `row` from `S(m-1, .)` to `S(m, .)` in place; `row` has length `m + 1` afterwards.
fn advance_row(row: &mut Vec<BigUint>) {
    let m = row.len(); // new row index
    row.push(BigUint::zero());
    for k in (1..=m).rev() {
        let prev = std::mem::take(&mut row[k]);
        row[k] = prev * k + &row[k - 1];
    }
    row[0] = BigUint::zero();
}

/// Row `S(n, 0..=n)` via the recurrence with O(n) live entries.
pub fn exact_row(n: usize) -> Result<Vec<BigUint>> {
    check_cap(n, exact_cap())?;
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        advance_row(&mut row);
    }
    Ok(row)
}

pub fn stirling_exact(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return input(format!("S(n, k) needs k <= n, got n = {n}, k = {k}"));
    }
    let mut row = exact_row(n)?;
    Ok(row.swap_remove(k))
}

/// Cached triangle `S(n, k)`, `0 <= k <= n <= n_max`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn build(n_max: usize) -> Result<Self> {
        Self::build_with_cap(n_max, exact_cap())
    }

    pub fn build_with_cap(n_max: usize, cap: usize) -> Result<Self> {
        check_cap(n_max, cap)?;
        let mut rows = Vec::with_capacity(n_max + 1);
        let mut row = vec![BigUint::one()];
        rows.push(row.clone());
        for _ in 0..n_max {
            advance_row(&mut row);
            rows.push(row.clone());
        }
        Ok(StirlingTable { rows })
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, n: usize) -> Result<&[BigUint]> {
        self.rows
            .get(n)
            .map(|r| r.as_slice())
            .ok_or_else(|| Error::Capacity(format!("table holds rows up to {}, asked for {n}", self.n_max())))
    }

    pub fn get(&self, n: usize, k: usize) -> Result<&BigUint> {
        if k > n {
            return input(format!("S(n, k) needs k <= n, got n = {n}, k = {k}"));
        }
        Ok(&self.row(n)?[k])
    }

    /// Checks `S(n,k) = k S(n-1,k) + S(n-1,k-1)` and the boundary values on every row.
    pub fn satisfies_recurrence(&self) -> bool {
        if self.rows[0] != [BigUint::one()] {
            return false;
        }
        self.rows.windows(2).enumerate().all(|(m, w)| {
            let (prev, cur) = (&w[0], &w[1]);
            let n = m + 1;
            cur.len() == n + 1
                && cur[0].is_zero()
                && cur[n].is_one()
                && (1..n).all(|k| cur[k] == &prev[k] * k + &prev[k - 1])
        })
    }

    pub fn row_sums(&self) -> Vec<BigUint> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Bell numbers `B(0..=n_max)` from the Bell (Aitken) triangle.
pub fn bell_numbers(n_max: usize) -> Vec<BigUint> {
    let mut bells = vec![BigUint::one()];
    let mut row = vec![BigUint::one()];
    for _ in 0..n_max {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
        bells.push(row[0].clone());
    }
    bells
}

/// `log S(n, k)` for `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogStirlingRow {
    n: usize,
    // index k; entry 0 is -inf for n >= 1
    log_values: Vec<f64>,
    error_bound: f64,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl LogStirlingRow {
    pub fn compute(n: usize) -> Result<Self> {
        if n == 0 {
            return input("log Stirling row needs n >= 1");
        }
        let mut row = vec![f64::NEG_INFINITY; n + 1];
        row[0] = 0.0; // S(0,0)
        let log_k: Vec<f64> = (0..=n).map(|k| (k as f64).ln()).collect();
        for m in 1..=n {
            for k in (1..=m).rev() {
                let stay = if row[k] == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    log_k[k] + row[k]
                };
                row[k] = log_add_exp(stay, row[k - 1]);
            }
            row[0] = f64::NEG_INFINITY;
        }
        let scale = row[1..].iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        Ok(LogStirlingRow {
            n,
            log_values: row,
            error_bound: 4.0 * n as f64 * f64::EPSILON * scale,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.n {
            return input(format!("log S(n, k) needs 1 <= k <= n, got n = {}, k = {k}", self.n));
        }
        Ok(self.log_values[k])
    }

    /// Values for `k = 1..=n`.
    pub fn values(&self) -> &[f64] {
        &self.log_values[1..]
    }

    /// Bound on the absolute error of each stored log, i.e. the relative error of `S(n, k)`.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }
}

pub fn stirling_log(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return input(format!("log S(n, k) needs 1 <= k <= n, got n = {n}, k = {k}"));
    }
    LogStirlingRow::compute(n)?.get(k)
}

/// Number of surjections `[k] -> [l]`, i.e. `S(k, l) * l!`.
pub fn surjection_count(k: usize, l: usize) -> Result<BigUint> {
    if l == 0 || l > k {
        return input(format!("surjections need 1 <= l <= k, got k = {k}, l = {l}"));
    }
    let factorial: BigUint = (1..=l).map(BigUint::from).product();
    Ok(stirling_exact(k, l)? * factorial)
}

/// `S(n,k)^2 >= S(n,k-1) S(n,k+1)` for all `2 <= k <= n-1`, given row `S(n, 0..=n)`.
pub fn row_is_log_concave(row: &[BigUint]) -> bool {
    let n = row.len() - 1;
    (2..n).all(|k| &row[k] * &row[k] >= &row[k - 1] * &row[k + 1])
}

pub fn check_log_concavity(n: usize) -> Result<bool> {
    if n < 3 {
        return input(format!("log-concavity check needs n >= 3, got {n}"));
    }
    Ok(row_is_log_concave(&exact_row(n)?))
}

/// `S(k,l-1)/S(k,l) <= l(l-1) / (2(k-l+1))`, cross-multiplied, given row `S(k, .)`.
pub fn ratio_bound_holds(row: &[BigUint], l: usize) -> bool {
    let k = row.len() - 1;
    &row[l - 1] * (2 * (k - l + 1)) <= &row[l] * (l * (l - 1))
}

/// `S(k,l-1)/S(k,l) <= k^2 / 2`, cross-multiplied.
pub fn rough_ratio_bound_holds(row: &[BigUint], l: usize) -> bool {
    let k = row.len() - 1;
    &row[l - 1] * 2u32 <= &row[l] * (k * k)
}

/// `S(n,k-1)/S(n,k)` nondecreasing in `k` over `1 <= k <= n`.
pub fn ratio_is_monotone(row: &[BigUint]) -> bool {
    let n = row.len() - 1;
    // S(n,k-1)/S(n,k) <= S(n,k)/S(n,k+1)
    (2..n).all(|k| &row[k - 1] * &row[k + 1] <= &row[k] * &row[k])
}

pub fn check_ratio_bound(k: usize, l: usize) -> Result<bool> {
    if l < 2 || l > k {
        return input(format!("ratio bound needs 2 <= l <= k, got k = {k}, l = {l}"));
    }
    Ok(ratio_bound_holds(&exact_row(k)?, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        for n in 1..30 {
            assert_eq!(stirling_exact(n, n).unwrap(), BigUint::one());
            assert_eq!(stirling_exact(n, 1).unwrap(), BigUint::one());
            assert!(stirling_exact(n, 0).unwrap().is_zero());
        }
        assert_eq!(stirling_exact(0, 0).unwrap(), BigUint::one());
    }

    #[test]
    fn small_values() {
        assert_eq!(stirling_exact(5, 2).unwrap(), BigUint::from(15u32));
        assert_eq!(stirling_exact(4, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(stirling_exact(10, 5).unwrap(), BigUint::from(42525u32));
    }

    #[test]
    fn domain_and_capacity_errors() {
        assert!(matches!(stirling_exact(3, 4), Err(Error::Input(_))));
        assert!(matches!(
            StirlingTable::build_with_cap(11, 10),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(stirling_exact(DEFAULT_EXACT_CAP + 1, 2), Err(Error::Capacity(_))));
        assert!(stirling_log(4, 0).is_err());
        assert!(stirling_log(4, 5).is_err());
        assert!(surjection_count(3, 0).is_err());
        assert!(check_ratio_bound(3, 1).is_err());
        assert!(check_log_concavity(2).is_err());
    }

    #[test]
    fn table_recurrence_and_bell_sums() {
        let table = StirlingTable::build(30).unwrap();
        assert!(table.satisfies_recurrence());
        assert_eq!(table.row_sums(), bell_numbers(30));
        assert_eq!(bell_numbers(5)[5], BigUint::from(52u32));
        assert!(table.get(3, 4).is_err());
        assert!(table.row(31).is_err());
    }

    #[test]
    fn log_row_examples() {
        assert_eq!(stirling_log(7, 7).unwrap(), 0.0);
        assert!((stirling_log(5, 2).unwrap() - 15f64.ln()).abs() <= 1e-10);
        let row = LogStirlingRow::compute(300).unwrap();
        let exact = exact_row(300).unwrap();
        for k in 1..=300 {
            let want = big_ln(&exact[k]);
            let got = row.get(k).unwrap();
            assert!((got - want).abs() <= row.error_bound().max(1e-12), "k = {k}");
        }
    }

    #[test]
    fn surjections() {
        assert_eq!(surjection_count(6, 1).unwrap(), BigUint::one());
        assert_eq!(surjection_count(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(surjection_count(5, 5).unwrap(), BigUint::from(120u32));
    }

    #[test]
    fn inequality_examples() {
        assert!(check_log_concavity(3).unwrap());
        assert!(check_log_concavity(4).unwrap());
        assert!(check_ratio_bound(4, 2).unwrap());
        // l = k is tight: S(k,k-1) = C(k,2)
        for k in 2..20 {
            let row = exact_row(k).unwrap();
            assert_eq!(&row[k - 1] * 2u32, BigUint::from(k * (k - 1)));
            assert!(ratio_bound_holds(&row, k));
        }
    }

    #[test]
    fn big_ln_matches_f64_for_small_values() {
        for v in [1u64, 2, 15, 1 << 40, u64::MAX] {
            assert!((big_ln(&BigUint::from(v)) - (v as f64).ln()).abs() < 1e-12);
        }
        let big = BigUint::one() << 5000u32;
        assert!((big_ln(&big) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
