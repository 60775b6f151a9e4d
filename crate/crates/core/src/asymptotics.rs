//! Closed-form exponents and bound functions, evaluated numerically.
//!
//! `log` is the natural logarithm throughout.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::stirling::LogStirlingRow;

/// Distance from 0 and 1 inside which the γ-equation is solved.
pub const DOMAIN_MARGIN: f64 = 1e-6;
pub const ROOT_TOL: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSolve {
    pub c: f64,
    pub gamma: f64,
    /// `|γ (1 - e^{-1/γ}) - c|`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub c: f64,
    pub entropy: f64,
    pub x: f64,
    pub mu4: f64,
    pub lambda4: f64,
    pub mu3: f64,
    pub g: f64,
}

impl ExponentPoint {
    /// All curves at `c`, for `c` in `(0, 1/2]`.
    pub fn at(c: f64) -> Result<Self> {
        Ok(ExponentPoint {
            c,
            entropy: entropy(c),
            x: x_of_c(c)?,
            mu4: mu4(c)?,
            lambda4: lambda4(c)?,
            mu3: mu3(c)?,
            g: g_of_c(c)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub n: usize,
    /// `k` for `f_k(l)`, `t` for `s_t(k)`.
    pub k: usize,
    /// `l` for `f_k(l)`, `k` for `s_t(k)`.
    pub l: usize,
    pub log_value: f64,
}

fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Bisection for an increasing `f` with `f(lo) <= 0 <= f(hi)`.
/// Stops once `|f| <= tol` or the bracket collapses, after at most `max_iter` halvings.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    let mut mid = lo + (hi - lo) / 2.0;
    for _ in 0..max_iter {
        mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() <= tol && hi - lo <= tol {
            break;
        }
        if v > 0.0 {
            hi = mid;
        } else if v < 0.0 {
            lo = mid;
        } else {
            break;
        }
    }
    mid
}

/// `γ (1 - e^{-1/γ})`, increasing from 0 to 1 on `(0, ∞)`.
fn gamma_map(gamma: f64) -> f64 {
    gamma * -(-1.0 / gamma).exp_m1()
}

pub fn solve_gamma(c: f64) -> Result<GammaSolve> {
    if !(c > DOMAIN_MARGIN && c < 1.0 - DOMAIN_MARGIN) {
        return domain(format!(
            "γ-equation solved for c in ({DOMAIN_MARGIN}, 1 - {DOMAIN_MARGIN}), got {c}"
        ));
    }
    // gamma_map(γ) <= γ, and gamma_map(γ) >= 1 - 1/(2γ)
    let lo = c;
    let hi = (1.0 / (1.0 - c)).max(1.0);
    let gamma = bisect_increasing(|g| gamma_map(g) - c, lo, hi, 0.0, MAX_BISECTIONS);
    let residual = (gamma_map(gamma) - c).abs();
    debug_assert!(residual <= ROOT_TOL, "c = {c}, residual = {residual}");
    Ok(GammaSolve { c, gamma, residual })
}

/// `g(c) = c + log γ + (γ - c) log(γ - c) - γ log γ`.
pub fn g_of_c(c: f64) -> Result<f64> {
    let gamma = solve_gamma(c)?.gamma;
    // At the root γ - c = γ e^{-1/γ}, so (γ - c) log(γ - c) - γ log γ
    // collapses to -c log γ - e^{-1/γ}; this avoids both log(0) for small c
    // and cancellation of large terms near c = 1.
    Ok(c + (1.0 - c) * gamma.ln() - (-1.0 / gamma).exp())
}

/// Binary entropy `-c log c - (1-c) log(1-c)`; 0 at the endpoints.
pub fn entropy(c: f64) -> f64 {
    if c <= 0.0 || c >= 1.0 {
        return 0.0;
    }
    -c * c.ln() - (1.0 - c) * (-c).ln_1p()
}

/// Smallest root of `2x = e (c - x)^2`.
pub fn x_of_c(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("x(c) needs c > 0, got {c}"));
    }
    let e = std::f64::consts::E;
    // e x^2 - (2ec + 2) x + e c^2 = 0; larger root first, smaller from the product c^2
    let b = 2.0 * e * c + 2.0;
    let disc = 8.0 * e * c + 4.0;
    let larger = (b + disc.sqrt()) / (2.0 * e);
    Ok(c * c / larger)
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// Exponent `μ(c)` of the four-map union bound, `c` in `(0, 1/2]`.
pub fn mu4(c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 0.5) {
        return domain(format!("μ4 defined for c in (0, 1/2], got {c}"));
    }
    let x = x_of_c(c)?;
    if !(c - x > 0.0) || !(x > 0.0) {
        return domain(format!("c - x(c) not positive at c = {c}"));
    }
    Ok(xlogx(1.0 - c) - x * std::f64::consts::LN_2 + 2.0 * xlogx(c)
        - 2.0 * xlogx(c - x)
        - xlogx(x))
}

/// `λ(c) = H(c) + 4 μ4(c)`.
pub fn lambda4(c: f64) -> Result<f64> {
    Ok(entropy(c) + 4.0 * mu4(c)?)
}

/// Exponent `μ(c)` of the three-map bound, `c` in `(0, 1)`.
pub fn mu3(c: f64) -> Result<f64> {
    let g = g_of_c(c)?;
    let half = c / 2.0;
    let log1m = (-half).ln_1p();
    Ok(std::f64::consts::LN_2 * (half - 1.0 / 6.0) - (1.0 - half) * log1m - half
        + g / 2.0
        + log1m / 2.0)
}

/// `(c, f(c))` at `steps + 1` evenly spaced points of `[a, b]`.
pub fn scan<F>(f: F, a: f64, b: f64, steps: usize) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    if steps == 0 || !(a <= b) {
        return input(format!("scan needs a <= b and steps >= 1, got [{a}, {b}] / {steps}"));
    }
    (0..=steps)
        .map(|i| {
            let c = a + (b - a) * i as f64 / steps as f64;
            f(c).map(|v| (c, v))
        })
        .collect()
}

/// Sign changes of λ4 located by a scan of the given step over `(0, 1/2]`
/// and refined by bisection. Returns the abscissae in increasing order.
pub fn lambda4_sign_changes(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.5) {
        return input(format!("scan step must lie in (0, 0.5), got {step}"));
    }
    let steps = (0.5 / step).round() as usize;
    let mut roots = Vec::new();
    let mut prev_c = step;
    let mut prev = lambda4(prev_c)?;
    for i in 2..=steps {
        let c = 0.5 * i as f64 / steps as f64;
        let v = lambda4(c)?;
        if (prev < 0.0) != (v < 0.0) {
            let sign = if v > prev { 1.0 } else { -1.0 };
            let root = bisect_increasing(
                |z| sign * lambda4(z).unwrap_or(f64::NAN),
                prev_c,
                c,
                ROOT_TOL,
                MAX_BISECTIONS,
            );
            roots.push(root);
        }
        prev_c = c;
        prev = v;
    }
    Ok(roots)
}

/// Endpoints of the interval where λ4 is negative.
pub fn lambda4_interval() -> Result<(f64, f64)> {
    match lambda4_sign_changes(1e-4)?.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        other => domain(format!("expected two sign changes of λ4, found {}", other.len())),
    }
}

/// Maximum of μ3 over `steps + 1` grid points of `[a, b]`, as `(c, μ3(c))`.
pub fn mu3_max(a: f64, b: f64, steps: usize) -> Result<(f64, f64)> {
    let pts = scan(mu3, a, b, steps)?;
    Ok(pts
        .into_iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best }))
}

/// `log f_k(l)` with `f_k(l) = n^{l-n} S(k,l) (n-l)^{n-k}`, using a precomputed row `S(k, .)`.
pub fn f_k_l_log_with_row(n: usize, row: &LogStirlingRow, l: usize) -> Result<f64> {
    let k = row.n();
    if !(1 <= l && l <= k && k < n) {
        return input(format!("f_k(l) needs 1 <= l <= k <= n-1, got n = {n}, k = {k}, l = {l}"));
    }
    let nf = n as f64;
    Ok((l as f64 - nf) * nf.ln() + row.get(l)? + (n - k) as f64 * ((n - l) as f64).ln())
}

pub fn f_k_l_log(n: usize, k: usize, l: usize) -> Result<f64> {
    if !(1 <= l && l <= k && k < n) {
        return input(format!("f_k(l) needs 1 <= l <= k <= n-1, got n = {n}, k = {k}, l = {l}"));
    }
    f_k_l_log_with_row(n, &LogStirlingRow::compute(k)?, l)
}

pub fn f_k_l(n: usize, k: usize, l: usize) -> Result<BoundEvaluation> {
    Ok(BoundEvaluation {
        n,
        k,
        l,
        log_value: f_k_l_log(n, k, l)?,
    })
}

/// `log s_t(k)` with `s_t(k) = n^{k-t} S(t,k) (1 - k/n)^t`, using a precomputed row `S(t, .)`.
pub fn s_t_k_log_with_row(n: usize, row: &LogStirlingRow, k: usize) -> Result<f64> {
    let t = row.n();
    if !(1 <= k && k <= t && k < n) {
        return input(format!("s_t(k) needs 1 <= k <= t and k <= n-1, got n = {n}, t = {t}, k = {k}"));
    }
    let nf = n as f64;
    Ok((k as f64 - t as f64) * nf.ln() + row.get(k)? + t as f64 * (-(k as f64) / nf).ln_1p())
}

pub fn s_t_k_log(n: usize, t: usize, k: usize) -> Result<f64> {
    if !(1 <= k && k <= t && k < n) {
        return input(format!("s_t(k) needs 1 <= k <= t and k <= n-1, got n = {n}, t = {t}, k = {k}"));
    }
    s_t_k_log_with_row(n, &LogStirlingRow::compute(t)?, k)
}

pub fn s_t_k(n: usize, t: usize, k: usize) -> Result<BoundEvaluation> {
    Ok(BoundEvaluation {
        n,
        k: t,
        l: k,
        log_value: s_t_k_log(n, t, k)?,
    })
}

/// `m * log(1 - j/n)`, with `0^0 = 1`.
fn log_pow_1m(j: f64, n: f64, m: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        m * (-j / n).ln_1p()
    }
}

fn check_moment_args(n: usize, t: usize) -> Result<()> {
    if n == 0 || t == 0 {
        return input(format!("moments need n >= 1 and t >= 1, got n = {n}, t = {t}"));
    }
    Ok(())
}

/// `E[M] = n ((1 - 1/n)^{n-1})^t`, `M` the number of singleton blocks of the supremum.
pub fn exact_e_m(n: usize, t: usize) -> Result<f64> {
    check_moment_args(n, t)?;
    let nf = n as f64;
    Ok(nf * (t as f64 * log_pow_1m(1.0, nf, nf - 1.0)).exp())
}

/// `E[C(M, 2)] = C(n, 2) ((1 - 1/n)(1 - 2/n)^{n-2})^t`.
pub fn exact_e_m_pairs(n: usize, t: usize) -> Result<f64> {
    check_moment_args(n, t)?;
    if n < 2 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let per_map = log_pow_1m(1.0, nf, 1.0) + log_pow_1m(2.0, nf, nf - 2.0);
    Ok(nf * (nf - 1.0) / 2.0 * (t as f64 * per_map).exp())
}

/// `Var(M) = 2 E[C(M,2)] + E[M] - E[M]^2`.
pub fn exact_var_m(n: usize, t: usize) -> Result<f64> {
    let m = exact_e_m(n, t)?;
    Ok(2.0 * exact_e_m_pairs(n, t)? + m - m * m)
}

/// Probability that the infimum of `t` map partitions is all singletons:
/// `prod_{s<n} (1 - s / n^t)`, evaluated in log space.
pub fn exact_inf_min_prob(n: usize, t: usize) -> Result<f64> {
    check_moment_args(n, t)?;
    let total = (n as f64).powi(t as i32);
    let log_p: f64 = (0..n).map(|s| (-(s as f64) / total).ln_1p()).sum();
    Ok(log_p.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn gamma_at_one_minus_inverse_e() {
        let s = solve_gamma(1.0 - (-1.0f64).exp()).unwrap();
        assert!((s.gamma - 1.0).abs() <= 1e-10);
        assert!(s.residual <= ROOT_TOL);
    }

    #[test]
    fn gamma_half() {
        let s = solve_gamma(0.5).unwrap();
        assert!(s.residual <= ROOT_TOL);
        // frozen from an independent bracketing solve at 1e-15
        assert!((s.gamma - 0.627_500_487_457_987_7).abs() < 1e-10);
    }

    #[test]
    fn gamma_domain() {
        for c in [0.0, 1e-7, 1.0 - 1e-7, 1.0, -0.5, f64::NAN] {
            assert!(matches!(solve_gamma(c), Err(Error::Domain(_))), "c = {c}");
        }
        assert!(solve_gamma(2e-6).unwrap().residual <= ROOT_TOL);
        assert!(solve_gamma(1.0 - 2e-6).unwrap().residual <= ROOT_TOL);
    }

    #[test]
    fn gamma_increasing_on_grid() {
        let gammas: Vec<f64> = (1..=100)
            .map(|i| solve_gamma(i as f64 / 101.0).unwrap().gamma)
            .collect();
        assert!(gammas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn g_matches_literal_formula() {
        assert!((g_of_c(1.0 - 1.0 / E).unwrap() - (1.0 - 2.0 / E)).abs() < 1e-12);
        for i in 1..20 {
            let c = 0.05 * i as f64;
            let gamma = solve_gamma(c).unwrap().gamma;
            let literal =
                c + gamma.ln() + (gamma - c) * (gamma - c).ln() - gamma * gamma.ln();
            assert!((g_of_c(c).unwrap() - literal).abs() < 1e-9, "c = {c}");
        }
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(0.5) - LN_2).abs() < 1e-15);
        assert_eq!(entropy(0.0), 0.0);
        assert_eq!(entropy(1.0), 0.0);
        for c in [0.1, 0.27, 0.4] {
            assert!((entropy(c) - entropy(1.0 - c)).abs() < 1e-15);
        }
    }

    #[test]
    fn x_small_root() {
        let x = x_of_c(1.0 / 3.0).unwrap();
        assert!((x - 0.0843).abs() < 1e-4);
        assert!(x_of_c(1e-9).unwrap() < 1e-15);
        assert!(x_of_c(0.0).is_err());
        for i in 1..50 {
            let c = 0.01 * i as f64;
            let x = x_of_c(c).unwrap();
            assert!(0.0 < x && x < c);
            assert!((2.0 * x - E * (c - x).powi(2)).abs() <= 1e-12);
        }
    }

    #[test]
    fn lambda4_signs() {
        assert!(lambda4(0.2).unwrap() < 0.0);
        assert!(lambda4(0.05).unwrap() > 0.0);
        assert!(mu4(0.6).is_err());
        assert!(mu4(0.0).is_err());
    }

    #[test]
    fn exponent_point_is_finite() {
        let p = ExponentPoint::at(0.25).unwrap();
        for v in [p.entropy, p.x, p.mu4, p.lambda4, p.mu3, p.g] {
            assert!(v.is_finite());
        }
        assert!(p.x < p.c);
    }

    #[test]
    fn bound_diagonals() {
        let (n, k) = (50usize, 12usize);
        let want = (n - k) as f64 * (1.0 - k as f64 / n as f64).ln();
        assert!((f_k_l_log(n, k, k).unwrap() - want).abs() < 1e-10);
        let t = 9;
        let want = t as f64 * (1.0 - t as f64 / n as f64).ln();
        assert!((s_t_k_log(n, t, t).unwrap() - want).abs() < 1e-10);
        assert!(f_k_l_log(10, 10, 3).is_err());
        assert!(f_k_l_log(10, 4, 5).is_err());
        assert!(s_t_k_log(10, 4, 5).is_err());
        assert!(s_t_k_log(4, 9, 4).is_err());
    }

    #[test]
    fn moments_small_cases() {
        assert!((exact_e_m(2, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((exact_e_m_pairs(2, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_e_m(1, 3).unwrap(), 1.0);
        assert!(exact_e_m(0, 1).is_err());
        assert!(exact_var_m(5, 2).unwrap() >= 0.0);
    }

    #[test]
    fn inf_min_small_cases() {
        assert_eq!(exact_inf_min_prob(1, 4).unwrap(), 1.0);
        assert!((exact_inf_min_prob(2, 2).unwrap() - 0.75).abs() < 1e-15);
        assert!((exact_inf_min_prob(100_000, 2).unwrap() - (-0.5f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn scan_validation() {
        assert!(scan(Ok, 0.5, 0.1, 10).is_err());
        assert!(scan(Ok, 0.1, 0.5, 0).is_err());
        assert_eq!(scan(Ok, 0.0, 1.0, 4).unwrap().len(), 5);
    }
}
