use num_bigint::BigUint;
use num_traits::{One, Pow};

use randmap_lattice::asymptotics::{
    exact_e_m, exact_e_m_pairs, exact_inf_min_prob, exact_var_m, f_k_l_log, f_k_l_log_with_row,
    g_of_c, lambda4, mu3, s_t_k_log, s_t_k_log_with_row, x_of_c,
};
use randmap_lattice::experiments::{run_exhaustive, ExperimentKind};
use randmap_lattice::partition::{all_partitions, block_stats, join_streaming};
use randmap_lattice::stirling::{big_ln, exact_row, stirling_log, LogStirlingRow, StirlingTable};

#[test]
fn stirling_matches_partition_enumeration() {
    let table = StirlingTable::build(10).unwrap();
    for n in 1..=10 {
        let mut by_blocks = vec![0u64; n + 1];
        for p in all_partitions(n) {
            by_blocks[p.num_blocks()] += 1;
        }
        for k in 0..=n {
            assert_eq!(table.get(n, k).unwrap(), &BigUint::from(by_blocks[k]), "S({n},{k})");
        }
    }
}

#[test]
fn log_space_agrees_with_exact_up_to_500() {
    let table = StirlingTable::build(500).unwrap();
    for n in (1..=500).step_by(7).chain([500]) {
        let row = LogStirlingRow::compute(n).unwrap();
        for k in 1..=n {
            let exact = big_ln(table.get(n, k).unwrap());
            let got = row.get(k).unwrap();
            assert!(
                (got - exact).abs() <= 1e-9 * exact.abs().max(1.0),
                "n = {n}, k = {k}: {got} vs {exact}"
            );
            assert!((got - exact).abs() <= row.error_bound().max(1e-12));
        }
    }
}

#[test]
fn log_space_at_2000() {
    let v = stirling_log(2000, 1000).unwrap();
    assert!(v.is_finite() && v > 0.0);
    let exact = big_ln(&exact_row(2000).unwrap()[1000]);
    assert!((v - exact).abs() <= 1e-9 * exact);
}

fn big_pow(base: usize, exp: usize) -> BigUint {
    Pow::pow(BigUint::from(base), exp as u32)
}

#[test]
fn bound_functions_match_exact_big_integers() {
    let rows: Vec<Vec<BigUint>> = (0..=60).map(|k| exact_row(k).unwrap()).collect();
    for n in [5usize, 17, 61, 120, 200] {
        for k in (1..n.min(61)).step_by(3) {
            let log_row = LogStirlingRow::compute(k).unwrap();
            for l in 1..=k {
                // f_k(l) = S(k,l) (n-l)^(n-k) / n^(n-l)
                let num = &rows[k][l] * big_pow(n - l, n - k);
                let want = big_ln(&num) - big_ln(&big_pow(n, n - l));
                let got = f_k_l_log_with_row(n, &log_row, l).unwrap();
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "f n={n} k={k} l={l}");
            }
            // s_t(k) with t = k here: S(t,j) n^j (n-j)^t / (n^t n^t)
            let t = k;
            for j in 1..=t.min(n - 1) {
                let num = &rows[t][j] * big_pow(n, j) * big_pow(n - j, t);
                let want = big_ln(&num) - big_ln(&big_pow(n, 2 * t));
                let got = s_t_k_log_with_row(n, &log_row, j).unwrap();
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "s n={n} t={t} k={j}");
            }
        }
    }
    assert!((f_k_l_log(30, 5, 2).unwrap() - f_k_l_log_with_row(30, &LogStirlingRow::compute(5).unwrap(), 2).unwrap()).abs() < 1e-15);
    assert!(s_t_k_log(30, 5, 2).is_ok());
}

#[test]
fn f_ratio_bounds_on_grid() {
    let n = 10_000usize;
    let nf = n as f64;
    for k in 2..=100usize {
        let row = LogStirlingRow::compute(k).unwrap();
        let kf = k as f64;
        for l in 2..=k {
            let log_ratio =
                f_k_l_log_with_row(n, &row, l - 1).unwrap() - f_k_l_log_with_row(n, &row, l).unwrap();
            let slack = 1e-9;
            assert!(log_ratio <= (std::f64::consts::E * kf * kf / (2.0 * nf)).ln() + slack);
            let refined = std::f64::consts::E * kf * kf / (2.0 * nf * (k - l + 1) as f64);
            assert!(log_ratio <= refined.ln() + slack, "k={k} l={l}");
            let lf = l as f64;
            let sharper = std::f64::consts::E * lf * lf / (2.0 * nf * (k - l + 1) as f64);
            assert!(log_ratio <= sharper.ln() + slack, "k={k} l={l}");
        }
    }
}

#[test]
fn s_t_bounds_at_n_ten_thousand() {
    let n = 10_000usize;
    let log_n = (n as f64).ln();
    let t = ((n as f64).sqrt() * log_n) as usize;
    let row = LogStirlingRow::compute(t).unwrap();
    let values: Vec<f64> = (1..=t).map(|k| s_t_k_log_with_row(n, &row, k).unwrap()).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max <= 2f64.ln() - log_n * log_n / 2.0, "max log s_t(k) = {max}");
    let cut = t as f64 - log_n * log_n;
    for k in 2..=t {
        if (k as f64) < cut {
            assert!(values[k - 2] < values[k - 1], "s_t({}) >= s_t({k})", k - 1);
        }
    }
}

#[test]
fn diagonal_identities() {
    for (n, k) in [(10usize, 3usize), (1000, 999), (50, 1)] {
        let f = f_k_l_log(n, k, k).unwrap();
        let want = (n - k) as f64 * (1.0 - k as f64 / n as f64).ln();
        assert!((f - want).abs() <= 1e-9 * want.abs().max(1.0));
    }
    let s = s_t_k_log(1000, 40, 40).unwrap();
    assert!((s - 40.0 * (1.0f64 - 0.04).ln()).abs() < 1e-10);
}

/// E[M] and E[C(M,2)] by enumerating every t-tuple of maps.
fn enumerate_m_moments(n: usize, t: usize) -> (f64, f64) {
    let tuples = n.pow((n * t) as u32);
    let (mut sum_m, mut sum_pairs) = (0u64, 0u64);
    for mut code in 0..tuples {
        let maps: Vec<Vec<u32>> = (0..t)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let v = (code % n) as u32;
                        code /= n;
                        v
                    })
                    .collect()
            })
            .collect();
        let m = block_stats(&join_streaming(n, &maps).unwrap()).singletons as u64;
        sum_m += m;
        sum_pairs += m * m.saturating_sub(1) / 2;
    }
    (sum_m as f64 / tuples as f64, sum_pairs as f64 / tuples as f64)
}

#[test]
fn moments_of_m_match_enumeration() {
    for n in 1..=4 {
        for t in 1..=2 {
            let (m, pairs) = enumerate_m_moments(n, t);
            assert!((exact_e_m(n, t).unwrap() - m).abs() < 1e-12, "n={n} t={t}");
            assert!((exact_e_m_pairs(n, t).unwrap() - pairs).abs() < 1e-12, "n={n} t={t}");
            assert!((run_exhaustive(ExperimentKind::Singletons, n, t).unwrap().value - m).abs() < 1e-12);
            let var = 2.0 * pairs + m - m * m;
            assert!((exact_var_m(n, t).unwrap() - var).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_singletons_asymptotics() {
    // |E[M] - n e^{-t}| <= C t e^{-t} with C = 1, fitted: the gap is about t e^{-t} / 2
    let mut worst = 0.0f64;
    for n in [1_000usize, 10_000, 100_000, 1_000_000] {
        let t_max = (2.0 * (n as f64).ln()) as usize;
        for t in 1..=t_max {
            let tf = t as f64;
            let gap = (exact_e_m(n, t).unwrap() - n as f64 * (-tf).exp()).abs();
            worst = worst.max(gap / (tf * (-tf).exp()));
        }
    }
    assert!(worst <= 1.0, "fitted constant {worst}");
}

#[test]
fn inf_min_probability_matches_enumeration() {
    for n in 1..=3 {
        for t in 1..=2 {
            let exact = run_exhaustive(ExperimentKind::InfMin, n, t).unwrap().value;
            assert!((exact_inf_min_prob(n, t).unwrap() - exact).abs() < 1e-12, "n={n} t={t}");
        }
    }
    assert!((exact_inf_min_prob(2, 2).unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn stirling_asymptotic_exponent() {
    let n = 2000usize;
    let k = n / 2;
    let log_s = stirling_log(n, k).unwrap();
    let nf = n as f64;
    let approx = (n - k) as f64 * nf.ln() + g_of_c(0.5).unwrap() * nf;
    assert!((log_s - approx).abs() / nf <= 0.05);
}

/// Smallest root of 2x = e (c - x)^2 by bisection on [0, c], where
/// h(x) = 2x - e (c - x)^2 increases from -e c^2 to 2c.
fn x_by_bisection(c: f64) -> f64 {
    let h = |x: f64| 2.0 * x - std::f64::consts::E * (c - x) * (c - x);
    let (mut lo, mut hi) = (0.0f64, c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn x_matches_bisection_oracle() {
    for i in 1..=500 {
        let c = i as f64 / 500.0;
        let x = x_of_c(c).unwrap();
        assert!((x - x_by_bisection(c)).abs() <= 1e-10, "c = {c}");
    }
    assert!((x_of_c(1.0 / 3.0).unwrap() - 0.0843).abs() < 5e-5);
}

#[test]
fn g_finite_and_continuous() {
    let step = 0.98 / 999.0;
    let grid: Vec<f64> = (0..1000).map(|i| 0.01 + step * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&c| g_of_c(c).unwrap()).collect();
    assert!(vals.iter().all(|v| v.is_finite()));
    // no jumps: each step moves g by at most 1.5 step * max |g'| at its ends,
    // with g' from a central difference (g' ~ 1/c near 0, ~ -log(1-c) near 1)
    let slope = |c: f64| ((g_of_c(c + 1e-7).unwrap() - g_of_c(c - 1e-7).unwrap()) / 2e-7).abs();
    for i in 1..grid.len() {
        let bound = 1.5 * step * slope(grid[i - 1]).max(slope(grid[i])) + 1e-12;
        assert!((vals[i] - vals[i - 1]).abs() <= bound, "c = {}", grid[i]);
    }
}

#[test]
fn mu3_continuity_and_sign() {
    // mu3 carries g/2, whose slope is about (1/c - log c)/2 near 0: a 1e-4 step moves
    // it by up to 0.05 at c = 0.001, so the 1e-2 bound only holds from c ~ 0.005
    let mut prev = mu3(0.001).unwrap();
    for i in 1..9980 {
        let c = 0.001 + 1e-4 * i as f64;
        let v = mu3(c).unwrap();
        assert!(v < 0.0);
        let jump = (v - prev).abs();
        if c >= 0.0052 {
            assert!(jump < 1e-2, "c = {c}");
        } else {
            let left = c - 1e-4;
            assert!(jump <= 1e-4 * ((1.0 / left - left.ln()) / 2.0 + 1.0), "c = {c}");
        }
        prev = v;
    }
}

#[test]
fn lambda4_changes_sign_near_endpoints() {
    for (c, inside_left) in [(0.087412, true), (0.340034, false)] {
        let left = lambda4(c - 1e-3).unwrap();
        let right = lambda4(c + 1e-3).unwrap();
        assert!(left * right < 0.0);
        assert_eq!(left > 0.0, inside_left);
    }
}

#[test]
fn bell_row_one() {
    assert_eq!(exact_row(0).unwrap(), vec![BigUint::one()]);
}
