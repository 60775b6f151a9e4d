//! CSV and JSON encodings of experiment results.

use crate::experiments::{EstimateResult, RunOutput};

pub const CSV_HEADER: &str = "kind,n,t,trials,seed,success,estimate,stderr,ci_lo,ci_hi,elapsed_ms";

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn fmt_sig12(x: f64) -> String {
    const PREC: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..PREC).contains(&exp) {
        let fixed = format!("{:.*}", (PREC - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig12).unwrap_or_default()
}

pub fn csv_row(r: &EstimateResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.kind,
        r.n,
        r.t,
        r.trials,
        r.seed,
        r.success,
        fmt_sig12(r.estimate),
        fmt_sig12(r.stderr),
        opt(r.ci_lo),
        opt(r.ci_hi),
        r.elapsed_ms
    )
}

/// Header plus one row per estimate (one per `t` for a scan).
pub fn to_csv(output: &RunOutput) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in output.rows() {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn to_json(output: &RunOutput) -> String {
    let mut s = serde_json::to_string_pretty(output).expect("results serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<RunOutput> {
    serde_json::from_str(text)
}
