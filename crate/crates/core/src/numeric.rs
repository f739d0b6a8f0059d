//! Shared numerical kernels: stable log-domain accumulation, monotone root
//! finding, and the fixed text format used by every emitted file.

use crate::error::{Error, Result};

/// Log-domain sum: returns `ln(sum_i exp(x_i))` with a max shift so that
/// extreme exponents neither overflow nor underflow.
///
/// Empty input (or all `-inf`) yields `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// Absolute tolerance used by the per-level root solver.
pub const ROOT_TOL_ENGINE: f64 = 1e-10;
/// Absolute tolerance used by the closed-form cascade solver.
pub const ROOT_TOL_ORACLE: f64 = 1e-12;
/// Initial bracket half-width for root searches in `t`.
pub const BRACKET_START: f64 = 64.0;
/// Bracket expansion stops once |t| exceeds this cap.
pub const BRACKET_CAP: f64 = 1_048_576.0; // 2^20

/// Root of a strictly decreasing function by bracket expansion plus bisection.
///
/// The bracket starts at `[-BRACKET_START, BRACKET_START]` and doubles outward
/// until `f` changes sign, erroring out at `BRACKET_CAP`. Bisection then runs
/// to the absolute tolerance `tol` in the argument.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    let mut lo = -BRACKET_START;
    let mut hi = BRACKET_START;
    // f decreasing: want f(lo) >= 0 >= f(hi).
    while f(lo) < 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo.abs() > BRACKET_CAP {
            return Err(Error::Unbracketed { cap: BRACKET_CAP });
        }
    }
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi.abs() > BRACKET_CAP {
            return Err(Error::Unbracketed { cap: BRACKET_CAP });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Format a float with 9 significant digits, locale-independent.
///
/// Values with decimal exponent in [-4, 8] print in plain decimal with
/// trailing zeros trimmed; everything else prints in scientific notation.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.8e}", x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..=8).contains(&exp) {
        let prec = (8 - exp).max(0) as usize;
        let s = format!("{:.*}", prec, x);
        trim_zeros(&s)
    } else {
        let (mant, e) = sci.split_at(sci.find('e').unwrap());
        format!("{}{}", trim_zeros(mant), e)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}
