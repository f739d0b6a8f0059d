//! Exact closed-form solver on multiplicative cascades.
//!
//! On a cascade the level-`n` joint partition sum factorizes as the `n`-th
//! power of the transfer sum
//!
//! ```text
//! phi(q, t) = sum_i  p_{1,i}^q_1 ... p_{k,i}^q_k  w_i^t
//! ```
//!
//! over the `base^d` branches, with `p_j` the analyzed weight vectors and `w`
//! the gauge weights. The unique root `B(q)` of `phi(q, t) = 1`, its gradient
//! by implicit differentiation, and the induced spectrum point
//! `(gamma, f) = (-grad B, <gamma, q> + B)` are all exact up to root
//! tolerance, which makes this module the ground truth for every test of the
//! partition engine and the spectrum estimators.

use crate::error::{Error, Result};
use crate::measure::CascadeSpec;
use crate::numeric::{bisect_decreasing, log_sum_exp, ROOT_TOL_ORACLE};
use crate::partition::QVector;

/// Everything the oracle knows about one `q`.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub q: QVector,
    /// Root of `phi(q, t) = 1`.
    pub exponent: f64,
    /// Gradient of the root with respect to `q`.
    pub gradient: Vec<f64>,
    /// Spectrum location `-gradient`.
    pub gamma: Vec<f64>,
    /// Spectrum value `<gamma, q> + exponent`.
    pub value: f64,
}

fn check_q(spec: &CascadeSpec, q: &QVector) -> Result<()> {
    if q.len() != spec.measure_count() {
        return Err(Error::QLength {
            got: q.len(),
            expected: spec.measure_count(),
        });
    }
    Ok(())
}

/// Log-domain branch exponents `ln(p_1^q_1 ... p_k^q_k w_i^t)` minus the `t`
/// part, i.e. the `t`-independent term per branch, plus `ln w_i` separately.
fn branch_terms(spec: &CascadeSpec, q: &QVector) -> Result<(Vec<f64>, Vec<f64>)> {
    check_q(spec, q)?;
    if !spec.strictly_positive() {
        return Err(Error::DegenerateWeights);
    }
    let m = spec.gauge_weights().len();
    let k = spec.measure_count();
    let mut fixed = vec![0.0f64; m];
    for (i, f) in fixed.iter_mut().enumerate() {
        for j in 0..k {
            *f += q.get(j) * spec.analyzed_weights(j)[i].ln();
        }
    }
    let ln_gauge = spec.gauge_weights().iter().map(|w| w.ln()).collect();
    Ok((fixed, ln_gauge))
}

fn log_phi_terms(fixed: &[f64], ln_gauge: &[f64], t: f64) -> f64 {
    let terms: Vec<f64> = fixed
        .iter()
        .zip(ln_gauge)
        .map(|(&a, &lw)| a + t * lw)
        .collect();
    log_sum_exp(&terms)
}

/// The transfer sum `phi(q, t)`; strictly decreasing in `t` and log-convex.
///
/// Zero weights are tolerated only with non-negative exponents (the branch
/// then drops out of the sum).
pub fn phi(spec: &CascadeSpec, q: &QVector, t: f64) -> Result<f64> {
    check_q(spec, q)?;
    let m = spec.gauge_weights().len();
    let k = spec.measure_count();
    let mut total = 0.0f64;
    for i in 0..m {
        let mut term = 1.0f64;
        let mut zero = false;
        for j in 0..k {
            let p = spec.analyzed_weights(j)[i];
            let e = q.get(j);
            if p == 0.0 {
                if e <= 0.0 {
                    return Err(Error::ZeroWeightPower { exponent: e });
                }
                zero = true;
            } else {
                term *= p.powf(e);
            }
        }
        let w = spec.gauge_weights()[i];
        if w == 0.0 {
            if t <= 0.0 {
                return Err(Error::ZeroWeightPower { exponent: t });
            }
            zero = true;
        } else {
            term *= w.powf(t);
        }
        if !zero {
            total += term;
        }
    }
    Ok(total)
}

/// Unique root of `phi(q, t) = 1` in `t`, to absolute tolerance 1e-12.
pub fn solve_exponent(spec: &CascadeSpec, q: &QVector) -> Result<f64> {
    let (fixed, ln_gauge) = branch_terms(spec, q)?;
    bisect_decreasing(|t| log_phi_terms(&fixed, &ln_gauge, t), ROOT_TOL_ORACLE)
}

/// Gradient of the root by implicit differentiation of `phi(q, B(q)) = 1`:
/// `dB/dq_j = -(sum_i rho_i ln p_{j,i}) / (sum_i rho_i ln w_i)` with
/// `rho_i = p_i^q w_i^B`.
pub fn exponent_gradient(spec: &CascadeSpec, q: &QVector) -> Result<Vec<f64>> {
    let b = solve_exponent(spec, q)?;
    let (fixed, ln_gauge) = branch_terms(spec, q)?;
    let rho: Vec<f64> = fixed
        .iter()
        .zip(&ln_gauge)
        .map(|(&a, &lw)| (a + b * lw).exp())
        .collect();
    let denom: f64 = rho.iter().zip(&ln_gauge).map(|(&r, &lw)| r * lw).sum();
    let k = spec.measure_count();
    let mut grad = Vec::with_capacity(k);
    for j in 0..k {
        let num: f64 = rho
            .iter()
            .enumerate()
            .map(|(i, &r)| r * spec.analyzed_weights(j)[i].ln())
            .sum();
        grad.push(-num / denom);
    }
    Ok(grad)
}

/// Spectrum point reached at `q`: `gamma = -grad B(q)` and
/// `f = <gamma, q> + B(q)`, the Legendre value at the touching point.
pub fn oracle_spectrum(spec: &CascadeSpec, q: &QVector) -> Result<(Vec<f64>, f64)> {
    let b = solve_exponent(spec, q)?;
    let grad = exponent_gradient(spec, q)?;
    let gamma: Vec<f64> = grad.iter().map(|&g| -g).collect();
    let value = gamma.iter().zip(q.as_slice()).map(|(g, qi)| g * qi).sum::<f64>() + b;
    Ok((gamma, value))
}

/// All oracle quantities at once.
pub fn oracle_result(spec: &CascadeSpec, q: &QVector) -> Result<OracleResult> {
    let exponent = solve_exponent(spec, q)?;
    let gradient = exponent_gradient(spec, q)?;
    let gamma: Vec<f64> = gradient.iter().map(|&g| -g).collect();
    let value = gamma
        .iter()
        .zip(q.as_slice())
        .map(|(g, qi)| g * qi)
        .sum::<f64>()
        + exponent;
    Ok(OracleResult {
        q: q.clone(),
        exponent,
        gradient,
        gamma,
        value,
    })
}

/// Per analyzed measure, the extreme branch ratios `ln p_{j,i} / ln w_i`:
/// the limits of `-dB/dq_j` as `q_j` runs to plus/minus infinity. Every
/// reachable spectrum coordinate lies between them.
pub fn spectral_bounds(spec: &CascadeSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if !spec.strictly_positive() {
        return Err(Error::DegenerateWeights);
    }
    let ln_gauge: Vec<f64> = spec.gauge_weights().iter().map(|w| w.ln()).collect();
    let k = spec.measure_count();
    let mut lo = Vec::with_capacity(k);
    let mut hi = Vec::with_capacity(k);
    for j in 0..k {
        let mut lo_j = f64::INFINITY;
        let mut hi_j = f64::NEG_INFINITY;
        for (i, &lw) in ln_gauge.iter().enumerate() {
            let r = spec.analyzed_weights(j)[i].ln() / lw;
            lo_j = lo_j.min(r);
            hi_j = hi_j.max(r);
        }
        lo.push(lo_j);
        hi.push(hi_j);
    }
    Ok((lo, hi))
}
