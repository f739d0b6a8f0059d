//! The joint partition engine: level sums of
//! `mu_1(Q)^q_1 ... mu_k(Q)^q_k nu(Q)^t` over the joint support, the critical
//! exponent `t*` where the sum crosses 1, and the coarse dimension estimates
//! fitted from the per-level exponents.
//!
//! Sums run in the log domain. Boxes with identical mass profiles are grouped
//! with multiplicities first; on cascades that collapses `base^(n d)` boxes to
//! a handful of branch-count classes, and on empirical trees it merges boxes
//! with equal sample counts. Grouping only reorders an exact sum, so results
//! agree with direct enumeration to rounding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measure::VectorMeasure;
use crate::numeric::{bisect_decreasing, log_sum_exp, ROOT_TOL_ENGINE};

/// Exponent vector for the analyzed measures.
#[derive(Debug, Clone, PartialEq)]
pub struct QVector(Vec<f64>);

impl QVector {
    pub fn new(q: Vec<f64>) -> Self {
        QVector(q)
    }

    /// Convenience for the single-measure case.
    pub fn scalar(q: f64) -> Self {
        QVector(vec![q])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate sum `|q| = q_1 + ... + q_k`.
    pub fn coordinate_sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// The unit vector `e_i`.
    pub fn unit(k: usize, i: usize) -> Self {
        let mut q = vec![0.0; k];
        q[i] = 1.0;
        QVector(q)
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &QVector, alpha: f64) -> QVector {
        QVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
    }
}

/// Grouped per-level mass profiles of the joint support.
///
/// One entry per distinct `(mu_1, ..., mu_k, nu)` mass tuple with its box
/// multiplicity; profiles are ordered by their bit patterns, so the layout is
/// deterministic for identical inputs.
#[derive(Debug, Clone)]
pub struct LevelTerms {
    level: usize,
    k: usize,
    /// Flattened `profiles x k` log-masses of the analyzed measures.
    ln_mu: Vec<f64>,
    ln_nu: Vec<f64>,
    ln_count: Vec<f64>,
}

impl LevelTerms {
    pub fn build(xi: &VectorMeasure, level: usize) -> Result<Self> {
        Self::build_filtered(xi, level, |_| true)
    }

    /// Restricts the sum to boxes accepted by `keep` (by linear index).
    pub fn build_filtered(
        xi: &VectorMeasure,
        level: usize,
        keep: impl Fn(usize) -> bool,
    ) -> Result<Self> {
        if level > xi.max_level() {
            return Err(Error::LevelOutOfRange {
                level,
                max_level: xi.max_level(),
            });
        }
        let k = xi.measure_count();
        let mut groups: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for idx in 0..xi.boxes_at(level) {
            if !keep(idx) || !xi.joint_positive(level, idx) {
                continue;
            }
            let mut key = Vec::with_capacity(k + 1);
            for j in 0..k {
                key.push(xi.analyzed(j).mass_at(level, idx).to_bits());
            }
            key.push(xi.gauge().mass_at(level, idx).to_bits());
            *groups.entry(key).or_insert(0) += 1;
        }
        if groups.is_empty() {
            return Err(Error::EmptyJointSupport { level });
        }
        let mut ln_mu = Vec::with_capacity(groups.len() * k);
        let mut ln_nu = Vec::with_capacity(groups.len());
        let mut ln_count = Vec::with_capacity(groups.len());
        for (key, count) in groups {
            for &bits in &key[..k] {
                ln_mu.push(f64::from_bits(bits).ln());
            }
            ln_nu.push(f64::from_bits(*key.last().unwrap()).ln());
            ln_count.push((count as f64).ln());
        }
        Ok(LevelTerms {
            level,
            k,
            ln_mu,
            ln_nu,
            ln_count,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn profile_count(&self) -> usize {
        self.ln_nu.len()
    }

    fn check_q(&self, q: &QVector) -> Result<()> {
        if q.len() != self.k {
            return Err(Error::QLength {
                got: q.len(),
                expected: self.k,
            });
        }
        Ok(())
    }

    /// Per-profile `ln(count) + sum_j q_j ln mu_j`, the `t`-independent part.
    fn fixed_terms(&self, q: &QVector) -> Vec<f64> {
        let p = self.profile_count();
        let mut fixed = Vec::with_capacity(p);
        for i in 0..p {
            let mut a = self.ln_count[i];
            for j in 0..self.k {
                a += q.get(j) * self.ln_mu[i * self.k + j];
            }
            fixed.push(a);
        }
        fixed
    }

    /// `ln S_n(q, t)` over this level's joint support.
    pub fn log_sum(&self, q: &QVector, t: f64) -> Result<f64> {
        self.check_q(q)?;
        let fixed = self.fixed_terms(q);
        Ok(self.log_sum_fixed(&fixed, t))
    }

    fn log_sum_fixed(&self, fixed: &[f64], t: f64) -> f64 {
        let terms: Vec<f64> = fixed
            .iter()
            .zip(&self.ln_nu)
            .map(|(&a, &lw)| a + t * lw)
            .collect();
        log_sum_exp(&terms)
    }

    /// Root of `S_n(q, t) = 1`, requiring strict decrease in `t`.
    pub fn solve_root(&self, q: &QVector, tol: f64) -> Result<f64> {
        self.check_q(q)?;
        if self.ln_nu.iter().any(|&lw| lw >= 0.0) {
            return Err(Error::NotMonotone { level: self.level });
        }
        let fixed = self.fixed_terms(q);
        bisect_decreasing(|t| self.log_sum_fixed(&fixed, t), tol)
    }

    /// Normalized partition weights per profile at `(q, t)`: the profile's
    /// total weight `count * mu^q nu^t / S`, plus the per-box log weight.
    pub(crate) fn normalized_weights(&self, q: &QVector, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_q(q)?;
        let fixed = self.fixed_terms(q);
        let ln_s = self.log_sum_fixed(&fixed, t);
        let mut weights = Vec::with_capacity(self.profile_count());
        let mut ln_box_weight = Vec::with_capacity(self.profile_count());
        for i in 0..self.profile_count() {
            let ln_w_box = fixed[i] - self.ln_count[i] + t * self.ln_nu[i] - ln_s;
            ln_box_weight.push(ln_w_box);
            weights.push((fixed[i] + t * self.ln_nu[i] - ln_s).exp());
        }
        Ok((weights, ln_box_weight))
    }

    pub(crate) fn ln_nu(&self) -> &[f64] {
        &self.ln_nu
    }

    pub(crate) fn ln_count(&self) -> &[f64] {
        &self.ln_count
    }

    pub(crate) fn ln_mu_at(&self, profile: usize, j: usize) -> f64 {
        self.ln_mu[profile * self.k + j]
    }
}

/// Natural log of the level-`level` joint partition sum.
pub fn log_partition_sum(xi: &VectorMeasure, q: &QVector, t: f64, level: usize) -> Result<f64> {
    LevelTerms::build(xi, level)?.log_sum(q, t)
}

/// The unique `t` with `S_n(q, t) = 1`, by bracket expansion plus bisection
/// to absolute tolerance 1e-10.
pub fn solve_t_star(xi: &VectorMeasure, q: &QVector, level: usize) -> Result<f64> {
    LevelTerms::build(xi, level)?.solve_root(q, ROOT_TOL_ENGINE)
}

/// `solve_t_star` over the union of the subtrees rooted at the given
/// first-subdivision child groups. Lets callers compare exponents of box
/// families and their finite unions.
pub fn solve_t_star_restricted(
    xi: &VectorMeasure,
    q: &QVector,
    level: usize,
    first_groups: &[usize],
) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidParameter(
            "restricted roots need level >= 1".into(),
        ));
    }
    let m = crate::grid::group_count(xi.base(), xi.dimension());
    let stride = m.pow((level - 1) as u32);
    let terms = LevelTerms::build_filtered(xi, level, |idx| first_groups.contains(&(idx / stride)))?;
    terms.solve_root(q, ROOT_TOL_ENGINE)
}

/// Level window used for fitting; inclusive on both ends.
pub fn default_window(max_level: usize) -> (usize, usize) {
    (max_level / 2 + 1, max_level)
}

fn check_window(xi: &VectorMeasure, window: (usize, usize)) -> Result<()> {
    let (lo, hi) = window;
    if lo < 1 || hi < lo || hi - lo + 1 < 3 {
        return Err(Error::BadWindow {
            lo,
            hi,
            reason: "need at least 3 levels with 1 <= lo <= hi".into(),
        });
    }
    if hi > xi.max_level() {
        return Err(Error::LevelOutOfRange {
            level: hi,
            max_level: xi.max_level(),
        });
    }
    Ok(())
}

/// Coarse mixed dimension estimates at one `q`: the per-level roots plus the
/// envelope fits.
///
/// `lower` is the minimum of the window's roots (Hausdorff-type estimate),
/// `upper` the maximum (logarithmic-index estimate), and `packing` is the
/// upper envelope regularized to keep `lower <= packing <= upper`. On an
/// exactly self-similar cascade all roots coincide and the three estimates
/// are equal.
#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    pub q: QVector,
    /// `(level, t*_level)` for every level in the window.
    pub roots: Vec<(usize, f64)>,
    pub lower: f64,
    pub packing: f64,
    pub upper: f64,
    /// Envelope spread `upper - lower`; 0 on exact cascades.
    pub residual: f64,
    pub window: (usize, usize),
}

/// Fits the three coarse dimension estimates over a level window.
pub fn estimate_dimensions(
    xi: &VectorMeasure,
    q: &QVector,
    window: (usize, usize),
) -> Result<DimensionEstimate> {
    check_window(xi, window)?;
    let mut terms = Vec::new();
    for level in window.0..=window.1 {
        terms.push(LevelTerms::build(xi, level)?);
    }
    estimate_from_terms(&terms, q, window)
}

fn estimate_from_terms(
    terms: &[LevelTerms],
    q: &QVector,
    window: (usize, usize),
) -> Result<DimensionEstimate> {
    let mut roots = Vec::with_capacity(terms.len());
    for t in terms {
        roots.push((t.level(), t.solve_root(q, ROOT_TOL_ENGINE)?));
    }
    let lower = roots.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let upper = roots
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    let packing = upper.max(lower);
    Ok(DimensionEstimate {
        q: q.clone(),
        roots,
        lower,
        packing,
        upper,
        residual: upper - lower,
        window,
    })
}

/// Rectangular grid of `q` vectors described per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub step: Vec<f64>,
}

impl QGrid {
    pub fn new(min: Vec<f64>, max: Vec<f64>, step: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.len() != step.len() || min.is_empty() {
            return Err(Error::BadConfig(
                "q-grid needs matching non-empty min/max/step lists".into(),
            ));
        }
        for j in 0..min.len() {
            if !(step[j] > 0.0) {
                return Err(Error::BadConfig(format!(
                    "q-step {} must be positive",
                    step[j]
                )));
            }
            if max[j] < min[j] {
                return Err(Error::BadConfig(format!(
                    "empty q range [{}, {}]",
                    min[j], max[j]
                )));
            }
        }
        Ok(QGrid { min, max, step })
    }

    /// Uniform grid over `[min, max]^k` with one shared step.
    pub fn cube(k: usize, min: f64, max: f64, step: f64) -> Result<Self> {
        QGrid::new(vec![min; k], vec![max; k], vec![step; k])
    }

    pub fn k(&self) -> usize {
        self.min.len()
    }

    fn axis_count(&self, j: usize) -> usize {
        ((self.max[j] - self.min[j]) / self.step[j] + 1e-9).floor() as usize + 1
    }

    pub fn axis_values(&self, j: usize) -> Vec<f64> {
        (0..self.axis_count(j))
            .map(|i| self.min[j] + i as f64 * self.step[j])
            .collect()
    }

    /// Row-major enumeration, last coordinate fastest; deterministic.
    pub fn points(&self) -> Vec<QVector> {
        let axes: Vec<Vec<f64>> = (0..self.k()).map(|j| self.axis_values(j)).collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.k()];
        loop {
            out.push(QVector::new(
                idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect(),
            ));
            let mut j = self.k();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if idx[j] + 1 < axes[j].len() {
                    idx[j] += 1;
                    break;
                }
                idx[j] = 0;
            }
        }
    }
}

/// One grid row of a batch sweep: the estimate, or the error that point hit.
pub type SurfaceRow = (QVector, std::result::Result<DimensionEstimate, String>);

/// Evaluates `estimate_dimensions` on every grid point. Per-point failures
/// are recorded in the row rather than aborting the sweep; rows come back in
/// input order regardless of evaluation schedule.
pub fn qgrid_surface(
    xi: &VectorMeasure,
    qs: &[QVector],
    window: (usize, usize),
) -> Result<Vec<SurfaceRow>> {
    if qs.is_empty() {
        return Err(Error::BadConfig("empty q-grid".into()));
    }
    check_window(xi, window)?;
    let mut terms = Vec::new();
    for level in window.0..=window.1 {
        terms.push(LevelTerms::build(xi, level)?);
    }
    Ok(qs
        .iter()
        .map(|q| {
            (
                q.clone(),
                estimate_from_terms(&terms, q, window).map_err(|e| e.to_string()),
            )
        })
        .collect())
}
