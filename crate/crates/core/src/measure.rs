//! Measures on b-adic grids: multiplicative cascades, empirical samples, and
//! the regularity diagnostics of the gauge measure.
//!
//! A [`MeasureTree`] assigns to every grid box up to a maximum level the mass
//! of one Borel probability measure; it is the computational stand-in for the
//! measure itself. A [`VectorMeasure`] bundles the `k` analyzed trees with the
//! gauge tree that controls them, all on one shared grid.

use crate::error::{Error, Result};
use crate::grid::{self, BAdicBox};

const ADDITIVITY_TOL: f64 = 1e-12;

/// Mass assignment on every box of the grid up to `max_level`.
///
/// Immutable after construction; analysis passes only read it.
#[derive(Debug, Clone)]
pub struct MeasureTree {
    base: u32,
    dimension: u32,
    max_level: usize,
    /// `levels[n][i]` is the mass of the box with linear index `i` at level `n`.
    levels: Vec<Vec<f64>>,
}

impl MeasureTree {
    /// Builds a tree from explicit per-level mass tables, checking that the
    /// root carries mass 1, masses are non-negative, and every box's children
    /// sum back to it within 1e-12.
    pub fn from_levels(base: u32, dimension: u32, levels: Vec<Vec<f64>>) -> Result<Self> {
        grid::check_grid(base, dimension)?;
        if levels.is_empty() {
            return Err(Error::InvalidTree("no levels".into()));
        }
        let m = grid::group_count(base, dimension);
        for (n, level) in levels.iter().enumerate() {
            let expect = grid::level_box_count(base, dimension, n)?;
            if level.len() as u64 != expect {
                return Err(Error::InvalidTree(format!(
                    "level {} has {} boxes, expected {}",
                    n,
                    level.len(),
                    expect
                )));
            }
            for &mass in level {
                if !(mass >= 0.0) {
                    return Err(Error::InvalidTree(format!(
                        "negative or NaN mass {} at level {}",
                        mass, n
                    )));
                }
            }
        }
        if (levels[0][0] - 1.0).abs() > ADDITIVITY_TOL {
            return Err(Error::InvalidTree(format!(
                "root mass {} is not 1",
                levels[0][0]
            )));
        }
        for n in 1..levels.len() {
            for (parent_idx, &parent_mass) in levels[n - 1].iter().enumerate() {
                let child_sum: f64 = levels[n][parent_idx * m..(parent_idx + 1) * m].iter().sum();
                if (child_sum - parent_mass).abs() > ADDITIVITY_TOL {
                    return Err(Error::InvalidTree(format!(
                        "additivity violated at level {} box {}: children sum {} vs parent {}",
                        n - 1,
                        parent_idx,
                        child_sum,
                        parent_mass
                    )));
                }
            }
        }
        Ok(MeasureTree {
            base,
            dimension,
            max_level: levels.len() - 1,
            levels,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    /// Mass of the box with linear index `index` at `level`.
    pub fn mass_at(&self, level: usize, index: usize) -> f64 {
        self.levels[level][index]
    }

    /// Mass of an addressed box.
    pub fn mass(&self, cell: &BAdicBox) -> Result<f64> {
        if cell.base() != self.base || cell.dimension() != self.dimension {
            return Err(Error::MismatchedGrids);
        }
        let level = cell.level();
        if level > self.max_level {
            return Err(Error::LevelOutOfRange {
                level,
                max_level: self.max_level,
            });
        }
        Ok(self.levels[level][cell.index()])
    }

    /// Mass addressed by an interleaved digit path.
    pub fn mass_of_path(&self, path: &[u8]) -> Result<f64> {
        let cell = BAdicBox::from_path(self.base, self.dimension, path)?;
        self.mass(&cell)
    }

    pub fn boxes_at(&self, level: usize) -> usize {
        self.levels[level].len()
    }

    /// Number of positive-mass boxes at `level`.
    pub fn support_size(&self, level: usize) -> usize {
        self.levels[level].iter().filter(|&&x| x > 0.0).count()
    }
}

/// Exactly solvable test family: a self-similar cascade assigning each digit
/// path the product of per-branch weights, one weight vector per measure
/// (gauge last).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    pub base: u32,
    pub dimension: u32,
    /// Subdivision depth of the generated trees.
    pub levels: usize,
    /// `k+1` weight vectors of length `base^dimension`; the last is the gauge.
    pub weights: Vec<Vec<f64>>,
    /// Allows zero weights (e.g. an atom surrogate). Oracle evaluation
    /// requires strictly positive weights and rejects degenerate specs.
    pub degenerate: bool,
}

impl CascadeSpec {
    pub fn new(base: u32, dimension: u32, levels: usize, weights: Vec<Vec<f64>>) -> Result<Self> {
        let spec = CascadeSpec {
            base,
            dimension,
            levels,
            weights,
            degenerate: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Marks the spec as intentionally degenerate, permitting zero weights.
    pub fn new_degenerate(
        base: u32,
        dimension: u32,
        levels: usize,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let spec = CascadeSpec {
            base,
            dimension,
            levels,
            weights,
            degenerate: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        grid::check_grid(self.base, self.dimension)?;
        grid::level_box_count(self.base, self.dimension, self.levels)?;
        let m = grid::group_count(self.base, self.dimension);
        if self.weights.len() < 2 {
            return Err(Error::BadConfig(
                "need at least one analyzed weight vector plus the gauge".into(),
            ));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.len() != m {
                return Err(Error::WeightLength {
                    index: i,
                    got: w.len(),
                    expected: m,
                });
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::WeightSum { index: i, sum });
            }
            for &x in w {
                let ok = if self.degenerate { x >= 0.0 } else { x > 0.0 };
                if !ok || x >= 1.0 + 1e-12 {
                    return Err(Error::WeightRange { index: i, value: x });
                }
            }
        }
        Ok(())
    }

    /// Number of analyzed measures (gauge excluded).
    pub fn measure_count(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn gauge_weights(&self) -> &[f64] {
        self.weights.last().unwrap()
    }

    pub fn analyzed_weights(&self, j: usize) -> &[f64] {
        &self.weights[j]
    }

    pub fn strictly_positive(&self) -> bool {
        self.weights.iter().flatten().all(|&x| x > 0.0)
    }
}

/// The tuple `(mu_1, ..., mu_k, nu)`: analyzed trees plus the gauge tree.
#[derive(Debug, Clone)]
pub struct VectorMeasure {
    analyzed: Vec<MeasureTree>,
    gauge: MeasureTree,
}

impl VectorMeasure {
    /// Bundles trees sharing one grid; the joint support (boxes where all
    /// `k+1` masses are positive) must be non-empty at the deepest level.
    pub fn new(analyzed: Vec<MeasureTree>, gauge: MeasureTree) -> Result<Self> {
        if analyzed.is_empty() {
            return Err(Error::BadConfig("need at least one analyzed measure".into()));
        }
        for t in &analyzed {
            if t.base != gauge.base
                || t.dimension != gauge.dimension
                || t.max_level != gauge.max_level
            {
                return Err(Error::MismatchedGrids);
            }
        }
        let vm = VectorMeasure { analyzed, gauge };
        let deepest = vm.max_level();
        if !(0..vm.gauge.boxes_at(deepest)).any(|i| vm.joint_positive(deepest, i)) {
            return Err(Error::EmptyJointSupport { level: deepest });
        }
        Ok(vm)
    }

    /// Number of analyzed measures `k`.
    pub fn measure_count(&self) -> usize {
        self.analyzed.len()
    }

    pub fn base(&self) -> u32 {
        self.gauge.base
    }

    pub fn dimension(&self) -> u32 {
        self.gauge.dimension
    }

    pub fn max_level(&self) -> usize {
        self.gauge.max_level
    }

    pub fn analyzed(&self, j: usize) -> &MeasureTree {
        &self.analyzed[j]
    }

    pub fn gauge(&self) -> &MeasureTree {
        &self.gauge
    }

    pub fn boxes_at(&self, level: usize) -> usize {
        self.gauge.boxes_at(level)
    }

    /// True when every analyzed mass and the gauge mass are positive.
    pub fn joint_positive(&self, level: usize, index: usize) -> bool {
        self.gauge.mass_at(level, index) > 0.0
            && self
                .analyzed
                .iter()
                .all(|t| t.mass_at(level, index) > 0.0)
    }
}

/// Builds the cascade's `k+1` trees; the mass of the box with digit groups
/// `(g_1, ..., g_n)` is exactly the product of the per-branch weights.
pub fn build_cascade(spec: &CascadeSpec) -> Result<VectorMeasure> {
    spec.validate()?;
    let mut trees = Vec::with_capacity(spec.weights.len());
    for w in &spec.weights {
        trees.push(cascade_tree(spec, w)?);
    }
    let gauge = trees.pop().unwrap();
    VectorMeasure::new(trees, gauge)
}

fn cascade_tree(spec: &CascadeSpec, weights: &[f64]) -> Result<MeasureTree> {
    let m = grid::group_count(spec.base, spec.dimension);
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(spec.levels + 1);
    levels.push(vec![1.0]);
    let mut counts = vec![0u32; m];
    for n in 1..=spec.levels {
        let total = grid::level_box_count(spec.base, spec.dimension, n)? as usize;
        let mut masses = vec![0.0f64; total];
        for (idx, slot) in masses.iter_mut().enumerate() {
            counts.fill(0);
            let mut rest = idx;
            for _ in 0..n {
                counts[rest % m] += 1;
                rest /= m;
            }
            // Branch-count product: permuted paths share the exact same
            // floating-point value, which keeps profile grouping exact.
            let mut mass = 1.0f64;
            for (c, &w) in counts.iter().zip(weights) {
                if *c > 0 {
                    mass *= w.powi(*c as i32);
                }
            }
            *slot = mass;
        }
        levels.push(masses);
    }
    MeasureTree::from_levels(spec.base, spec.dimension, levels)
}

/// Empirical measure of a point set: each box carries the fraction of sample
/// points it contains.
pub fn ingest_samples(
    points: &[Vec<f64>],
    base: u32,
    dimension: u32,
    max_level: usize,
) -> Result<MeasureTree> {
    grid::check_grid(base, dimension)?;
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let d = dimension as usize;
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::SampleDimension {
                index: i,
                got: p.len(),
                expected: d,
            });
        }
        for &x in p {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::SampleOutOfRange { value: x });
            }
        }
    }
    let deepest = grid::level_box_count(base, dimension, max_level)? as usize;
    let m = grid::group_count(base, dimension);
    let mut counts = vec![0u64; deepest];
    for p in points {
        counts[point_index(p, base, max_level)] += 1;
    }
    // Aggregate counts upward so additivity is exact in integers, then divide.
    let total = points.len() as f64;
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); max_level + 1];
    let mut level_counts = counts;
    for n in (0..=max_level).rev() {
        levels[n] = level_counts.iter().map(|&c| c as f64 / total).collect();
        if n > 0 {
            let mut up = vec![0u64; level_counts.len() / m];
            for (i, &c) in level_counts.iter().enumerate() {
                up[i / m] += c;
            }
            level_counts = up;
        }
    }
    MeasureTree::from_levels(base, dimension, levels)
}

/// Linear index at `level` of the box containing the point; the coordinate
/// value 1.0 lands in the last cell.
fn point_index(point: &[f64], base: u32, level: usize) -> usize {
    let b = base as usize;
    let mut idx = 0usize;
    for l in 1..=level {
        let scale = (base as f64).powi(l as i32);
        for &x in point {
            let cell = ((x * scale) as usize).min(scale as usize - 1);
            idx = idx * b + cell % b;
        }
    }
    idx
}

/// Per-level trace and overall value of the coarse regularity index.
#[derive(Debug, Clone)]
pub struct AhlforsTrace {
    /// The index estimate: the minimum of the per-level minima.
    pub alpha: f64,
    /// `(level, min over positive boxes of log mass / log side)` per level.
    pub per_level: Vec<(usize, f64)>,
}

/// Largest exponent `alpha` for which `mass(Q) / side(Q)^alpha` stays bounded
/// on the grid, measured as the minimum of `log mass / log side` over
/// positive boxes at each level of the window.
pub fn ahlfors_index(
    tree: &MeasureTree,
    window: (usize, usize),
) -> Result<AhlforsTrace> {
    let (lo, hi) = window;
    if lo < 1 || hi < lo {
        return Err(Error::BadWindow {
            lo,
            hi,
            reason: "need 1 <= lo <= hi".into(),
        });
    }
    if hi > tree.max_level {
        return Err(Error::LevelOutOfRange {
            level: hi,
            max_level: tree.max_level,
        });
    }
    let inv_base = 1.0 / tree.base as f64;
    let mut per_level = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        // Computing the side the same way cascade masses are built keeps
        // uniform gauges bit-exact (log m / log s with m == s).
        let ln_side = inv_base.powi(n as i32).ln();
        let mut level_min = f64::INFINITY;
        for &mass in &tree.levels[n] {
            if mass > 0.0 {
                level_min = level_min.min(mass.ln() / ln_side);
            }
        }
        if !level_min.is_finite() {
            return Err(Error::InvalidTree(format!("no positive box at level {}", n)));
        }
        per_level.push((n, level_min));
    }
    let alpha = per_level
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    Ok(AhlforsTrace { alpha, per_level })
}

/// Coarse doubling ratio at one level: the worst ratio of the mass of the
/// parent-level neighborhood covering the `a`-enlargement of a box to the
/// box's own mass, over positive boxes.
pub fn doubling_ratio(tree: &MeasureTree, a: f64, level: usize) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidParameter(
            "doubling ratio needs level >= 1".into(),
        ));
    }
    if level > tree.max_level {
        return Err(Error::LevelOutOfRange {
            level,
            max_level: tree.max_level,
        });
    }
    if !(a > 1.0 && a <= tree.base as f64) {
        return Err(Error::InvalidParameter(format!(
            "enlargement factor {} must satisfy 1 < a <= base",
            a
        )));
    }
    let d = tree.dimension as usize;
    let b = tree.base as usize;
    let side = (tree.base as f64).powi(-(level as i32));
    let parent_side = side * tree.base as f64;
    let parent_cells = b.pow((level - 1) as u32);
    let mut worst = f64::NEG_INFINITY;
    for (idx, &mass) in tree.levels[level].iter().enumerate() {
        if mass <= 0.0 {
            continue;
        }
        let cell = BAdicBox::from_index(tree.base, tree.dimension, level, idx)?;
        let coords = cell.coordinate_indices();
        // Parent-index range per coordinate covering [c - a*s/2, c + a*s/2].
        let mut ranges = Vec::with_capacity(d);
        for &ci in &coords {
            let center = (ci as f64 + 0.5) * side;
            let lo = (center - 0.5 * a * side).max(0.0);
            let hi = (center + 0.5 * a * side).min(1.0);
            let p_lo = (lo / parent_side).floor() as usize;
            let p_hi = (((hi / parent_side).ceil() as usize).max(p_lo + 1) - 1)
                .min(parent_cells - 1);
            ranges.push((p_lo.min(parent_cells - 1), p_hi));
        }
        let neighborhood = sum_over_ranges(tree, level - 1, &ranges);
        worst = worst.max(neighborhood / mass);
    }
    if worst.is_finite() {
        Ok(worst)
    } else {
        Err(Error::InvalidTree(format!("no positive box at level {}", level)))
    }
}

/// Sums masses over a hyper-rectangle of per-coordinate index ranges.
fn sum_over_ranges(tree: &MeasureTree, level: usize, ranges: &[(usize, usize)]) -> f64 {
    let b = tree.base as usize;
    let mut total = 0.0;
    let mut cursor: Vec<usize> = ranges.iter().map(|&(lo, _)| lo).collect();
    loop {
        // Recombine per-coordinate indices into the interleaved linear index.
        let mut idx = 0usize;
        for l in (0..level).rev() {
            let scale = b.pow(l as u32);
            for c in &cursor {
                idx = idx * b + (c / scale) % b;
            }
        }
        total += tree.levels[level][idx];
        let mut j = ranges.len();
        loop {
            if j == 0 {
                return total;
            }
            j -= 1;
            if cursor[j] < ranges[j].1 {
                cursor[j] += 1;
                break;
            }
            cursor[j] = ranges[j].0;
        }
    }
}
