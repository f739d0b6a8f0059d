//! The b-adic grid on `[0,1]^d`: cells addressed by digit paths.
//!
//! Level `n` subdivides the unit cube into `base^(n*d)` cells of side
//! `base^-n`. A cell is addressed by an interleaved digit path: one digit per
//! coordinate per level, so a level-`n` cell in dimension `d` carries `n*d`
//! digits. Cells also have a linear index at their level, obtained by reading
//! the per-level digit groups as a base-`base^d` number.

use crate::error::{Error, Result};

/// Dense per-level storage is refused above this many boxes in one level.
pub const MAX_LEVEL_BOXES: u64 = 1 << 22;

/// One cell of the base-`b` subdivision of `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BAdicBox {
    base: u32,
    dimension: u32,
    /// Interleaved digits, `level * dimension` of them, each `< base`.
    path: Vec<u8>,
}

impl BAdicBox {
    /// The level-0 box `[0,1]^d`.
    pub fn root(base: u32, dimension: u32) -> Result<Self> {
        check_grid(base, dimension)?;
        Ok(BAdicBox {
            base,
            dimension,
            path: Vec::new(),
        })
    }

    /// Builds a box from an explicit interleaved digit path.
    pub fn from_path(base: u32, dimension: u32, path: &[u8]) -> Result<Self> {
        check_grid(base, dimension)?;
        if path.len() % dimension as usize != 0 {
            return Err(Error::BadPath {
                reason: format!(
                    "path length {} is not a multiple of dimension {}",
                    path.len(),
                    dimension
                ),
            });
        }
        if let Some(&d) = path.iter().find(|&&d| d as u32 >= base) {
            return Err(Error::BadPath {
                reason: format!("digit {} is not below base {}", d, base),
            });
        }
        Ok(BAdicBox {
            base,
            dimension,
            path: path.to_vec(),
        })
    }

    /// Reconstructs the box with the given linear index at `level`.
    pub fn from_index(base: u32, dimension: u32, level: usize, index: usize) -> Result<Self> {
        check_grid(base, dimension)?;
        let m = group_count(base, dimension);
        let total = level_box_count(base, dimension, level)?;
        if (index as u64) >= total {
            return Err(Error::BadPath {
                reason: format!("index {} out of range at level {}", index, level),
            });
        }
        let mut path = vec![0u8; level * dimension as usize];
        let mut rest = index;
        for l in (0..level).rev() {
            let group = rest % m;
            rest /= m;
            ungroup_digits(base, dimension, group, &mut path[l * dimension as usize..]);
        }
        Ok(BAdicBox {
            base,
            dimension,
            path,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn path(&self) -> &[u8] {
        &self.path
    }

    /// Path length per coordinate.
    pub fn level(&self) -> usize {
        self.path.len() / self.dimension as usize
    }

    /// Side length `base^-level`.
    pub fn side(&self) -> f64 {
        (1.0 / self.base as f64).powi(self.level() as i32)
    }

    /// Euclidean diameter `base^-level * sqrt(d)`.
    pub fn diameter(&self) -> f64 {
        self.side() * (self.dimension as f64).sqrt()
    }

    /// Linear index among the boxes of this box's level.
    pub fn index(&self) -> usize {
        let d = self.dimension as usize;
        let m = group_count(self.base, self.dimension);
        let mut idx = 0usize;
        for l in 0..self.level() {
            idx = idx * m + group_digits(self.base, &self.path[l * d..(l + 1) * d]);
        }
        idx
    }

    /// The `base^d` children partitioning this box at the next level.
    pub fn children(&self) -> Vec<BAdicBox> {
        let d = self.dimension as usize;
        let m = group_count(self.base, self.dimension);
        (0..m)
            .map(|g| {
                let mut path = self.path.clone();
                path.resize(path.len() + d, 0);
                let at = path.len() - d;
                ungroup_digits(self.base, self.dimension, g, &mut path[at..]);
                BAdicBox {
                    base: self.base,
                    dimension: self.dimension,
                    path,
                }
            })
            .collect()
    }

    /// The enclosing box one level up, or `None` at the root.
    pub fn parent(&self) -> Option<BAdicBox> {
        if self.path.is_empty() {
            return None;
        }
        let d = self.dimension as usize;
        BAdicBox {
            base: self.base,
            dimension: self.dimension,
            path: self.path[..self.path.len() - d].to_vec(),
        }
        .into()
    }

    /// Per-coordinate cell index at this box's level.
    pub fn coordinate_indices(&self) -> Vec<usize> {
        let d = self.dimension as usize;
        let b = self.base as usize;
        let mut out = vec![0usize; d];
        for l in 0..self.level() {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = *slot * b + self.path[l * d + j] as usize;
            }
        }
        out
    }

    /// Lower corner of the box in `[0,1]^d`.
    pub fn low_corner(&self) -> Vec<f64> {
        let s = self.side();
        self.coordinate_indices()
            .iter()
            .map(|&i| i as f64 * s)
            .collect()
    }
}

pub(crate) fn check_grid(base: u32, dimension: u32) -> Result<()> {
    if base < 2 || dimension < 1 || (base as u64).pow(dimension) > u8::MAX as u64 + 1 {
        return Err(Error::BadGrid { base, dimension });
    }
    Ok(())
}

/// Number of children per box: `base^dimension`.
pub fn group_count(base: u32, dimension: u32) -> usize {
    (base as usize).pow(dimension)
}

/// Number of boxes at `level`, refusing grids too large for dense storage.
pub fn level_box_count(base: u32, dimension: u32, level: usize) -> Result<u64> {
    let m = group_count(base, dimension) as u128;
    let mut total: u128 = 1;
    for _ in 0..level {
        total *= m;
        if total > MAX_LEVEL_BOXES as u128 {
            return Err(Error::GridTooLarge {
                level,
                boxes: total,
                cap: MAX_LEVEL_BOXES,
            });
        }
    }
    Ok(total as u64)
}

/// Packs one digit per coordinate into a child-group value in `[0, base^d)`.
fn group_digits(base: u32, digits: &[u8]) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &d| acc * base as usize + d as usize)
}

fn ungroup_digits(base: u32, dimension: u32, group: usize, out: &mut [u8]) {
    let d = dimension as usize;
    let mut rest = group;
    for j in (0..d).rev() {
        out[j] = (rest % base as usize) as u8;
        rest /= base as usize;
    }
}

/// Splits a level-`level` linear index into its per-level digit groups.
pub fn index_groups(base: u32, dimension: u32, level: usize, index: usize) -> Vec<usize> {
    let m = group_count(base, dimension);
    let mut groups = vec![0usize; level];
    let mut rest = index;
    for g in groups.iter_mut().rev() {
        *g = rest % m;
        rest /= m;
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_partition_and_count() {
        let root = BAdicBox::root(2, 2).unwrap();
        let kids = root.children();
        assert_eq!(kids.len(), 4);
        for (i, k) in kids.iter().enumerate() {
            assert_eq!(k.level(), 1);
            assert_eq!(k.index(), i);
            assert_eq!(k.parent().unwrap(), root);
        }
        // Lower corners tile [0,1]^2 at side 1/2.
        let corners: Vec<Vec<f64>> = kids.iter().map(|k| k.low_corner()).collect();
        assert_eq!(
            corners,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 0.5],
                vec![0.5, 0.0],
                vec![0.5, 0.5]
            ]
        );
    }

    #[test]
    fn index_roundtrip() {
        for level in 0..4 {
            let n = level_box_count(3, 1, level).unwrap();
            for idx in 0..n as usize {
                let b = BAdicBox::from_index(3, 1, level, idx).unwrap();
                assert_eq!(b.index(), idx);
                assert_eq!(b.level(), level);
            }
        }
    }

    #[test]
    fn diameter_scales_with_level() {
        let b = BAdicBox::from_path(2, 1, &[0, 1, 1]).unwrap();
        assert_eq!(b.side(), 0.125);
        assert_eq!(b.diameter(), 0.125);
        let b2 = BAdicBox::from_path(2, 2, &[0, 1]).unwrap();
        assert!((b2.diameter() - 0.5 * 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(BAdicBox::from_path(2, 1, &[2]).is_err());
        assert!(BAdicBox::from_path(2, 2, &[0]).is_err());
        assert!(BAdicBox::root(1, 1).is_err());
    }

    #[test]
    fn refuses_oversized_grids() {
        assert!(level_box_count(2, 1, 16).is_ok());
        assert!(level_box_count(2, 1, 23).is_err());
    }
}
