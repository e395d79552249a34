//! Finite-perimeter sets as node indicators with extracted boundaries.

use super::contour::Contour;
use super::marching::marching_squares;
use crate::error::{McfError, Result};
use crate::field::{Grid2, ScalarField};

/// Bit-packed node indicator over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    grid: Grid2,
    words: Vec<u64>,
    count: usize,
}

impl IndicatorGrid {
    pub fn from_pred(grid: Grid2, pred: impl Fn(usize, usize) -> bool) -> IndicatorGrid {
        let n = grid.node_count();
        let mut words = vec![0u64; n.div_ceil(64)];
        let mut count = 0;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if pred(i, j) {
                    let k = grid.idx(i, j);
                    words[k / 64] |= 1 << (k % 64);
                    count += 1;
                }
            }
        }
        IndicatorGrid { grid, words, count }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let k = self.grid.idx(i, j);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    /// Number of set nodes.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn xor_count(&self, other: &IndicatorGrid) -> Result<usize> {
        if self.grid != other.grid {
            return Err(McfError::GridMismatch("indicator grids differ".into()));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// True when every set node of `self` is set in `other`.
    pub fn subset_of(&self, other: &IndicatorGrid) -> Result<bool> {
        if self.grid != other.grid {
            return Err(McfError::GridMismatch("indicator grids differ".into()));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0))
    }

    /// Number of set nodes of `self` that are unset in `other`.
    pub fn minus_count(&self, other: &IndicatorGrid) -> Result<usize> {
        if self.grid != other.grid {
            return Err(McfError::GridMismatch("indicator grids differ".into()));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum())
    }
}

/// A sub-level set `{u < s}` (or any node-indicator region) together with
/// its extracted boundary, polyline perimeter and cell area.
#[derive(Debug, Clone)]
pub struct FinitePerimeterSet {
    indicator: IndicatorGrid,
    boundary: Contour,
    perimeter: f64,
    area: f64,
}

impl FinitePerimeterSet {
    pub fn indicator(&self) -> &IndicatorGrid {
        &self.indicator
    }

    pub fn boundary(&self) -> &Contour {
        &self.boundary
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// `h² ·` number of indicator nodes (boundary-cell correction is O(h·P)).
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn grid(&self) -> &Grid2 {
        self.indicator.grid()
    }

    pub fn is_empty(&self) -> bool {
        self.indicator.count() == 0
    }

    pub fn level(&self) -> f64 {
        self.boundary.level()
    }

    pub fn time_tag(&self) -> f64 {
        self.boundary.time_tag()
    }

    /// Build from a raw indicator; the boundary is the 1/2-level of the
    /// 0/1 node field, oriented with the set on the left.
    pub fn from_indicator(
        ind: IndicatorGrid,
        level: f64,
        time_tag: f64,
    ) -> Result<FinitePerimeterSet> {
        let grid = ind.grid().clone();
        let mut vals = vec![1.0f64; grid.node_count()];
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if ind.get(i, j) {
                    vals[grid.idx(i, j)] = 0.0;
                }
            }
        }
        let f = ScalarField::from_values(grid.clone(), time_tag.max(0.0), vals)?;
        let mut boundary = marching_squares(&f, 0.5);
        boundary.level = level;
        boundary.time_tag = time_tag;
        let perimeter = boundary.perimeter();
        let area = grid.h() * grid.h() * ind.count() as f64;
        Ok(FinitePerimeterSet {
            indicator: ind,
            boundary,
            perimeter,
            area,
        })
    }
}

/// The sub-level set `{f < s}`: node indicator, marching-squares boundary,
/// cached perimeter and area. Empty and full sets are allowed (P = 0).
pub fn sublevel_set(f: &ScalarField, s: f64) -> FinitePerimeterSet {
    let indicator = IndicatorGrid::from_pred(f.grid().clone(), |i, j| f.value(i, j) < s);
    let boundary = marching_squares(f, s);
    let perimeter = boundary.perimeter();
    let area = f.grid().h() * f.grid().h() * indicator.count() as f64;
    FinitePerimeterSet {
        indicator,
        boundary,
        perimeter,
        area,
    }
}

/// Area of the symmetric difference `|A Δ B|` on a common grid.
pub fn sym_diff_area(a: &FinitePerimeterSet, b: &FinitePerimeterSet) -> Result<f64> {
    let n = a.indicator.xor_count(&b.indicator)?;
    let h = a.grid().h();
    Ok(h * h * n as f64)
}

/// Density cleanup toward the good representative: remove set nodes with no
/// set 8-neighbor, fill unset nodes with all eight 8-neighbors set, then
/// re-extract the boundary. Idempotent — removals cannot orphan a remaining
/// node and fills cannot complete another hole's neighborhood.
pub fn normalize_representative(a: &FinitePerimeterSet) -> Result<FinitePerimeterSet> {
    let grid = a.grid().clone();
    let (nx, ny) = (grid.nx(), grid.ny());
    let ind = &a.indicator;
    let neighbors_set = |i: usize, j: usize| -> usize {
        let mut n = 0;
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii >= 0
                    && jj >= 0
                    && (ii as usize) < nx
                    && (jj as usize) < ny
                    && ind.get(ii as usize, jj as usize)
                {
                    n += 1;
                }
            }
        }
        n
    };
    let cleaned = IndicatorGrid::from_pred(grid, |i, j| {
        let set = ind.get(i, j);
        let n = neighbors_set(i, j);
        if set {
            n > 0
        } else {
            // Interior nodes only: an edge node has fewer than 8 neighbors.
            n == 8 && i > 0 && j > 0 && i + 1 < nx && j + 1 < ny
        }
    });
    FinitePerimeterSet::from_indicator(cleaned, a.level(), a.time_tag())
}
