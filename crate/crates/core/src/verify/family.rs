//! Level families: per-level time series of sub-level sets.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{McfError, Result};
use crate::field::{Grid2, SpaceTimeField};
use crate::geometry::{sublevel_set, FinitePerimeterSet};

/// Where a family's sets came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Extracted from a level-set function; differential data (V, H) are
    /// available through the source field.
    Extracted,
    /// Supplied externally (e.g. loaded from files); only set-theoretic
    /// checks apply.
    External,
}

/// One level's time series. Sets exist at every frame; extinction shows up
/// as empty sets rather than truncation, so jumps across sudden vanishing
/// stay measurable.
#[derive(Debug, Clone)]
pub struct LevelSeries {
    pub level: f64,
    pub sets: Vec<FinitePerimeterSet>,
}

impl LevelSeries {
    /// First frame at which the set is empty and stays empty, if any.
    pub fn extinction_frame(&self) -> Option<usize> {
        let mut k = self.sets.len();
        while k > 0 && self.sets[k - 1].is_empty() {
            k -= 1;
        }
        if k < self.sets.len() {
            Some(k)
        } else {
            None
        }
    }
}

/// A foliation sample: sorted levels, each with a full time series on a
/// common grid and time grid.
#[derive(Debug, Clone)]
pub struct LevelFamily {
    levels: Vec<f64>,
    series: Vec<LevelSeries>,
    dt: f64,
    grid: Grid2,
    provenance: Provenance,
    source: Option<Arc<SpaceTimeField>>,
}

impl LevelFamily {
    /// Extract the sub-level sets of `u` at the given levels (sorted,
    /// deduplicated). Extraction is parallel over (level, frame).
    pub fn extract(u: &SpaceTimeField, levels: &[f64]) -> Result<LevelFamily> {
        if levels.is_empty() {
            return Err(McfError::InvalidArgument("need at least one level".into()));
        }
        let mut levels: Vec<f64> = levels.to_vec();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("levels must not be NaN"));
        levels.dedup();
        let series: Vec<LevelSeries> = levels
            .par_iter()
            .map(|&s| LevelSeries {
                level: s,
                sets: u.frames().iter().map(|f| sublevel_set(f, s)).collect(),
            })
            .collect();
        Ok(LevelFamily {
            levels,
            series,
            dt: u.dt(),
            grid: u.grid().clone(),
            provenance: Provenance::Extracted,
            source: Some(Arc::new(u.clone())),
        })
    }

    /// Assemble from externally supplied series (no source field).
    pub fn from_series(series: Vec<LevelSeries>, dt: f64) -> Result<LevelFamily> {
        if series.is_empty() {
            return Err(McfError::InvalidArgument(
                "need at least one level series".into(),
            ));
        }
        let n_frames = series[0].sets.len();
        let grid = series[0].sets[0].grid().clone();
        let mut sorted = series;
        sorted.sort_by(|a, b| {
            a.level
                .partial_cmp(&b.level)
                .expect("levels must not be NaN")
        });
        for s in &sorted {
            if s.sets.len() != n_frames {
                return Err(McfError::InvalidArgument(format!(
                    "level {} has {} frames, expected {n_frames}",
                    s.level,
                    s.sets.len()
                )));
            }
            if s.sets.iter().any(|set| set.grid() != &grid) {
                return Err(McfError::GridMismatch(format!(
                    "level {} carries sets on a different grid",
                    s.level
                )));
            }
        }
        let levels = sorted.iter().map(|s| s.level).collect();
        Ok(LevelFamily {
            levels,
            series: sorted,
            dt,
            grid,
            provenance: Provenance::External,
            source: None,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn n_frames(&self) -> usize {
        self.series[0].sets.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The source field, when the family was extracted from one.
    pub fn source(&self) -> Option<&SpaceTimeField> {
        self.source.as_deref()
    }

    pub fn all_series(&self) -> &[LevelSeries] {
        &self.series
    }

    /// Series of a level; the level must match one of the stored ones.
    pub fn series(&self, s: f64) -> Result<&LevelSeries> {
        let tol = 1e-12 * (1.0 + self.levels.last().unwrap().abs());
        self.series
            .iter()
            .find(|ls| (ls.level - s).abs() <= tol)
            .ok_or_else(|| McfError::InvalidArgument(format!("level {s} not in the family")))
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 * self.dt
    }

    /// Source field required by the differential checks (velocity,
    /// curvature); external families cannot run them.
    pub fn require_source(&self) -> Result<&SpaceTimeField> {
        self.source().ok_or_else(|| {
            McfError::InsufficientData(
                "check needs the source field; the family was supplied externally".into(),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_grid, SpaceTimeField};

    fn shrinking(u0: f64) -> SpaceTimeField {
        let g = make_grid([0.0, 0.0], 2.0, 65).unwrap();
        SpaceTimeField::from_fn(g, 0.05, 8, move |x, y, t| x * x + y * y + u0 * t).unwrap()
    }

    #[test]
    fn extract_sorts_levels_and_keeps_frames() {
        let u = shrinking(2.0);
        let fam = LevelFamily::extract(&u, &[1.0, 0.25, 2.0]).unwrap();
        assert_eq!(fam.levels(), &[0.25, 1.0, 2.0]);
        assert_eq!(fam.n_frames(), 8);
        assert!(fam.source().is_some());
        // Level 0.25: the disc shrinks and dies at t = 0.125.
        let series = fam.series(0.25).unwrap();
        assert_eq!(series.extinction_frame(), Some(3));
        assert!(series.sets[7].is_empty());
        assert!(!series.sets[0].is_empty());
    }

    #[test]
    fn external_family_has_no_source() {
        let u = shrinking(2.0);
        let fam = LevelFamily::extract(&u, &[1.0]).unwrap();
        let rebuilt =
            LevelFamily::from_series(vec![fam.series(1.0).unwrap().clone()], fam.dt()).unwrap();
        assert_eq!(rebuilt.provenance(), Provenance::External);
        assert!(rebuilt.require_source().is_err());
    }
}
