//! External level-family storage: per-(level, frame) indicator snapshots
//! plus a JSON index. Indicators reuse the field snapshot format with
//! values 0/1.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use mcflab_core::field::ScalarField;
use mcflab_core::geometry::{FinitePerimeterSet, IndicatorGrid};
use mcflab_core::verify::{LevelFamily, LevelSeries};

#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyIndex {
    pub dt: f64,
    pub levels: Vec<f64>,
    /// files[level_idx][frame_idx]
    pub files: Vec<Vec<String>>,
}

pub fn save_family(fam: &LevelFamily, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (li, series) in fam.all_series().iter().enumerate() {
        let mut per_level = Vec::new();
        for (k, set) in series.sets.iter().enumerate() {
            let name = format!("set_{li:03}_{k:05}.mcf");
            let grid = set.grid().clone();
            let ind = set.indicator();
            let field = ScalarField::from_fn(grid.clone(), set.time_tag().max(0.0), |_, _| 0.0)?;
            let mut vals = field.values().to_vec();
            for j in 0..grid.ny() {
                for i in 0..grid.nx() {
                    if ind.get(i, j) {
                        vals[grid.idx(i, j)] = 1.0;
                    }
                }
            }
            let field = ScalarField::from_values(grid, fam.time_of(k), vals)?;
            field.write_snapshot(&dir.join(&name))?;
            per_level.push(name);
        }
        files.push(per_level);
    }
    let index = FamilyIndex {
        dt: fam.dt(),
        levels: fam.levels().to_vec(),
        files,
    };
    std::fs::write(
        dir.join("family.json"),
        serde_json::to_string_pretty(&index)?,
    )?;
    Ok(())
}

pub fn load_family(dir: &Path) -> anyhow::Result<LevelFamily> {
    let index_path = dir.join("family.json");
    if !index_path.exists() {
        bail!("missing family index: {}", index_path.display());
    }
    let index: FamilyIndex = serde_json::from_str(&std::fs::read_to_string(&index_path)?)
        .with_context(|| format!("parsing {}", index_path.display()))?;
    if index.levels.len() != index.files.len() {
        bail!("family index is inconsistent");
    }
    let mut series = Vec::new();
    for (level, files) in index.levels.iter().zip(&index.files) {
        let mut sets = Vec::new();
        for (k, name) in files.iter().enumerate() {
            let field = ScalarField::read_snapshot(&dir.join(name))?;
            let grid = field.grid().clone();
            let ind = IndicatorGrid::from_pred(grid, |i, j| field.value(i, j) > 0.5);
            sets.push(FinitePerimeterSet::from_indicator(
                ind,
                *level,
                k as f64 * index.dt,
            )?);
        }
        series.push(LevelSeries {
            level: *level,
            sets,
        });
    }
    Ok(LevelFamily::from_series(series, index.dt)?)
}
