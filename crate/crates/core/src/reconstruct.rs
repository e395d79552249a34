//! Layer-cake reconstruction: rebuild a level-set function from its
//! foliation and measure the round-trip distance to the original.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{McfError, Result};
use crate::field::{ScalarField, SpaceTimeField};
use crate::geometry::{hausdorff_distance, marching_squares};
use crate::verify::{detect_fattening, json_f64, LevelFamily, LevelSeries, ReportEntry};

/// Level bound and spacing of a layer-cake reconstruction.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LayerCakeParams {
    /// Bound K of the reconstruction `v = K − Δs·Σ_s χ_{Ω_s}`; must cover
    /// the field's range.
    pub k_bound: f64,
    /// Level spacing Δs.
    pub ds: f64,
}

impl LayerCakeParams {
    /// Parameters covering the range of `g` with `m ≥ 4` levels: the bound
    /// is padded by one spacing beyond `max(|min g|, |max g|)`.
    pub fn for_field(g: &ScalarField, m: usize) -> Result<LayerCakeParams> {
        if m < 4 {
            return Err(McfError::InvalidArgument(format!(
                "need ≥ 4 levels, got {m}"
            )));
        }
        let k0 = g.min().abs().max(g.max().abs()).max(1e-12);
        let ds = 2.0 * k0 / (m - 2) as f64;
        Ok(LayerCakeParams {
            k_bound: k0 + ds,
            ds,
        })
    }

    /// Midpoint level ladder `s_j = −K + (j + ½)Δs` covering `[−K, K]`.
    pub fn levels(&self) -> Vec<f64> {
        let m = (2.0 * self.k_bound / self.ds).round() as usize;
        (0..m)
            .map(|j| -self.k_bound + (j as f64 + 0.5) * self.ds)
            .collect()
    }
}

/// Check that consecutive levels are nested cellwise at every frame;
/// the first violation is reported with its levels and time.
fn check_nesting(fam: &LevelFamily) -> Result<()> {
    let series = fam.all_series();
    for w in series.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        for (k, (a, b)) in lo.sets.iter().zip(&hi.sets).enumerate() {
            let out = a.indicator().minus_count(b.indicator())?;
            if out > 0 {
                return Err(McfError::NestingViolation {
                    s_lo: lo.level,
                    s_hi: hi.level,
                    t: fam.time_of(k),
                    cells: out,
                });
            }
        }
    }
    Ok(())
}

/// Intersection cascade from the top level down: `Ω_s := Ω_s ∩ Ω_{s'}` for
/// every higher level s'. Produces a nested family; meant as an explicit
/// repair mode, never applied silently.
pub fn repair_nesting(fam: &LevelFamily) -> Result<LevelFamily> {
    let series = fam.all_series();
    let mut repaired: Vec<LevelSeries> = Vec::with_capacity(series.len());
    // Walk top-down so each level intersects with the already-repaired one
    // above it.
    for ls in series.iter().rev() {
        let above = repaired.last();
        let mut sets = Vec::with_capacity(ls.sets.len());
        for (k, set) in ls.sets.iter().enumerate() {
            match above {
                None => sets.push(set.clone()),
                Some(hi) => {
                    let cap =
                        crate::geometry::IndicatorGrid::from_pred(set.grid().clone(), |i, j| {
                            set.indicator().get(i, j) && hi.sets[k].indicator().get(i, j)
                        });
                    sets.push(crate::geometry::FinitePerimeterSet::from_indicator(
                        cap,
                        ls.level,
                        fam.time_of(k),
                    )?);
                }
            }
        }
        repaired.push(LevelSeries {
            level: ls.level,
            sets,
        });
    }
    repaired.reverse();
    LevelFamily::from_series(repaired, fam.dt())
}

/// Rebuild the function from its foliation:
/// `v(x, t) = K − Δs · Σ_s χ_{Ω_s(t)}(x)`. The family must cover `[−K, K]`
/// with spacing ≤ Δs and be nested per frame; a nesting violation is the
/// discrete failure of the set comparison principle and is surfaced, not
/// repaired.
pub fn layer_cake(fam: &LevelFamily, params: &LayerCakeParams) -> Result<SpaceTimeField> {
    let levels = fam.levels();
    if levels.is_empty() {
        return Err(McfError::InvalidArgument("empty family".into()));
    }
    let k = params.k_bound;
    let ds = params.ds;
    let tol = 1e-9 * ds;
    if levels[0] > -k + ds * 0.5 + tol || *levels.last().unwrap() < k - ds * 0.5 - tol {
        return Err(McfError::InvalidArgument(format!(
            "family levels [{}, {}] do not cover [-K, K] = [{}, {}] to within half a spacing",
            levels[0],
            levels.last().unwrap(),
            -k,
            k
        )));
    }
    for w in levels.windows(2) {
        if w[1] - w[0] > ds + tol {
            return Err(McfError::InvalidArgument(format!(
                "level gap {} exceeds the spacing {ds}",
                w[1] - w[0]
            )));
        }
    }
    check_nesting(fam)?;

    let grid = fam.grid().clone();
    let n_frames = fam.n_frames();
    let frames: Vec<ScalarField> = (0..n_frames)
        .into_par_iter()
        .map(|frame_idx| {
            let mut counts = vec![0u32; grid.node_count()];
            for ls in fam.all_series() {
                let ind = ls.sets[frame_idx].indicator();
                for j in 0..grid.ny() {
                    for i in 0..grid.nx() {
                        if ind.get(i, j) {
                            counts[grid.idx(i, j)] += 1;
                        }
                    }
                }
            }
            let values = counts.iter().map(|&c| k - ds * c as f64).collect();
            ScalarField::from_values(grid.clone(), fam.time_of(frame_idx), values)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(frames, fam.dt())
}

/// Max over nodes and frames of `|u − v|`.
pub fn sup_norm_distance(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<f64> {
    if u.grid() != v.grid() || u.n_frames() != v.n_frames() {
        return Err(McfError::GridMismatch(
            "sup-norm distance needs matching grids and frame counts".into(),
        ));
    }
    let mut worst = 0.0f64;
    for (fu, fv) in u.frames().iter().zip(v.frames()) {
        for (a, b) in fu.values().iter().zip(fv.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Consistency of a family with its field: for each (s, t) the Hausdorff
/// distance between the level curve of `u` and the stored set boundary must
/// stay within 2h. Frames whose level curve carries a degenerate-gradient
/// arc fraction above the limit are probed for fattening and flagged in the
/// metadata rather than failed.
pub fn check_level_consistency(u: &SpaceTimeField, fam: &LevelFamily) -> Result<ReportEntry> {
    let grid = u.grid();
    if grid != fam.grid() || u.n_frames() != fam.n_frames() {
        return Err(McfError::GridMismatch(
            "family does not match the field".into(),
        ));
    }
    let h = grid.h();
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0);
    let mut flagged = Vec::new();
    for ls in fam.all_series() {
        for (k, set) in ls.sets.iter().enumerate() {
            let t = fam.time_of(k);
            let fresh = marching_squares(u.frame(k), ls.level);
            let d = hausdorff_distance(&fresh, set.boundary());
            // Both empty gives 0; one empty means the family disagrees
            // about extinction, an infinite mismatch.
            if d > worst {
                worst = d;
                worst_at = (ls.level, t);
            }
            if fresh.is_empty() {
                continue;
            }
            // A sizable arc fraction with gradients far below the contour
            // median signals a forming plateau; probe it for fattening.
            let weights = fresh.arc_weights();
            let mut grads: Vec<f64> = Vec::with_capacity(fresh.total_vertices());
            for (_, _, p) in fresh.vertices() {
                let g = u.frame(k).interp_gradient(p[0], p[1]);
                grads.push((g[0] * g[0] + g[1] * g[1]).sqrt());
            }
            let mut sorted = grads.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = sorted[sorted.len() / 2];
            let (mut bad, mut total) = (0.0f64, 0.0f64);
            for ((ci, vi, _), g) in fresh.vertices().zip(&grads) {
                let w = weights[ci][vi];
                total += w;
                if *g < 0.1 * median {
                    bad += w;
                }
            }
            if total > 0.0 && bad / total > crate::verify::DEGENERATE_FRACTION_LIMIT {
                let lip = {
                    let mut m = 0.0f64;
                    for (_, _, p) in fresh.vertices() {
                        let g = u.frame(k).interp_gradient(p[0], p[1]);
                        m = m.max((g[0] * g[0] + g[1] * g[1]).sqrt());
                    }
                    m
                };
                let dmin = (2.5 * h * lip).max(4.0 * h);
                let deltas = [4.0 * dmin, 2.0 * dmin, dmin];
                if let Ok(entry) = detect_fattening(u, ls.level, t, &deltas) {
                    if !entry.passed() {
                        flagged.push(json!({
                            "level": ls.level,
                            "t": t,
                            "indicator": entry.residual,
                        }));
                    }
                }
            }
        }
    }
    let meta = json!({
        "max_hausdorff": json_f64(worst),
        "at_level": worst_at.0,
        "at_time": worst_at.1,
        "fattening_flags": flagged,
    });
    Ok(ReportEntry::with_verdict(
        "level_consistency",
        if worst.is_finite() { worst } else { f64::MAX },
        1.0,
        2.0 * h,
        worst <= 2.0 * h,
        meta,
    ))
}
