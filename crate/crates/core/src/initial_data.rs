//! Well-prepared initial data and the regularized total-variation norm.
//!
//! Every built datum is C²-smooth with bounded third differences (quintic
//! blends at all joins), constant outside a ball inside the grid, and passes
//! the plateau verdict of [`well_prepared_norm`]. `creased_datum` is the
//! deliberate negative control: a multi-scale ripple whose regularized
//! total variation keeps growing as the regularization shrinks.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{McfError, Result};
use crate::field::{Grid2, ScalarField};

/// Quintic smoothstep: 0 → 1 over [0, 1] with vanishing first and second
/// derivatives at both ends.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// C³ ramp `∫₀^τ smoothstep(ξ/σ) dξ`: zero for τ ≤ 0, `τ − σ/2` for τ ≥ σ.
fn smooth_ramp(tau: f64, sigma: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= sigma {
        tau - 0.5 * sigma
    } else {
        let q = tau / sigma;
        let q4 = q * q * q * q;
        sigma * (2.5 * q4 - 3.0 * q4 * q + q4 * q * q)
    }
}

/// Parameterized initial datum. Serialized as a JSON config block with a
/// `kind` tag.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumSpec {
    /// Radial profile from −1 to `outside`, crossing 0 at `radius`: the
    /// 0-sub-level set is the disc of that radius. The transition spans
    /// `[radius − width, radius + width]`.
    Circle {
        radius: f64,
        #[serde(default)]
        width: Option<f64>,
        #[serde(default = "default_outside")]
        outside: f64,
    },
    /// `x₁² + x₂²` out to `flat_radius`, blended to the constant
    /// `cap_radius²` beyond `cap_radius`.
    Paraboloid { flat_radius: f64, cap_radius: f64 },
    /// `(x²+y²)² − x² + y²` soft-clamped into [−1/5, 1]; the 0-level is the
    /// figure-eight with a self-intersection at the origin.
    Lemniscate {
        #[serde(default = "default_clamp_width")]
        clamp_width: f64,
    },
    /// Two separate circle data with centers offset by `separation` along x.
    /// Built via [`two_circles_datum`]; not a single field.
    TwoCircles { r1: f64, r2: f64, separation: f64 },
    /// Field loaded from a snapshot file; the snapshot's own grid is used.
    Custom { snapshot: PathBuf },
}

fn default_outside() -> f64 {
    1.0
}

fn default_clamp_width() -> f64 {
    0.05
}

fn circle_profile(r: f64, radius: f64, width: f64, outside: f64) -> f64 {
    (outside - 2.0) + 2.0 * smoothstep((r - (radius - width)) / (2.0 * width))
}

fn default_circle_width(radius: f64, r_dom: f64) -> f64 {
    (0.5f64).min(0.5 * radius).min(0.5 * (r_dom - radius))
}

/// Build a single-field datum on the given grid.
///
/// Errors with invalid-argument when cutoff radii exceed the grid's
/// constant-outside radius, and refuses to return a field whose boundary
/// ring is not constant.
pub fn build_datum(spec: &DatumSpec, grid: &Grid2) -> Result<ScalarField> {
    let r_dom = grid.r_dom();
    let field = match spec {
        DatumSpec::Circle {
            radius,
            width,
            outside,
        } => {
            let w = width.unwrap_or_else(|| default_circle_width(*radius, r_dom));
            if *radius <= 0.0 || w <= 0.0 || w.is_nan() || radius.is_nan() || w > *radius {
                return Err(McfError::InvalidArgument(format!(
                    "circle datum needs 0 < width ≤ radius, got radius {radius}, width {w}"
                )));
            }
            if radius + w > r_dom {
                return Err(McfError::InvalidArgument(format!(
                    "outer cutoff {} exceeds the constant-outside radius {r_dom}",
                    radius + w
                )));
            }
            let (radius, w, outside) = (*radius, w, *outside);
            ScalarField::from_fn(grid.clone(), 0.0, move |x, y| {
                circle_profile((x * x + y * y).sqrt(), radius, w, outside)
            })?
        }
        DatumSpec::Paraboloid {
            flat_radius,
            cap_radius,
        } => {
            let (a, b) = (*flat_radius, *cap_radius);
            if a <= 0.0 || a.is_nan() || b <= a || b.is_nan() {
                return Err(McfError::InvalidArgument(format!(
                    "paraboloid datum needs 0 < flat_radius < cap_radius, got {a}, {b}"
                )));
            }
            if b > r_dom {
                return Err(McfError::InvalidArgument(format!(
                    "cap radius {b} exceeds the constant-outside radius {r_dom}"
                )));
            }
            ScalarField::from_fn(grid.clone(), 0.0, move |x, y| {
                let r2 = x * x + y * y;
                let r = r2.sqrt();
                if r <= a {
                    r2
                } else if r >= b {
                    b * b
                } else {
                    r2 + (b * b - r2) * smoothstep((r - a) / (b - a))
                }
            })?
        }
        DatumSpec::Lemniscate { clamp_width } => {
            let sigma = *clamp_width;
            if sigma <= 0.0 || sigma.is_nan() || sigma > 0.2 {
                return Err(McfError::InvalidArgument(format!(
                    "lemniscate clamp width must be in (0, 0.2], got {sigma}"
                )));
            }
            let (lo, hi) = (-0.2, 1.0);
            ScalarField::from_fn(grid.clone(), 0.0, move |x, y| {
                let r2 = x * x + y * y;
                let base = r2 * r2 - x * x + y * y;
                let clamped_lo = lo + smooth_ramp(base - lo, sigma);
                hi - smooth_ramp(hi - clamped_lo, sigma)
            })?
        }
        DatumSpec::TwoCircles { .. } => {
            return Err(McfError::InvalidArgument(
                "two_circles describes a pair of fields; use two_circles_datum".into(),
            ))
        }
        DatumSpec::Custom { snapshot } => ScalarField::read_snapshot(snapshot)?,
    };
    if !field.boundary_ring_is_constant(2) {
        return Err(McfError::Construction(
            "datum is not constant on the boundary ring; enlarge the grid or shrink the cutoffs"
                .into(),
        ));
    }
    Ok(field)
}

/// Two well-prepared circle data whose 0-levels are disjoint circles of
/// radii `r1`, `r2` with centers offset by `separation` along the x axis.
pub fn two_circles_datum(
    r1: f64,
    r2: f64,
    separation: f64,
    grid: &Grid2,
) -> Result<(ScalarField, ScalarField)> {
    if r1 <= 0.0 || r2 <= 0.0 || r1.is_nan() || r2.is_nan() || separation < 0.0 {
        return Err(McfError::InvalidArgument(format!(
            "two_circles needs positive radii and separation ≥ 0, got {r1}, {r2}, {separation}"
        )));
    }
    let nested = separation + r1.min(r2) < r1.max(r2);
    let external = separation > r1 + r2;
    if !nested && !external {
        return Err(McfError::InvalidArgument(format!(
            "circles overlap: radii {r1}, {r2} at separation {separation}"
        )));
    }
    let r_dom = grid.r_dom();
    let centers = [[-0.5 * separation, 0.0], [0.5 * separation, 0.0]];
    let mut out = Vec::with_capacity(2);
    for (r, c) in [(r1, centers[0]), (r2, centers[1])] {
        let reach = r + c[0].abs();
        let w = (0.5f64).min(0.5 * r).min(0.5 * (r_dom - reach));
        if w <= 0.0 || w.is_nan() {
            return Err(McfError::InvalidArgument(format!(
                "circle of radius {r} at offset {} does not fit inside the grid",
                c[0]
            )));
        }
        let field = ScalarField::from_fn(grid.clone(), 0.0, move |x, y| {
            circle_profile(((x - c[0]).powi(2) + (y - c[1]).powi(2)).sqrt(), r, w, 1.0)
        })?;
        if !field.boundary_ring_is_constant(2) {
            return Err(McfError::Construction(
                "two-circle datum is not constant on the boundary ring".into(),
            ));
        }
        out.push(field);
    }
    let second = out.pop().unwrap();
    Ok((out.pop().unwrap(), second))
}

/// Multi-scale ripple fixture living on horizontal strips: octave k doubles
/// in frequency while its gradient amplitude halves, and each octave owns
/// its own strip so its extrema are not drowned by steeper neighbors. Each
/// halving of the regularization then activates another strip's extrema and
/// the regularized total variation keeps growing instead of plateauing.
/// Deliberately not C³-adequate.
pub fn creased_datum(grid: &Grid2) -> Result<ScalarField> {
    let r_dom = grid.r_dom();
    let octaves = 6usize;
    let strip = 2.0 * r_dom / octaves as f64;
    ScalarField::from_fn(grid.clone(), 0.0, move |x, y| {
        let r = (x * x + y * y).sqrt();
        let win_r = 1.0 - smoothstep((r - 0.55 * r_dom) / (0.3 * r_dom));
        if win_r == 0.0 {
            return 0.0;
        }
        let mut v = 0.0;
        for k in 0..octaves {
            let yc = -r_dom + (k as f64 + 0.5) * strip;
            let band = 1.0 - smoothstep(((y - yc).abs() - 0.28 * strip) / (0.18 * strip));
            if band == 0.0 {
                continue;
            }
            let omega = 3.0 * (1 << k) as f64;
            let grad_amp = 0.5 * 2.0f64.powi(-(k as i32));
            v += (grad_amp / omega)
                * band
                * (omega * x + 0.7 * k as f64).cos()
                * (omega * y + 1.3 * k as f64).cos();
        }
        v * win_r
    })
}

/// Per-eps values of `∫ |∇·(∇g / √(|∇g|² + ε²))| dx` with the sup and the
/// plateau verdict.
#[derive(Debug, Clone, Serialize)]
pub struct WellPreparedReport {
    pub per_eps: Vec<(f64, f64)>,
    pub sup: f64,
    /// Last two values differ by at most 10%.
    pub plateau_ok: bool,
}

/// Cell quadrature of the regularized total-variation integrand for each
/// eps in a descending list from (0, 1].
pub fn well_prepared_norm(g: &ScalarField, eps_list: &[f64]) -> Result<WellPreparedReport> {
    if eps_list.is_empty() {
        return Err(McfError::InvalidArgument(
            "eps list must not be empty".into(),
        ));
    }
    for pair in eps_list.windows(2) {
        if pair[1] >= pair[0] {
            return Err(McfError::InvalidArgument(
                "eps list must be strictly descending".into(),
            ));
        }
    }
    if eps_list[0] > 1.0 || *eps_list.last().unwrap() <= 0.0 {
        return Err(McfError::InvalidArgument(
            "eps values must lie in (0, 1]".into(),
        ));
    }

    let grid = g.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let mut per_eps = Vec::with_capacity(eps_list.len());
    let mut fx = vec![0.0f64; grid.node_count()];
    let mut fy = vec![0.0f64; grid.node_count()];
    for &eps in eps_list {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let gx = (g.value(i + 1, j) - g.value(i - 1, j)) * 0.5 / h;
                let gy = (g.value(i, j + 1) - g.value(i, j - 1)) * 0.5 / h;
                let denom = (gx * gx + gy * gy + eps * eps).sqrt();
                fx[grid.idx(i, j)] = gx / denom;
                fy[grid.idx(i, j)] = gy / denom;
            }
        }
        let mut total = 0.0;
        for j in 2..ny - 2 {
            for i in 2..nx - 2 {
                let div = (fx[grid.idx(i + 1, j)] - fx[grid.idx(i - 1, j)]) * 0.5 / h
                    + (fy[grid.idx(i, j + 1)] - fy[grid.idx(i, j - 1)]) * 0.5 / h;
                total += div.abs();
            }
        }
        per_eps.push((eps, total * h * h));
    }
    let sup = per_eps.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
    let plateau_ok = {
        let n = per_eps.len();
        if n < 2 {
            true
        } else {
            let (prev, last) = (per_eps[n - 2].1, per_eps[n - 1].1);
            (last - prev).abs() <= 0.10 * prev.max(1e-12)
        }
    };
    Ok(WellPreparedReport {
        per_eps,
        sup,
        plateau_ok,
    })
}

/// Standard eps ladder {1, 1/2, …, 1/64} for well-preparedness checks.
pub fn standard_eps_ladder() -> Vec<f64> {
    (0..7).map(|k| 1.0 / (1u32 << k) as f64).collect()
}

/// Largest third central difference quotient of the field in either axis;
/// bounded uniformly in h for C³-adequate data.
pub fn third_difference_bound(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let h3 = grid.h().powi(3);
    let mut worst = 0.0f64;
    for j in 2..grid.ny() - 2 {
        for i in 2..grid.nx() - 2 {
            let dx = (f.value(i + 2, j) - 2.0 * f.value(i + 1, j) + 2.0 * f.value(i - 1, j)
                - f.value(i - 2, j))
                / (2.0 * h3);
            let dy = (f.value(i, j + 2) - 2.0 * f.value(i, j + 1) + 2.0 * f.value(i, j - 1)
                - f.value(i, j - 2))
                / (2.0 * h3);
            worst = worst.max(dx.abs()).max(dy.abs());
        }
    }
    worst
}
