//! Curvature, normals, normal velocity and distances on contours.
//!
//! All vertex quantities come from bilinear interpolation of central-stencil
//! outputs. Vertices where `|∇u|` falls below the field's degeneracy
//! threshold are flagged and excluded from arc integrals; callers report the
//! flagged arc fraction.

use super::contour::{dist, Contour, ContourField};
use super::marching::marching_squares;
use crate::error::Result;
use crate::field::{ScalarField, SpaceTimeField};

fn interp_hessian(f: &ScalarField, p: [f64; 2]) -> [[f64; 2]; 2] {
    // Bilinear blend of the nodewise central Hessian; the blend weights are
    // shared across the three distinct entries.
    let g = f.grid();
    let h = g.h();
    let fx = ((p[0] - g.origin()[0]) / h).clamp(1.0, (g.nx() - 2) as f64 - 1e-9);
    let fy = ((p[1] - g.origin()[1]) / h).clamp(1.0, (g.ny() - 2) as f64 - 1e-9);
    let i = (fx.floor() as usize).clamp(1, g.nx() - 3);
    let j = (fy.floor() as usize).clamp(1, g.ny() - 3);
    let tx = fx - i as f64;
    let ty = fy - j as f64;
    let mut out = [[0.0f64; 2]; 2];
    for (di, dj, w) in [
        (0usize, 0usize, (1.0 - tx) * (1.0 - ty)),
        (1, 0, tx * (1.0 - ty)),
        (0, 1, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ] {
        let hess = f
            .hessian_central(i + di, j + dj)
            .expect("clamped interpolation index is interior");
        out[0][0] += w * hess[0][0];
        out[0][1] += w * hess[0][1];
        out[1][0] += w * hess[1][0];
        out[1][1] += w * hess[1][1];
    }
    out
}

/// Signed curvature of the level curves of `f` at the contour vertices:
/// `(∇²f : (Id − ν⊗ν)) / |∇f|`, positive where the sub-level set is convex.
/// Degenerate-gradient vertices are flagged with value 0.
pub fn curvature_on_contour(f: &ScalarField, c: &Contour) -> ContourField<f64> {
    let theta = f.grad_threshold();
    ContourField::from_vertices(c, |p| {
        let g = f.interp_gradient(p[0], p[1]);
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if norm <= theta {
            return (0.0, true);
        }
        let hess = interp_hessian(f, p);
        let nu = [g[0] / norm, g[1] / norm];
        let nhn = nu[0] * (hess[0][0] * nu[0] + hess[0][1] * nu[1])
            + nu[1] * (hess[0][1] * nu[0] + hess[1][1] * nu[1]);
        let trace = hess[0][0] + hess[1][1];
        ((trace - nhn) / norm, false)
    })
}

/// Outward unit normal `ν = ∇f/|∇f|` of the sub-level set at the vertices.
pub fn normals_on_contour(f: &ScalarField, c: &Contour) -> ContourField<[f64; 2]> {
    let theta = f.grad_threshold();
    ContourField::from_vertices(c, |p| {
        let g = f.interp_gradient(p[0], p[1]);
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if norm <= theta {
            ([0.0, 0.0], true)
        } else {
            ([g[0] / norm, g[1] / norm], false)
        }
    })
}

/// Normal velocity `V = −∂_t u / |∇u|` with respect to the outward normal of
/// `{u < s}`, sampled at the vertices of an already extracted contour of
/// frame `k`.
pub fn velocity_on_existing_contour(
    u: &SpaceTimeField,
    k: usize,
    c: &Contour,
) -> Result<ContourField<f64>> {
    let frame = u.frame(k);
    let dudt = u.time_derivative(k)?;
    let theta = frame.grad_threshold();
    Ok(ContourField::from_vertices(c, |p| {
        let g = frame.interp_gradient(p[0], p[1]);
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if norm <= theta {
            (0.0, true)
        } else {
            (-dudt.interp(p[0], p[1]) / norm, false)
        }
    }))
}

/// Extract the `s`-level contour at time `t` and compute its normal
/// velocity. The time derivative is a centered difference over the
/// neighboring frames (one-sided at the first and last frame).
pub fn normal_velocity_on_contour(
    u: &SpaceTimeField,
    s: f64,
    t: f64,
) -> Result<(Contour, ContourField<f64>)> {
    let k = u.frame_index_at(t)?;
    let c = marching_squares(u.frame(k), s);
    let v = velocity_on_existing_contour(u, k, &c)?;
    Ok((c, v))
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn directed_min(a: &Contour, b: &Contour) -> f64 {
    let mut best = f64::INFINITY;
    for comp_a in a.components() {
        for &p in &comp_a[..comp_a.len() - 1] {
            for comp_b in b.components() {
                for w in comp_b.windows(2) {
                    best = best.min(point_segment_distance(p, w[0], w[1]));
                }
            }
        }
    }
    best
}

/// Minimal Euclidean distance between two contours (vertex-to-segment, both
/// directions). Returns `+∞` when either contour is empty; callers flag that
/// case.
pub fn boundary_distance(a: &Contour, b: &Contour) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed_min(a, b).min(directed_min(b, a))
}

fn directed_hausdorff(a: &Contour, b: &Contour) -> f64 {
    let mut worst: f64 = 0.0;
    for comp_a in a.components() {
        for &p in &comp_a[..comp_a.len() - 1] {
            let mut best = f64::INFINITY;
            for comp_b in b.components() {
                for w in comp_b.windows(2) {
                    best = best.min(point_segment_distance(p, w[0], w[1]));
                }
            }
            worst = worst.max(best);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between contours. Two empty contours are at
/// distance 0; one empty contour is at `+∞`.
pub fn hausdorff_distance(a: &Contour, b: &Contour) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed_hausdorff(a, b).max(directed_hausdorff(b, a)),
    }
}
