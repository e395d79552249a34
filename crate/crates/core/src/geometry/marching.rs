//! Marching squares with oriented output and center-sampled saddle
//! resolution.
//!
//! Crossing points are computed once per grid edge, so vertices shared by
//! adjacent cells are bit-identical and loops close exactly. Node values
//! equal to the level are perturbed upward by `1e-12 · range` (symbolic
//! perturbation), which makes the inside test strict and division-free.
//! The grid is framed by a virtual ring of outside nodes, so sub-level
//! regions touching the grid edge still close along the border.

use std::collections::HashMap;

use super::contour::Contour;
use crate::field::ScalarField;

/// Grid edge between two adjacent padded nodes; `H` joins `(i,j)-(i+1,j)`,
/// `V` joins `(i,j)-(i,j+1)`. Indices are padded (0 is the virtual ring).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

/// Extract the oriented level-set polylines of `{f = s}`, with the sub-level
/// region `{f < s}` on the left of the travel direction.
pub fn marching_squares(f: &ScalarField, s: f64) -> Contour {
    let grid = f.grid().clone();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let perturb = 1e-12 * f.range().max(f64::MIN_POSITIVE);
    let pad = f.max().max(s) + f.range().max(1.0);

    // Below the minimum the set is empty; above the maximum it fills the
    // grid. Both have an empty boundary (P = 0).
    if s <= f.min() || s > f.max() {
        return Contour::empty(s, f.time_tag());
    }

    let mut perturbed = false;
    for j in 0..ny {
        for i in 0..nx {
            if f.value(i, j) == s {
                perturbed = true;
                break;
            }
        }
    }

    // Padded node access: index 0 and nx+1 (ny+1) are the virtual outside
    // ring; node values equal to s count as outside via the perturbation.
    let val = |pi: usize, pj: usize| -> f64 {
        if pi == 0 || pj == 0 || pi > nx || pj > ny {
            return pad;
        }
        let v = f.value(pi - 1, pj - 1);
        if v == s {
            s + perturb
        } else {
            v
        }
    };
    let coord_x = |pi: usize| grid.origin()[0] + (pi as f64 - 1.0) * h;
    let coord_y = |pj: usize| grid.origin()[1] + (pj as f64 - 1.0) * h;
    let inside = |pi: usize, pj: usize| val(pi, pj) < s;

    // Crossing coordinates, one entry per crossed padded edge.
    let mut coords: HashMap<EdgeId, [f64; 2]> = HashMap::new();
    let cross_h = |i: usize, j: usize, coords: &mut HashMap<EdgeId, [f64; 2]>| {
        coords.entry(EdgeId::H(i, j)).or_insert_with(|| {
            let (a, b) = (val(i, j), val(i + 1, j));
            let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
            [coord_x(i) + t * h, coord_y(j)]
        });
    };
    let cross_v = |i: usize, j: usize, coords: &mut HashMap<EdgeId, [f64; 2]>| {
        coords.entry(EdgeId::V(i, j)).or_insert_with(|| {
            let (a, b) = (val(i, j), val(i, j + 1));
            let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
            [coord_x(i), coord_y(j) + t * h]
        });
    };

    // Directed segments (from_edge, to_edge), cell scan order over the
    // padded cell lattice.
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    let mut saddle_cells = 0usize;

    for j in 0..ny + 1 {
        for i in 0..nx + 1 {
            let a = inside(i, j);
            let b = inside(i + 1, j);
            let c = inside(i + 1, j + 1);
            let d = inside(i, j + 1);
            let case = (a as u8) | (b as u8) << 1 | (c as u8) << 2 | (d as u8) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let s_edge = EdgeId::H(i, j);
            let n_edge = EdgeId::H(i, j + 1);
            let w_edge = EdgeId::V(i, j);
            let e_edge = EdgeId::V(i + 1, j);
            if a != b {
                cross_h(i, j, &mut coords);
            }
            if d != c {
                cross_h(i, j + 1, &mut coords);
            }
            if a != d {
                cross_v(i, j, &mut coords);
            }
            if b != c {
                cross_v(i + 1, j, &mut coords);
            }
            match case {
                1 => segments.push((s_edge, w_edge)),
                2 => segments.push((e_edge, s_edge)),
                3 => segments.push((e_edge, w_edge)),
                4 => segments.push((n_edge, e_edge)),
                6 => segments.push((n_edge, s_edge)),
                7 => segments.push((n_edge, w_edge)),
                8 => segments.push((w_edge, n_edge)),
                9 => segments.push((s_edge, n_edge)),
                11 => segments.push((e_edge, n_edge)),
                12 => segments.push((w_edge, e_edge)),
                13 => segments.push((s_edge, e_edge)),
                14 => segments.push((w_edge, s_edge)),
                5 => {
                    // A and C inside; decide by the bilinear value at the
                    // cell center (the asymptotic-decider rule).
                    saddle_cells += 1;
                    let center =
                        0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
                    if center < s {
                        segments.push((s_edge, e_edge));
                        segments.push((n_edge, w_edge));
                    } else {
                        segments.push((s_edge, w_edge));
                        segments.push((n_edge, e_edge));
                    }
                }
                10 => {
                    // B and D inside.
                    saddle_cells += 1;
                    let center =
                        0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
                    if center < s {
                        segments.push((w_edge, s_edge));
                        segments.push((e_edge, n_edge));
                    } else {
                        segments.push((e_edge, s_edge));
                        segments.push((w_edge, n_edge));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // Stitch segments into closed loops by following from-edge → to-edge.
    // Every crossed edge is "from" in exactly one of its two cells and "to"
    // in the other, and the virtual frame guarantees both cells exist.
    let by_start: HashMap<EdgeId, usize> = segments
        .iter()
        .enumerate()
        .map(|(k, &(from, _))| (from, k))
        .collect();
    let mut visited = vec![false; segments.len()];
    let mut components = Vec::new();
    let min_len = 1e-12 * h;

    for start in 0..segments.len() {
        if visited[start] {
            continue;
        }
        let mut loop_pts: Vec<[f64; 2]> = vec![coords[&segments[start].0]];
        let mut k = start;
        loop {
            visited[k] = true;
            let to = segments[k].1;
            loop_pts.push(coords[&to]);
            match by_start.get(&to) {
                Some(&next) if next == start => break,
                Some(&next) if !visited[next] => k = next,
                _ => {
                    debug_assert!(false, "contour chain failed to close at level {s}");
                    loop_pts.clear();
                    break;
                }
            }
        }
        if loop_pts.is_empty() {
            continue;
        }
        // Remove zero-length steps from node-coincident crossings.
        let mut cleaned: Vec<[f64; 2]> = Vec::with_capacity(loop_pts.len());
        for p in loop_pts {
            if cleaned
                .last()
                .is_none_or(|&q| dist2(p, q) > min_len * min_len)
            {
                cleaned.push(p);
            }
        }
        if cleaned.len() > 1 && dist2(cleaned[0], *cleaned.last().unwrap()) <= min_len * min_len {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            continue;
        }
        cleaned.push(cleaned[0]);
        components.push(cleaned);
    }

    Contour {
        components,
        level: s,
        time_tag: f.time_tag(),
        perturbed,
        saddle_cells,
    }
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
