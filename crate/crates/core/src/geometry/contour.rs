//! Closed oriented polylines and per-vertex contour data.

use crate::error::{McfError, Result};

/// A set of closed oriented polylines approximating one level set.
///
/// Each component stores its vertices with the first vertex repeated at the
/// end. Orientation convention: the sub-level region `{u < s}` lies on the
/// left of the direction of travel, so outer boundaries run counterclockwise
/// and hole boundaries clockwise.
#[derive(Debug, Clone)]
pub struct Contour {
    pub(crate) components: Vec<Vec<[f64; 2]>>,
    pub(crate) level: f64,
    pub(crate) time_tag: f64,
    /// Some node value was exactly on the level and was symbolically
    /// perturbed upward during extraction.
    pub(crate) perturbed: bool,
    /// Number of ambiguous (saddle) cells resolved by center sampling.
    pub(crate) saddle_cells: usize,
}

impl Contour {
    pub fn empty(level: f64, time_tag: f64) -> Contour {
        Contour {
            components: Vec::new(),
            level,
            time_tag,
            perturbed: false,
            saddle_cells: 0,
        }
    }

    pub fn components(&self) -> &[Vec<[f64; 2]>] {
        &self.components
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn time_tag(&self) -> f64 {
        self.time_tag
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn perturbed(&self) -> bool {
        self.perturbed
    }

    pub fn saddle_cells(&self) -> usize {
        self.saddle_cells
    }

    /// Vertices per component, excluding the closing duplicate.
    pub fn unique_counts(&self) -> Vec<usize> {
        self.components
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .collect()
    }

    pub fn total_vertices(&self) -> usize {
        self.unique_counts().iter().sum()
    }

    /// Sum of segment lengths over all components.
    pub fn perimeter(&self) -> f64 {
        self.components
            .iter()
            .map(|comp| comp.windows(2).map(|w| dist(w[0], w[1])).sum::<f64>())
            .sum()
    }

    /// Net signed area by the shoelace formula. Positive for a region whose
    /// outer boundary is counterclockwise; holes subtract.
    pub fn signed_area(&self) -> f64 {
        self.components
            .iter()
            .map(|comp| {
                0.5 * comp
                    .windows(2)
                    .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
                    .sum::<f64>()
            })
            .sum()
    }

    /// Arc-length weight of every unique vertex: half the length of its two
    /// incident segments (cyclic).
    pub fn arc_weights(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|comp| {
                let m = comp.len() - 1;
                (0..m)
                    .map(|k| {
                        let prev = comp[(k + m - 1) % m];
                        let next = comp[k + 1];
                        0.5 * (dist(prev, comp[k]) + dist(comp[k], next))
                    })
                    .collect()
            })
            .collect()
    }

    /// Mean distance of the vertices to a point; the radius estimate for
    /// near-circular contours.
    pub fn mean_radius(&self, center: [f64; 2]) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for comp in &self.components {
            for v in &comp[..comp.len() - 1] {
                total += dist(*v, center);
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    /// Iterate unique vertices as `(component, index, point)`.
    pub fn vertices(&self) -> impl Iterator<Item = (usize, usize, [f64; 2])> + '_ {
        self.components.iter().enumerate().flat_map(|(ci, comp)| {
            comp[..comp.len() - 1]
                .iter()
                .enumerate()
                .map(move |(vi, &p)| (ci, vi, p))
        })
    }

    /// True when some pair of non-adjacent segments intersects. Quadratic;
    /// meant for tests and diagnostics.
    pub fn has_self_intersection(&self) -> bool {
        let segments: Vec<([f64; 2], [f64; 2])> = self
            .components
            .iter()
            .flat_map(|comp| comp.windows(2).map(|w| (w[0], w[1])))
            .collect();
        for a in 0..segments.len() {
            for b in (a + 1)..segments.len() {
                let (p, q) = segments[a];
                let (r, s) = segments[b];
                // Skip segments sharing an endpoint.
                if p == r || p == s || q == r || q == s {
                    continue;
                }
                if segments_cross(p, q, r, s) {
                    return true;
                }
            }
        }
        false
    }
}

/// Per-vertex data attached to a contour, aligned with its unique vertices.
/// `flagged` marks vertices whose gradient was below the degeneracy
/// threshold; they are excluded from arc integrals.
#[derive(Debug, Clone)]
pub struct ContourField<T> {
    pub values: Vec<Vec<T>>,
    pub flagged: Vec<Vec<bool>>,
}

impl<T> ContourField<T> {
    /// Build by evaluating `f` at every unique vertex; `f` returns the value
    /// and whether the vertex is degenerate.
    pub fn from_vertices(c: &Contour, mut f: impl FnMut([f64; 2]) -> (T, bool)) -> ContourField<T> {
        let mut values = Vec::with_capacity(c.components.len());
        let mut flagged = Vec::with_capacity(c.components.len());
        for comp in &c.components {
            let mut vals = Vec::with_capacity(comp.len() - 1);
            let mut flags = Vec::with_capacity(comp.len() - 1);
            for &p in &comp[..comp.len() - 1] {
                let (v, bad) = f(p);
                vals.push(v);
                flags.push(bad);
            }
            values.push(vals);
            flagged.push(flags);
        }
        ContourField { values, flagged }
    }

    pub fn matches(&self, c: &Contour) -> bool {
        self.values.len() == c.components.len()
            && self
                .values
                .iter()
                .zip(&c.components)
                .all(|(vals, comp)| vals.len() + 1 == comp.len())
    }

    /// Arc-length fraction of flagged vertices.
    pub fn flagged_fraction(&self, c: &Contour) -> f64 {
        let weights = c.arc_weights();
        let mut bad = 0.0;
        let mut total = 0.0;
        for (ci, ws) in weights.iter().enumerate() {
            for (vi, &w) in ws.iter().enumerate() {
                total += w;
                if self.flagged[ci][vi] {
                    bad += w;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            bad / total
        }
    }
}

impl ContourField<f64> {
    /// Arc-weighted integral `∫ g(value) dμ` over the unflagged vertices.
    pub fn integrate(&self, c: &Contour, g: impl Fn(f64) -> f64) -> f64 {
        let weights = c.arc_weights();
        let mut sum = 0.0;
        for (ci, ws) in weights.iter().enumerate() {
            for (vi, &w) in ws.iter().enumerate() {
                if !self.flagged[ci][vi] {
                    sum += w * g(self.values[ci][vi]);
                }
            }
        }
        sum
    }
}

/// CSV export: `component_id,vertex_index,x,y[,v][,h],flagged`.
///
/// `v` and `h` are optional per-vertex columns (normal velocity and
/// curvature); the `flagged` column is 1 when either field marks the vertex
/// degenerate.
pub fn contour_to_csv(
    c: &Contour,
    v: Option<&ContourField<f64>>,
    h: Option<&ContourField<f64>>,
) -> Result<String> {
    for f in [v, h].into_iter().flatten() {
        if !f.matches(c) {
            return Err(McfError::InvalidArgument(
                "contour field does not match contour shape".into(),
            ));
        }
    }
    let mut out = String::from("component_id,vertex_index,x,y");
    if v.is_some() {
        out.push_str(",v");
    }
    if h.is_some() {
        out.push_str(",h");
    }
    out.push_str(",flagged\n");
    for (ci, vi, p) in c.vertices() {
        out.push_str(&format!("{ci},{vi},{},{}", p[0], p[1]));
        let mut bad = false;
        if let Some(f) = v {
            out.push_str(&format!(",{}", f.values[ci][vi]));
            bad |= f.flagged[ci][vi];
        }
        if let Some(f) = h {
            out.push_str(&format!(",{}", f.values[ci][vi]));
            bad |= f.flagged[ci][vi];
        }
        out.push_str(if bad { ",1\n" } else { ",0\n" });
    }
    Ok(out)
}

#[inline]
pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let d1 = cross(p, q, r);
    let d2 = cross(p, q, s);
    let d3 = cross(r, s, p);
    let d4 = cross(r, s, q);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}
