//! Grids, scalar fields, finite-difference stencils, and the regularized
//! curvature operator.
//!
//! Fields are sampled on a uniform node grid and are immutable once built;
//! every stencil below is a pure read. The boundary ring of a field stays
//! constant under evolution (initial data are constant outside a ball), so
//! only second-order central stencils are ever needed.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{McfError, Result};

/// Magic bytes of the field snapshot format.
pub const SNAPSHOT_MAGIC: &[u8; 4] = b"MCF1";

/// Relative factor of `θ_grad`, the gradient-degeneracy threshold: below
/// `1e-3 · range / r_dom` the anisotropic part of the operator is dropped.
pub const GRAD_THRESHOLD_FACTOR: f64 = 1e-3;

/// A uniform node grid covering the square `[cx ± half_width] × [cy ± half_width]`.
///
/// `r_dom` is the radius of the ball outside which fields on this grid are
/// constant; `make_grid` sets it to the half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    origin: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    r_dom: f64,
}

impl Grid2 {
    /// Uniform square grid centered at `center` with `n × n` nodes and
    /// spacing `h = 2·half_width/(n−1)`.
    pub fn make_grid(center: [f64; 2], half_width: f64, n: usize) -> Result<Grid2> {
        if half_width <= 0.0 || !half_width.is_finite() {
            return Err(McfError::InvalidArgument(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n < 4 {
            return Err(McfError::InvalidArgument(format!(
                "grid needs at least 4 nodes per axis, got {n}"
            )));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        Ok(Grid2 {
            origin: [center[0] - half_width, center[1] - half_width],
            h,
            nx: n,
            ny: n,
            r_dom: half_width,
        })
    }

    /// Rectangular grid from raw snapshot data. `r_dom` is the largest ball
    /// around the grid center that the grid covers.
    pub fn from_raw(origin: [f64; 2], h: f64, nx: usize, ny: usize) -> Result<Grid2> {
        if h <= 0.0 || h.is_nan() || nx < 4 || ny < 4 {
            return Err(McfError::InvalidArgument(format!(
                "degenerate grid: h = {h}, nx = {nx}, ny = {ny}"
            )));
        }
        let half_x = 0.5 * h * (nx - 1) as f64;
        let half_y = 0.5 * h * (ny - 1) as f64;
        Ok(Grid2 {
            origin,
            h,
            nx,
            ny,
            r_dom: half_x.min(half_y),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Radius of the ball outside which fields are constant.
    pub fn r_dom(&self) -> f64 {
        self.r_dom
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Center of the covered square.
    pub fn center(&self) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * self.h * (self.nx - 1) as f64,
            self.origin[1] + 0.5 * self.h * (self.ny - 1) as f64,
        ]
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin[0] + self.h * i as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin[1] + self.h * j as f64
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Nodes at least `margin` cells away from every edge.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        (margin..ny.saturating_sub(margin))
            .flat_map(move |j| (margin..nx.saturating_sub(margin)).map(move |i| (i, j)))
    }

    fn is_interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i + 1 < self.nx && j + 1 < self.ny
    }
}

/// A grid-sampled scalar function together with the time it belongs to.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid2,
    values: Vec<f64>,
    time_tag: f64,
    min: f64,
    max: f64,
}

impl ScalarField {
    /// Build a field by sampling `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2, time_tag: f64, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self::from_values(grid, time_tag, values)
    }

    /// Build a field from raw node values in row-major order (x fastest).
    pub fn from_values(grid: Grid2, time_tag: f64, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.node_count() {
            return Err(McfError::InvalidArgument(format!(
                "value count {} does not match grid ({} nodes)",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !time_tag.is_finite() || time_tag < 0.0 {
            return Err(McfError::InvalidArgument(
                "field values and time tag must be finite, time ≥ 0".into(),
            ));
        }
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &values {
            min = min.min(v);
            max = max.max(v);
        }
        Ok(ScalarField {
            grid,
            values,
            time_tag,
            min,
            max,
        })
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn time_tag(&self) -> f64 {
        self.time_tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// max − min of the node values.
    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Gradient-degeneracy threshold `θ_grad = 1e-3 · range / r_dom`.
    pub fn grad_threshold(&self) -> f64 {
        GRAD_THRESHOLD_FACTOR * self.range() / self.grid.r_dom
    }

    /// Same field with a new time tag (values shared verbatim).
    pub fn retagged(&self, time_tag: f64) -> ScalarField {
        let mut f = self.clone();
        f.time_tag = time_tag;
        f
    }

    fn check_interior(&self, i: usize, j: usize) -> Result<()> {
        if self.grid.is_interior(i, j) {
            Ok(())
        } else {
            Err(McfError::OutOfDomain {
                i,
                j,
                nx: self.grid.nx,
                ny: self.grid.ny,
            })
        }
    }

    /// Second-order central gradient at an interior node.
    pub fn gradient_central(&self, i: usize, j: usize) -> Result<[f64; 2]> {
        self.check_interior(i, j)?;
        Ok(self.gradient_unchecked(i, j))
    }

    #[inline]
    fn gradient_unchecked(&self, i: usize, j: usize) -> [f64; 2] {
        let inv2h = 0.5 / self.grid.h;
        [
            (self.value(i + 1, j) - self.value(i - 1, j)) * inv2h,
            (self.value(i, j + 1) - self.value(i, j - 1)) * inv2h,
        ]
    }

    /// Second-order central Hessian `[[f_xx, f_xy], [f_xy, f_yy]]`.
    pub fn hessian_central(&self, i: usize, j: usize) -> Result<[[f64; 2]; 2]> {
        self.check_interior(i, j)?;
        Ok(self.hessian_unchecked(i, j))
    }

    #[inline]
    fn hessian_unchecked(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let h2 = self.grid.h * self.grid.h;
        let c = self.value(i, j);
        let fxx = (self.value(i + 1, j) - 2.0 * c + self.value(i - 1, j)) / h2;
        let fyy = (self.value(i, j + 1) - 2.0 * c + self.value(i, j - 1)) / h2;
        let fxy = (self.value(i + 1, j + 1) - self.value(i + 1, j - 1) - self.value(i - 1, j + 1)
            + self.value(i - 1, j - 1))
            / (4.0 * h2);
        [[fxx, fxy], [fxy, fyy]]
    }

    /// Regularized curvature operator
    /// `Δu − (∇u·∇²u·∇u)/(|∇u|² + eps²)` at an interior node.
    ///
    /// With `eps = 0` and `|∇u| ≤ θ_grad` the anisotropic term is dropped,
    /// so the operator degenerates to the Laplacian at critical points.
    pub fn mcf_operator(&self, i: usize, j: usize, eps: f64) -> Result<f64> {
        self.check_interior(i, j)?;
        if eps < 0.0 {
            return Err(McfError::InvalidArgument(format!(
                "eps must be ≥ 0, got {eps}"
            )));
        }
        Ok(self.mcf_operator_unchecked(i, j, eps, self.grad_threshold()))
    }

    #[inline]
    pub(crate) fn mcf_operator_unchecked(&self, i: usize, j: usize, eps: f64, theta: f64) -> f64 {
        let g = self.gradient_unchecked(i, j);
        let hess = self.hessian_unchecked(i, j);
        let lap = hess[0][0] + hess[1][1];
        let g2 = g[0] * g[0] + g[1] * g[1];
        if eps == 0.0 && g2 <= theta * theta {
            return lap;
        }
        let ghg = g[0] * (hess[0][0] * g[0] + hess[0][1] * g[1])
            + g[1] * (hess[0][1] * g[0] + hess[1][1] * g[1]);
        lap - ghg / (g2 + eps * eps)
    }

    /// Bilinear interpolation of the node values at a physical point.
    /// Points outside the grid are clamped to it.
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        self.interp_with(x, y, |i, j| self.value(i, j))
    }

    /// Bilinear interpolation of the central-difference gradient.
    /// Uses the interior stencil; valid one cell away from the edge.
    pub fn interp_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [
            self.interp_clamped(x, y, 1, |i, j| {
                (self.value(i + 1, j) - self.value(i - 1, j)) * 0.5 / self.grid.h
            }),
            self.interp_clamped(x, y, 1, |i, j| {
                (self.value(i, j + 1) - self.value(i, j - 1)) * 0.5 / self.grid.h
            }),
        ]
    }

    fn interp_with(&self, x: f64, y: f64, node: impl Fn(usize, usize) -> f64) -> f64 {
        self.interp_clamped(x, y, 0, node)
    }

    fn interp_clamped(
        &self,
        x: f64,
        y: f64,
        margin: usize,
        node: impl Fn(usize, usize) -> f64,
    ) -> f64 {
        let g = &self.grid;
        let fx = ((x - g.origin[0]) / g.h)
            .clamp(margin as f64, (g.nx - 2 - margin) as f64 + 1.0 - 1e-12);
        let fy = ((y - g.origin[1]) / g.h)
            .clamp(margin as f64, (g.ny - 2 - margin) as f64 + 1.0 - 1e-12);
        let i = (fx.floor() as usize).min(g.nx - 2 - margin).max(margin);
        let j = (fy.floor() as usize).min(g.ny - 2 - margin).max(margin);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let f00 = node(i, j);
        let f10 = node(i + 1, j);
        let f01 = node(i, j + 1);
        let f11 = node(i + 1, j + 1);
        f00 * (1.0 - tx) * (1.0 - ty)
            + f10 * tx * (1.0 - ty)
            + f01 * (1.0 - tx) * ty
            + f11 * tx * ty
    }

    /// Whether the outermost `width` rings of nodes all carry one value.
    pub fn boundary_ring_is_constant(&self, width: usize) -> bool {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        if nx < 2 * width || ny < 2 * width {
            return false;
        }
        let c = self.value(0, 0);
        for j in 0..ny {
            for i in 0..nx {
                let on_ring = i < width || j < width || i + width >= nx || j + width >= ny;
                if on_ring && self.value(i, j) != c {
                    return false;
                }
            }
        }
        true
    }

    /// Write the field in the binary snapshot format: magic `MCF1`, then
    /// little-endian `u32 nx, u32 ny, f64 h, f64 origin_x, f64 origin_y,
    /// f64 time_tag`, then `nx·ny` `f64` values in row-major order.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(4 + 8 + 4 * 8 + self.values.len() * 8);
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        buf.extend_from_slice(&(self.grid.nx as u32).to_le_bytes());
        buf.extend_from_slice(&(self.grid.ny as u32).to_le_bytes());
        buf.extend_from_slice(&self.grid.h.to_le_bytes());
        buf.extend_from_slice(&self.grid.origin[0].to_le_bytes());
        buf.extend_from_slice(&self.grid.origin[1].to_le_bytes());
        buf.extend_from_slice(&self.time_tag.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Read a field written by [`ScalarField::write_snapshot`].
    pub fn read_snapshot(path: &Path) -> Result<ScalarField> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 44 || &bytes[0..4] != SNAPSHOT_MAGIC {
            return Err(McfError::Format(format!(
                "{}: not a field snapshot (bad magic or truncated header)",
                path.display()
            )));
        }
        let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let nx = u32_at(4) as usize;
        let ny = u32_at(8) as usize;
        let h = f64_at(12);
        let origin = [f64_at(20), f64_at(28)];
        let time_tag = f64_at(36);
        let expected = 44 + nx * ny * 8;
        if bytes.len() != expected {
            return Err(McfError::Format(format!(
                "{}: expected {} bytes for a {}x{} snapshot, found {}",
                path.display(),
                expected,
                nx,
                ny,
                bytes.len()
            )));
        }
        let values = (0..nx * ny).map(|k| f64_at(44 + 8 * k)).collect();
        ScalarField::from_values(Grid2::from_raw(origin, h, nx, ny)?, time_tag, values)
    }
}

/// Grid construction by center, half-width and node count per axis.
pub fn make_grid(center: [f64; 2], half_width: f64, n: usize) -> Result<Grid2> {
    Grid2::make_grid(center, half_width, n)
}

/// A time-indexed sequence of fields on one grid, with uniform frame spacing.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    frames: Vec<ScalarField>,
    dt: f64,
    horizon: f64,
}

impl SpaceTimeField {
    /// Assemble from frames; validates the shared grid and the uniform
    /// `0, dt, 2dt, …` time tags.
    pub fn new(frames: Vec<ScalarField>, dt: f64) -> Result<SpaceTimeField> {
        if frames.is_empty() {
            return Err(McfError::InvalidArgument(
                "a space-time field needs ≥ 1 frame".into(),
            ));
        }
        if dt <= 0.0 || dt.is_nan() {
            return Err(McfError::InvalidArgument(format!(
                "dt must be > 0, got {dt}"
            )));
        }
        let grid = frames[0].grid().clone();
        for (k, f) in frames.iter().enumerate() {
            if f.grid() != &grid {
                return Err(McfError::GridMismatch(format!(
                    "frame {k} is on a different grid"
                )));
            }
            let expect = k as f64 * dt;
            if (f.time_tag() - expect).abs() > 1e-9 * dt.max(1.0) {
                return Err(McfError::InvalidArgument(format!(
                    "frame {k} tagged t = {}, expected {}",
                    f.time_tag(),
                    expect
                )));
            }
        }
        let horizon = (frames.len() - 1) as f64 * dt;
        Ok(SpaceTimeField {
            frames,
            dt,
            horizon,
        })
    }

    /// Sample an analytic space-time function on a grid at `n_frames` frames
    /// spaced `dt` apart. Used for closed-form fixtures.
    pub fn from_fn(
        grid: Grid2,
        dt: f64,
        n_frames: usize,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<SpaceTimeField> {
        let frames = (0..n_frames)
            .map(|k| {
                let t = k as f64 * dt;
                ScalarField::from_fn(grid.clone(), t, |x, y| f(x, y, t))
            })
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(frames, dt)
    }

    pub fn frames(&self) -> &[ScalarField] {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn grid(&self) -> &Grid2 {
        self.frames[0].grid()
    }

    pub fn frame(&self, k: usize) -> &ScalarField {
        &self.frames[k]
    }

    /// Frame index whose time tag is nearest to `t`; errors when `t` is more
    /// than half a step away from every frame.
    pub fn frame_index_at(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        if !(0.0..=(self.frames.len() - 1) as f64).contains(&k)
            || (t - k * self.dt).abs() > 0.5001 * self.dt
        {
            return Err(McfError::InvalidArgument(format!(
                "time {t} is not represented by frames 0..{} at dt = {}",
                self.frames.len() - 1,
                self.dt
            )));
        }
        Ok(k as usize)
    }

    /// Time derivative field at frame `k`: centered difference over the
    /// neighboring frames, one-sided at the ends.
    pub fn time_derivative(&self, k: usize) -> Result<ScalarField> {
        let n = self.frames.len();
        if n < 2 {
            return Err(McfError::InsufficientData(
                "time derivative needs ≥ 2 frames".into(),
            ));
        }
        let (a, b, denom) = if k == 0 {
            (0, 1, self.dt)
        } else if k + 1 == n {
            (n - 2, n - 1, self.dt)
        } else {
            (k - 1, k + 1, 2.0 * self.dt)
        };
        let vals = self.frames[a]
            .values()
            .iter()
            .zip(self.frames[b].values())
            .map(|(lo, hi)| (hi - lo) / denom)
            .collect();
        let mut f = ScalarField::from_values(self.grid().clone(), 0.0, vals)?;
        f.time_tag = self.frames[k].time_tag();
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2 {
        make_grid([0.0, 0.0], 2.0, n).unwrap()
    }

    #[test]
    fn make_grid_spacing() {
        let g = grid(5);
        assert_eq!(g.h(), 1.0);
        assert_eq!(g.nx(), 5);
        assert_eq!(g.ny(), 5);
        let g = grid(257);
        assert!((g.h() - 4.0 / 256.0).abs() < 1e-15);
        assert_eq!(g.r_dom(), 2.0);
    }

    #[test]
    fn make_grid_rejects_degenerate_input() {
        assert!(make_grid([0.0, 0.0], 0.0, 5).is_err());
        assert!(make_grid([0.0, 0.0], -1.0, 5).is_err());
        assert!(make_grid([0.0, 0.0], 2.0, 3).is_err());
    }

    #[test]
    fn gradient_exact_on_affine_field() {
        let f = ScalarField::from_fn(grid(33), 0.0, |x, y| 3.0 * x + 2.0 * y).unwrap();
        for (i, j) in f.grid().interior(1).collect::<Vec<_>>() {
            let g = f.gradient_central(i, j).unwrap();
            assert!((g[0] - 3.0).abs() < 1e-12, "df/dx = {} at ({i},{j})", g[0]);
            assert!((g[1] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_exact_on_quadratic() {
        // h = 0.5 grid through x = 1.
        let g = make_grid([0.0, 0.0], 2.0, 9).unwrap();
        let f = ScalarField::from_fn(g, 0.0, |x, _| x * x).unwrap();
        // x = 1 is node i = 6.
        assert!((f.grid().x(6) - 1.0).abs() < 1e-15);
        let grad = f.gradient_central(6, 4).unwrap();
        assert!(
            (grad[0] - 2.0).abs() < 1e-12,
            "central difference exact for quadratics"
        );
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let f = ScalarField::from_fn(grid(9), 0.0, |_, _| 7.5).unwrap();
        let g = f.gradient_central(4, 4).unwrap();
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn gradient_rejects_boundary_index() {
        let f = ScalarField::from_fn(grid(9), 0.0, |x, _| x).unwrap();
        assert!(matches!(
            f.gradient_central(0, 4),
            Err(McfError::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.gradient_central(4, 8),
            Err(McfError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn hessian_on_model_quadratics() {
        let f = ScalarField::from_fn(grid(17), 0.0, |x, y| x * x + y * y).unwrap();
        let h = f.hessian_central(8, 8).unwrap();
        assert!((h[0][0] - 2.0).abs() < 1e-10);
        assert!((h[1][1] - 2.0).abs() < 1e-10);
        assert!(h[0][1].abs() < 1e-10);

        let f = ScalarField::from_fn(grid(17), 0.0, |x, y| x * y).unwrap();
        let h = f.hessian_central(5, 11).unwrap();
        assert!(
            (h[0][1] - 1.0).abs() < 1e-10,
            "xy field has unit cross term"
        );
        assert!(h[0][0].abs() < 1e-10 && h[1][1].abs() < 1e-10);

        let f = ScalarField::from_fn(grid(17), 0.0, |x, y| 1.0 + 2.0 * x - y).unwrap();
        let h = f.hessian_central(8, 8).unwrap();
        for row in h {
            for v in row {
                assert!(v.abs() < 1e-10, "affine field has zero Hessian");
            }
        }
    }

    #[test]
    fn mcf_operator_on_paraboloid() {
        let f = ScalarField::from_fn(grid(17), 0.0, |x, y| x * x + y * y).unwrap();
        // Node at (1, 0): i = 12, j = 8 on the h = 0.25 grid.
        let g = f.grid();
        let (i, j) = (12, 8);
        assert!((g.x(i) - 1.0).abs() < 1e-15 && g.y(j).abs() < 1e-15);
        let v = f.mcf_operator(i, j, 0.0).unwrap();
        assert!(
            (v - 2.0).abs() < 1e-10,
            "Δu − ∇u·∇²u·∇u/|∇u|² = 4 − 2 = 2, got {v}"
        );

        // At the origin the gradient vanishes and the full Laplacian remains.
        let v = f.mcf_operator(8, 8, f.grid().h()).unwrap();
        assert!(
            (v - 4.0).abs() < 1e-10,
            "gradient term vanishes at the critical point"
        );
    }

    #[test]
    fn mcf_operator_zero_on_affine() {
        for eps in [0.0, 0.1, 1.0] {
            let f = ScalarField::from_fn(grid(17), 0.0, |x, y| 0.3 * x - 1.7 * y + 4.0).unwrap();
            let v = f.mcf_operator(5, 9, eps).unwrap();
            assert!(v.abs() < 1e-9, "affine field, eps = {eps}: got {v}");
        }
    }

    #[test]
    fn mcf_operator_constant_on_circles_of_equal_radius() {
        let f = ScalarField::from_fn(grid(33), 0.0, |x, y| x * x + y * y).unwrap();
        let g = f.grid().clone();
        let mut by_r2: Vec<(i64, f64)> = Vec::new();
        for (i, j) in g.interior(1) {
            let (x, y) = (g.x(i), g.y(j));
            let r2 = x * x + y * y;
            if r2 > 0.01 {
                by_r2.push((
                    (r2 / (g.h() * g.h())).round() as i64,
                    f.mcf_operator(i, j, 0.0).unwrap(),
                ));
            }
        }
        for (_, v) in by_r2 {
            assert!(
                (v - 2.0).abs() < 1e-9,
                "operator is exactly 2 on the paraboloid, got {v}"
            );
        }
    }

    #[test]
    fn gradient_term_monotone_in_eps() {
        let f = ScalarField::from_fn(grid(33), 0.0, |x, y| (x * x + y * y).sqrt().powi(3)).unwrap();
        let (i, j) = (22, 18);
        let lap = {
            let h = f.hessian_central(i, j).unwrap();
            h[0][0] + h[1][1]
        };
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let term = (lap - f.mcf_operator(i, j, eps).unwrap()).abs();
            assert!(
                term <= last + 1e-12,
                "gradient-direction term grows with eps"
            );
            last = term;
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.mcf");
        let f = ScalarField::from_fn(grid(9), 0.25, |x, y| x * y + 0.5).unwrap();
        f.write_snapshot(&path).unwrap();
        let g = ScalarField::read_snapshot(&path).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(f.time_tag(), g.time_tag());
        assert_eq!(f.grid().h(), g.grid().h());
        assert_eq!(f.grid().origin(), g.grid().origin());
    }

    #[test]
    fn snapshot_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.mcf");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(
            ScalarField::read_snapshot(&path),
            Err(McfError::Format(_))
        ));
    }

    #[test]
    fn space_time_field_validates_tags() {
        let g = grid(9);
        let f0 = ScalarField::from_fn(g.clone(), 0.0, |x, _| x).unwrap();
        let f1 = ScalarField::from_fn(g.clone(), 0.1, |x, _| x).unwrap();
        assert!(SpaceTimeField::new(vec![f0.clone(), f1.clone()], 0.1).is_ok());
        assert!(SpaceTimeField::new(vec![f0, f1], 0.2).is_err());
    }

    #[test]
    fn time_derivative_centered() {
        let g = grid(9);
        let u = SpaceTimeField::from_fn(g, 0.1, 5, |x, _, t| x + 3.0 * t * t).unwrap();
        let du = u.time_derivative(2).unwrap();
        // d/dt (3t²) at t = 0.2 is 1.2; centered difference is exact for quadratics in t.
        assert!((du.value(4, 4) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn interp_matches_bilinear() {
        let f = ScalarField::from_fn(grid(9), 0.0, |x, y| 2.0 * x - y).unwrap();
        // Bilinear interpolation is exact for affine functions.
        assert!((f.interp(0.3, -0.7) - (0.6 + 0.7)).abs() < 1e-12);
        let g = f.interp_gradient(0.3, -0.7);
        assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 1.0).abs() < 1e-12);
    }
}
