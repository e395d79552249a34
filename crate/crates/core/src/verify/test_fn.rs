//! Test functions for the integral identities: radial space-time bumps,
//! position/rotation vector fields, and grid-backed localization functions
//! built from a set's interior distance function.

use crate::error::{McfError, Result};
use crate::field::{Grid2, ScalarField};
use crate::geometry::FinitePerimeterSet;
use crate::initial_data::smoothstep;

fn smoothstep_dt(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Radial profile: 1 inside `plateau_r`, quintic falloff to 0 at
/// `support_r`.
#[derive(Debug, Clone)]
pub struct RadialBump {
    pub center: [f64; 2],
    pub plateau_r: f64,
    pub support_r: f64,
}

impl RadialBump {
    fn chi(&self, x: f64, y: f64) -> f64 {
        let r = ((x - self.center[0]).powi(2) + (y - self.center[1]).powi(2)).sqrt();
        1.0 - smoothstep((r - self.plateau_r) / (self.support_r - self.plateau_r))
    }

    fn chi_grad(&self, x: f64, y: f64) -> [f64; 2] {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let r = (dx * dx + dy * dy).sqrt();
        let w = self.support_r - self.plateau_r;
        if r <= self.plateau_r || r >= self.support_r || r == 0.0 {
            return [0.0, 0.0];
        }
        let dchi = -smoothstep_dt((r - self.plateau_r) / w) / w;
        [dchi * dx / r, dchi * dy / r]
    }
}

/// Temporal window: 0 before `t_on`, quintic rise to 1 by `t_rise`, 1 until
/// `t_fall`, quintic fall to 0 at `t_off`. `t_on == t_rise` starts the
/// window at full height (admissible at t = 0).
#[derive(Debug, Clone)]
pub struct TimeWindow {
    pub t_on: f64,
    pub t_rise: f64,
    pub t_fall: f64,
    pub t_off: f64,
}

impl TimeWindow {
    /// Window that is already 1 at t = 0 and falls over `[t_fall, t_off]`.
    pub fn from_start(t_fall: f64, t_off: f64) -> TimeWindow {
        TimeWindow {
            t_on: 0.0,
            t_rise: 0.0,
            t_fall,
            t_off,
        }
    }

    /// Window compactly supported inside (0, horizon).
    pub fn interior(t_on: f64, t_rise: f64, t_fall: f64, t_off: f64) -> TimeWindow {
        TimeWindow {
            t_on,
            t_rise,
            t_fall,
            t_off,
        }
    }

    pub fn eta(&self, t: f64) -> f64 {
        if t < self.t_on || t > self.t_off {
            0.0
        } else if t < self.t_rise {
            smoothstep((t - self.t_on) / (self.t_rise - self.t_on))
        } else if t <= self.t_fall {
            1.0
        } else {
            1.0 - smoothstep((t - self.t_fall) / (self.t_off - self.t_fall))
        }
    }

    pub fn eta_dt(&self, t: f64) -> f64 {
        if t < self.t_on || t > self.t_off {
            0.0
        } else if t < self.t_rise {
            let w = self.t_rise - self.t_on;
            smoothstep_dt((t - self.t_on) / w) / w
        } else if t <= self.t_fall {
            0.0
        } else {
            let w = self.t_off - self.t_fall;
            -smoothstep_dt((t - self.t_fall) / w) / w
        }
    }
}

/// Static nonnegative localization function of a set: 0 outside, 1 deep
/// inside, C¹ ramp through the mollified interior shells. Backed by the
/// mollified interior distance; the ramp profile is applied at query time
/// so values and gradients keep the accuracy of the distance field.
#[derive(Debug, Clone)]
pub struct LocalizationField {
    dist: ScalarField,
    pub c1: f64,
}

impl LocalizationField {
    fn ramp(&self, d: f64) -> f64 {
        smoothstep((d - 0.25 * self.c1) / (0.70 * self.c1))
    }

    fn ramp_dt(&self, d: f64) -> f64 {
        smoothstep_dt((d - 0.25 * self.c1) / (0.70 * self.c1)) / (0.70 * self.c1)
    }

    fn value_at(&self, x: f64, y: f64) -> f64 {
        self.ramp(self.dist.interp(x, y))
    }

    fn grad_at(&self, x: f64, y: f64) -> [f64; 2] {
        let d = self.dist.interp(x, y);
        let slope = self.ramp_dt(d);
        if slope == 0.0 {
            return [0.0, 0.0];
        }
        let g = self.dist.interp_gradient(x, y);
        [slope * g[0], slope * g[1]]
    }
}

/// Compactly supported test function.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// Scalar space-time bump `ζ(x, t) = χ(|x − c|) · η(t)`.
    Bump {
        profile: RadialBump,
        window: TimeWindow,
    },
    /// Position field `ξ(x, t) = x · χ(|x|) · η(t)`.
    Position {
        cutoff: RadialBump,
        window: TimeWindow,
    },
    /// Rotation field `ξ(x, t) = (−x₂, x₁) · χ(|x|) · η(t)`, tangential to
    /// circles around the origin.
    Rotation {
        cutoff: RadialBump,
        window: TimeWindow,
    },
    /// Grid-backed localization `f_E` (time-independent).
    Localization(LocalizationField),
    /// A positively scaled copy of another test function; residual
    /// normalization must make verdicts invariant under this.
    Scaled {
        inner: Box<TestFunction>,
        factor: f64,
    },
}

impl TestFunction {
    pub fn is_vector(&self) -> bool {
        match self {
            TestFunction::Position { .. } | TestFunction::Rotation { .. } => true,
            TestFunction::Scaled { inner, .. } => inner.is_vector(),
            _ => false,
        }
    }

    /// Nonnegative everywhere (admissible as a Brakke test function).
    pub fn is_nonnegative(&self) -> bool {
        match self {
            TestFunction::Bump { .. } | TestFunction::Localization(_) => true,
            TestFunction::Scaled { inner, factor } => *factor >= 0.0 && inner.is_nonnegative(),
            _ => false,
        }
    }

    /// Positively scaled copy.
    pub fn scaled(self, factor: f64) -> TestFunction {
        TestFunction::Scaled {
            inner: Box::new(self),
            factor,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Bump { profile, .. } => format!(
                "bump(c=({:.3},{:.3}),r={:.3})",
                profile.center[0], profile.center[1], profile.support_r
            ),
            TestFunction::Position { .. } => "position".into(),
            TestFunction::Rotation { .. } => "rotation".into(),
            TestFunction::Localization(f) => format!("f_E(c1={:.4})", f.c1),
            TestFunction::Scaled { inner, factor } => format!("{factor}x {}", inner.label()),
        }
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            TestFunction::Bump { profile, window } => profile.chi(x, y) * window.eta(t),
            TestFunction::Localization(f) => f.value_at(x, y),
            TestFunction::Scaled { inner, factor } => factor * inner.value(x, y, t),
            _ => 0.0,
        }
    }

    pub fn grad(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        match self {
            TestFunction::Bump { profile, window } => {
                let g = profile.chi_grad(x, y);
                let eta = window.eta(t);
                [g[0] * eta, g[1] * eta]
            }
            TestFunction::Localization(f) => f.grad_at(x, y),
            TestFunction::Scaled { inner, factor } => {
                let g = inner.grad(x, y, t);
                [factor * g[0], factor * g[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    pub fn time_derivative(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            TestFunction::Bump { profile, window } => profile.chi(x, y) * window.eta_dt(t),
            TestFunction::Localization(_) => 0.0,
            TestFunction::Scaled { inner, factor } => factor * inner.time_derivative(x, y, t),
            _ => 0.0,
        }
    }

    pub fn vec(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        match self {
            TestFunction::Position { cutoff, window } => {
                let a = cutoff.chi(x, y) * window.eta(t);
                [x * a, y * a]
            }
            TestFunction::Rotation { cutoff, window } => {
                let a = cutoff.chi(x, y) * window.eta(t);
                [-y * a, x * a]
            }
            TestFunction::Scaled { inner, factor } => {
                let v = inner.vec(x, y, t);
                [factor * v[0], factor * v[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    pub fn jacobian(&self, x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
        match self {
            TestFunction::Position { cutoff, window } => {
                let eta = window.eta(t);
                let chi = cutoff.chi(x, y);
                let g = cutoff.chi_grad(x, y);
                [
                    [eta * (chi + x * g[0]), eta * x * g[1]],
                    [eta * y * g[0], eta * (chi + y * g[1])],
                ]
            }
            TestFunction::Rotation { cutoff, window } => {
                let eta = window.eta(t);
                let chi = cutoff.chi(x, y);
                let g = cutoff.chi_grad(x, y);
                [
                    [eta * (-y * g[0]), eta * (-chi - y * g[1])],
                    [eta * (chi + x * g[0]), eta * x * g[1]],
                ]
            }
            TestFunction::Scaled { inner, factor } => {
                let j = inner.jacobian(x, y, t);
                [
                    [factor * j[0][0], factor * j[0][1]],
                    [factor * j[1][0], factor * j[1][1]],
                ]
            }
            _ => [[0.0, 0.0], [0.0, 0.0]],
        }
    }

    /// Admissibility: spatial support strictly inside the grid, temporal
    /// support inside `[0, horizon)` (and inside `(0, horizon)` for vector
    /// fields).
    pub fn validate(&self, grid: &Grid2, horizon: f64) -> Result<()> {
        let margin = 2.0 * grid.h();
        let o = grid.origin();
        let hi = [
            o[0] + grid.h() * (grid.nx() - 1) as f64,
            o[1] + grid.h() * (grid.ny() - 1) as f64,
        ];
        let check_bump = |b: &RadialBump| -> Result<()> {
            if !(b.plateau_r >= 0.0 && b.support_r > b.plateau_r) {
                return Err(McfError::InvalidTestFunction(format!(
                    "bad radii: plateau {}, support {}",
                    b.plateau_r, b.support_r
                )));
            }
            for ax in 0..2 {
                if b.center[ax] - b.support_r < o[ax] + margin
                    || b.center[ax] + b.support_r > hi[ax] - margin
                {
                    return Err(McfError::InvalidTestFunction(
                        "support touching the grid boundary".into(),
                    ));
                }
            }
            Ok(())
        };
        let check_window = |w: &TimeWindow, open_left: bool| -> Result<()> {
            if w.t_off >= horizon {
                return Err(McfError::InvalidTestFunction(format!(
                    "window end {} reaches the horizon {horizon}",
                    w.t_off
                )));
            }
            if open_left && w.t_on <= 0.0 {
                return Err(McfError::InvalidTestFunction(
                    "vector-field window must vanish at t = 0".into(),
                ));
            }
            Ok(())
        };
        match self {
            TestFunction::Bump { profile, window } => {
                check_bump(profile)?;
                check_window(window, false)
            }
            TestFunction::Position { cutoff, window }
            | TestFunction::Rotation { cutoff, window } => {
                check_bump(cutoff)?;
                check_window(window, true)
            }
            TestFunction::Localization(_) => Ok(()),
            TestFunction::Scaled { inner, factor } => {
                if !factor.is_finite() || *factor <= 0.0 {
                    return Err(McfError::InvalidTestFunction(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
                inner.validate(grid, horizon)
            }
        }
    }
}

/// Chamfer distance (weights h, h√2) from each set node to the set
/// boundary; 0 on non-set nodes. Overestimates by at most ~8%.
fn interior_distance(set: &FinitePerimeterSet) -> Vec<f64> {
    let grid = set.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let ind = set.indicator();
    let mut d = vec![0.0f64; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if ind.get(i, j) {
                let mut seed = f64::INFINITY;
                for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    let outside = ii < 0
                        || jj < 0
                        || ii as usize >= nx
                        || jj as usize >= ny
                        || !ind.get(ii as usize, jj as usize);
                    if outside {
                        seed = seed.min(0.5 * h);
                    }
                }
                d[grid.idx(i, j)] = seed;
            }
        }
    }
    let diag = h * std::f64::consts::SQRT_2;
    // Forward and backward chamfer sweeps.
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.idx(i, j);
            if d[k] == 0.0 {
                continue;
            }
            let mut best = d[k];
            if i > 0 {
                best = best.min(d[grid.idx(i - 1, j)] + h);
            }
            if j > 0 {
                best = best.min(d[grid.idx(i, j - 1)] + h);
                if i > 0 {
                    best = best.min(d[grid.idx(i - 1, j - 1)] + diag);
                }
                if i + 1 < nx {
                    best = best.min(d[grid.idx(i + 1, j - 1)] + diag);
                }
            }
            d[k] = best;
        }
    }
    for j in (0..ny).rev() {
        for i in (0..nx).rev() {
            let k = grid.idx(i, j);
            if d[k] == 0.0 {
                continue;
            }
            let mut best = d[k];
            if i + 1 < nx {
                best = best.min(d[grid.idx(i + 1, j)] + h);
            }
            if j + 1 < ny {
                best = best.min(d[grid.idx(i, j + 1)] + h);
                if i + 1 < nx {
                    best = best.min(d[grid.idx(i + 1, j + 1)] + diag);
                }
                if i > 0 {
                    best = best.min(d[grid.idx(i - 1, j + 1)] + diag);
                }
            }
            d[k] = best;
        }
    }
    d
}

/// Localization function of a set: 0 on the complement, 1 where the
/// interior distance exceeds c1, and a C² monotone ramp of the interior
/// distance through the shells at c1/3 and 2c1/3 (rise over
/// `[c1/4, 0.95·c1]`, so `|∇f| ≤ 2.68/c1 ≤ 3/c1`). The distance is exact
/// near the ramp (point-to-polyline, chamfer elsewhere) and mollified with
/// a C² kernel of radius `moll ∈ (0, c1/6]`.
pub fn build_localization_fe(set: &FinitePerimeterSet, c1: f64, moll: f64) -> Result<TestFunction> {
    let grid = set.grid().clone();
    let h = grid.h();
    if set.is_empty() {
        return Err(McfError::Construction(
            "localization of an empty set".into(),
        ));
    }
    if c1 <= 4.0 * h || c1.is_nan() {
        return Err(McfError::InvalidArgument(format!(
            "c1 = {c1} must exceed 4h = {}",
            4.0 * h
        )));
    }
    if !(moll > 0.0 && moll <= c1 / 6.0) {
        return Err(McfError::InvalidArgument(format!(
            "moll = {moll} must lie in (0, c1/6 = {}]",
            c1 / 6.0
        )));
    }
    let mut d = interior_distance(set);
    // Exact point-to-segment refinement where the ramp lives; the chamfer
    // value (≤ 8% high) is good enough to select the band.
    let segments: Vec<([f64; 2], [f64; 2])> = set
        .boundary()
        .components()
        .iter()
        .flat_map(|comp| comp.windows(2).map(|w| (w[0], w[1])))
        .collect();
    let band = 1.3 * c1 + 2.0 * h;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            if d[k] == 0.0 || d[k] > band {
                continue;
            }
            let p = [grid.x(i), grid.y(j)];
            let mut best = f64::INFINITY;
            for &(a, b) in &segments {
                let ab = [b[0] - a[0], b[1] - a[1]];
                let len2 = ab[0] * ab[0] + ab[1] * ab[1];
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
                };
                let dx = p[0] - a[0] - t * ab[0];
                let dy = p[1] - a[1] - t * ab[1];
                best = best.min(dx * dx + dy * dy);
            }
            d[k] = best.sqrt();
        }
    }
    if !d.iter().any(|&v| v > c1) {
        return Err(McfError::Construction(format!(
            "set too thin for c1 = {c1}: no interior point is that deep"
        )));
    }

    // Mollify the distance with a C² polynomial kernel; 1-Lipschitz is
    // preserved, so the ramp slope bound survives.
    let m = (moll / h).floor().max(1.0) as i64;
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut weights = Vec::new();
    for dj in -m..=m {
        for di in -m..=m {
            let r = ((di * di + dj * dj) as f64).sqrt() * h;
            if r <= moll.max(h) {
                let q = 1.0 - (r / moll.max(h)).powi(2);
                weights.push((di, dj, (q * q * q).max(0.0)));
            }
        }
    }
    let wsum: f64 = weights.iter().map(|w| w.2).sum();
    let mut values = vec![0.0f64; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for &(di, dj, w) in &weights {
                let ii = (i as i64 + di).clamp(0, nx as i64 - 1) as usize;
                let jj = (j as i64 + dj).clamp(0, ny as i64 - 1) as usize;
                acc += w * d[grid.idx(ii, jj)];
            }
            values[grid.idx(i, j)] = acc / wsum;
        }
    }
    let dist = ScalarField::from_values(grid.clone(), 0.0, values)?;
    let field = LocalizationField { dist, c1 };

    // Numerical verification of 0 ≤ f ≤ 1 and the gradient bound.
    let mut max_grad = 0.0f64;
    for (i, j) in grid.interior(1) {
        let p = [grid.x(i), grid.y(j)];
        let v = field.value_at(p[0], p[1]);
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(McfError::Construction("localization left [0, 1]".into()));
        }
        let g = field.grad_at(p[0], p[1]);
        max_grad = max_grad.max((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    if max_grad > 3.0 / c1 {
        return Err(McfError::Construction(format!(
            "localization gradient {max_grad} exceeds 3/c1 = {}",
            3.0 / c1
        )));
    }
    Ok(TestFunction::Localization(field))
}

/// The deterministic test-function battery: 12 radial space-time bumps
/// (3 scales × 4 centers), the position field and one rotation field.
/// Localization functions are added per level by the aggregate check.
#[derive(Debug, Clone)]
pub struct CheckBattery {
    pub zetas: Vec<TestFunction>,
    pub xis: Vec<TestFunction>,
    /// Time window for Brakke checks, snapped to frames by the caller.
    pub brakke_window: (f64, f64),
}

/// Build the standard battery for a grid and horizon.
pub fn standard_battery(grid: &Grid2, horizon: f64) -> CheckBattery {
    let r = grid.r_dom();
    let margin = 3.0 * grid.h();
    let q = 0.3 * r;
    let zeta_window = TimeWindow::from_start(0.70 * horizon, 0.85 * horizon);
    let centers = [[0.0, 0.0], [q, 0.0], [0.0, q], [-0.7 * q, -0.7 * q]];
    let mut zetas = Vec::with_capacity(12);
    for c in centers {
        let free = (r - c[0].abs()).min(r - c[1].abs()) - margin;
        for frac in [0.35, 0.6, 0.85] {
            let support = frac * free;
            zetas.push(TestFunction::Bump {
                profile: RadialBump {
                    center: c,
                    plateau_r: 0.55 * support,
                    support_r: support,
                },
                window: zeta_window.clone(),
            });
        }
    }
    let xi_window = TimeWindow::interior(
        0.05 * horizon,
        0.15 * horizon,
        0.70 * horizon,
        0.85 * horizon,
    );
    let cutoff = RadialBump {
        center: [0.0, 0.0],
        plateau_r: 0.60 * (r - margin),
        support_r: r - margin,
    };
    let xis = vec![
        TestFunction::Position {
            cutoff: cutoff.clone(),
            window: xi_window.clone(),
        },
        TestFunction::Rotation {
            cutoff,
            window: xi_window,
        },
    ];
    CheckBattery {
        zetas,
        xis,
        brakke_window: (0.0, 0.85 * horizon),
    }
}
