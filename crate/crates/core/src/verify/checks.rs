//! The residual checks themselves.
//!
//! Quadrature conventions: midpoint over cells for volume integrals,
//! arc-length-weighted vertex sums over contours for measure integrals,
//! trapezoid in time. Degenerate-gradient vertices are excluded from the
//! measure sums and their arc fraction is tracked.

use serde_json::{json, Value};

use super::family::{LevelFamily, LevelSeries};
use super::report::{json_f64, ReportEntry, VerificationReport};
use super::test_fn::{build_localization_fe, CheckBattery, TestFunction};
use super::{DEFAULT_TOLERANCE, DEGENERATE_FRACTION_LIMIT};
use crate::error::{McfError, Result};
use crate::field::{Grid2, SpaceTimeField};
use crate::geometry::{
    boundary_distance, curvature_on_contour, marching_squares, normals_on_contour, sublevel_set,
    velocity_on_existing_contour, ContourField,
};

/// Per-frame contour measurements of one level series.
struct FrameMeasure {
    v: ContourField<f64>,
    h: ContourField<f64>,
    nu: ContourField<[f64; 2]>,
    weights: Vec<Vec<f64>>,
    flagged_fraction: f64,
}

struct Measures {
    per_frame: Vec<Option<FrameMeasure>>,
}

fn compute_measures(u: &SpaceTimeField, series: &LevelSeries) -> Result<Measures> {
    let mut per_frame = Vec::with_capacity(series.sets.len());
    for (k, set) in series.sets.iter().enumerate() {
        if set.boundary().is_empty() {
            per_frame.push(None);
            continue;
        }
        let contour = set.boundary();
        let v = velocity_on_existing_contour(u, k, contour)?;
        let h = curvature_on_contour(u.frame(k), contour);
        let nu = normals_on_contour(u.frame(k), contour);
        let weights = contour.arc_weights();
        let flagged_fraction = v.flagged_fraction(contour);
        per_frame.push(Some(FrameMeasure {
            v,
            h,
            nu,
            weights,
            flagged_fraction,
        }));
    }
    Ok(Measures { per_frame })
}

fn trapz(vals: &[f64], dt: f64) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    dt * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[vals.len() - 1]))
}

/// Inclusive index box covering the spatial support of a test function.
fn spatial_box(f: &TestFunction, grid: &Grid2) -> (usize, usize, usize, usize) {
    let full = (0, grid.nx() - 1, 0, grid.ny() - 1);
    let bump = match f {
        TestFunction::Bump { profile, .. } => profile,
        TestFunction::Position { cutoff, .. } | TestFunction::Rotation { cutoff, .. } => cutoff,
        TestFunction::Scaled { inner, .. } => return spatial_box(inner, grid),
        TestFunction::Localization(_) => return full,
    };
    let o = grid.origin();
    let h = grid.h();
    let lo = |c: f64, org: f64| (((c - org) / h).floor().max(0.0)) as usize;
    let hi = |c: f64, org: f64, n: usize| (((c - org) / h).ceil() as usize).min(n - 1);
    (
        lo(bump.center[0] - bump.support_r, o[0]),
        hi(bump.center[0] + bump.support_r, o[0], grid.nx()),
        lo(bump.center[1] - bump.support_r, o[1]),
        hi(bump.center[1] + bump.support_r, o[1], grid.ny()),
    )
}

/// Ess-sup of the perimeter over the frames; passes when it stays within
/// 10% of the largest perimeter among the first three frames (perimeter
/// must not grow under the flow).
pub fn check_perimeter_bound(fam: &LevelFamily, s: f64) -> Result<ReportEntry> {
    let series = fam.series(s)?;
    let perims: Vec<f64> = series.sets.iter().map(|set| set.perimeter()).collect();
    let (mut sup, mut sup_at) = (0.0f64, 0usize);
    for (k, &p) in perims.iter().enumerate() {
        if p > sup {
            sup = p;
            sup_at = k;
        }
    }
    let baseline = perims.iter().take(3).cloned().fold(0.0f64, f64::max);
    let meta = json!({
        "sup": sup,
        "baseline": baseline,
        "t_sup": fam.time_of(sup_at),
    });
    Ok(ReportEntry::one_sided(
        "perimeter_bound",
        sup - baseline,
        baseline.max(1e-12),
        0.1,
        meta,
    ))
}

/// `∫∫ V² dμ dt`: passes when finite and no frame exceeds the
/// degenerate-vertex arc fraction limit.
pub fn check_velocity_l2(fam: &LevelFamily, s: f64) -> Result<ReportEntry> {
    let u = fam.require_source()?;
    let series = fam.series(s)?;
    let measures = compute_measures(u, series)?;
    velocity_l2_impl(fam, series, &measures)
}

fn velocity_l2_impl(
    fam: &LevelFamily,
    series: &LevelSeries,
    measures: &Measures,
) -> Result<ReportEntry> {
    let mut per_frame = Vec::with_capacity(series.sets.len());
    let mut worst_flag = 0.0f64;
    for (k, fm) in measures.per_frame.iter().enumerate() {
        match fm {
            None => per_frame.push(0.0),
            Some(m) => {
                worst_flag = worst_flag.max(m.flagged_fraction);
                per_frame.push(m.v.integrate(series.sets[k].boundary(), |v| v * v));
            }
        }
    }
    let total = trapz(&per_frame, fam.dt());
    let pass = total.is_finite() && worst_flag <= DEGENERATE_FRACTION_LIMIT;
    let meta = json!({
        "value": json_f64(total),
        "max_flagged_fraction": worst_flag,
    });
    Ok(ReportEntry::with_verdict(
        "velocity_l2",
        total,
        1.0,
        0.0,
        pass,
        meta,
    ))
}

/// Distributional velocity identity: for each ζ,
/// `∫∫_{Ω(t)} ∂_tζ = −∫ ζ V dμ dt − ∫_{Ω₀} ζ(·,0)`; the entry carries the
/// largest normalized mismatch over the battery.
pub fn residual_distributional_velocity(
    fam: &LevelFamily,
    s: f64,
    zetas: &[TestFunction],
) -> Result<ReportEntry> {
    let u = fam.require_source()?;
    let series = fam.series(s)?;
    let measures = compute_measures(u, series)?;
    dist_velocity_impl(fam, series, &measures, zetas)
}

fn dist_velocity_impl(
    fam: &LevelFamily,
    series: &LevelSeries,
    measures: &Measures,
    zetas: &[TestFunction],
) -> Result<ReportEntry> {
    let grid = fam.grid();
    let horizon = (series.sets.len() - 1) as f64 * fam.dt();
    let h2 = grid.h() * grid.h();
    let dt = fam.dt();
    let mut worst = 0.0f64;
    let mut per_zeta = Vec::new();
    for zeta in zetas {
        if zeta.is_vector() {
            return Err(McfError::InvalidTestFunction(
                "velocity identity takes scalar test functions".into(),
            ));
        }
        zeta.validate(grid, horizon)?;
        let (ilo, ihi, jlo, jhi) = spatial_box(zeta, grid);

        let mut lhs_frames = Vec::with_capacity(series.sets.len());
        let mut rhs_frames = Vec::with_capacity(series.sets.len());
        let mut scale_frames = Vec::with_capacity(series.sets.len());
        for (k, set) in series.sets.iter().enumerate() {
            let t = fam.time_of(k);
            let mut cell_sum = 0.0;
            let ind = set.indicator();
            for j in jlo..=jhi {
                for i in ilo..=ihi {
                    if ind.get(i, j) {
                        cell_sum += zeta.time_derivative(grid.x(i), grid.y(j), t);
                    }
                }
            }
            lhs_frames.push(cell_sum * h2);

            let (mut zv, mut zav) = (0.0, 0.0);
            if let Some(m) = &measures.per_frame[k] {
                let contour = set.boundary();
                for (ci, vi, p) in contour.vertices() {
                    if m.v.flagged[ci][vi] {
                        continue;
                    }
                    let z = zeta.value(p[0], p[1], t);
                    let w = m.weights[ci][vi];
                    zv += z * m.v.values[ci][vi] * w;
                    zav += z.abs() * m.v.values[ci][vi].abs() * w;
                }
            }
            rhs_frames.push(zv);
            scale_frames.push(zav);
        }
        let mut omega0 = 0.0;
        let ind0 = series.sets[0].indicator();
        for j in jlo..=jhi {
            for i in ilo..=ihi {
                if ind0.get(i, j) {
                    omega0 += zeta.value(grid.x(i), grid.y(j), 0.0);
                }
            }
        }
        omega0 *= h2;

        let lhs = trapz(&lhs_frames, dt);
        let rhs = -trapz(&rhs_frames, dt) - omega0;
        let scale = trapz(&scale_frames, dt) + omega0.abs() + 1e-12;
        let normalized = (lhs - rhs).abs() / scale;
        worst = worst.max(normalized);
        per_zeta.push(json!({
            "zeta": zeta.label(),
            "lhs": lhs,
            "rhs": rhs,
            "scale": scale,
            "normalized": normalized,
        }));
    }
    Ok(ReportEntry::two_sided(
        "dist_velocity",
        worst,
        1.0,
        DEFAULT_TOLERANCE,
        json!({ "per_function": per_zeta }),
    ))
}

/// Distributional curvature identity: for each vector field ξ,
/// `∫∫ (∇·ξ − ν·∇ξ ν) dμ dt = −∫∫ V ξ·ν dμ dt`.
pub fn residual_distributional_curvature(
    fam: &LevelFamily,
    s: f64,
    xis: &[TestFunction],
) -> Result<ReportEntry> {
    let u = fam.require_source()?;
    let series = fam.series(s)?;
    let measures = compute_measures(u, series)?;
    dist_curvature_impl(fam, series, &measures, xis)
}

fn dist_curvature_impl(
    fam: &LevelFamily,
    series: &LevelSeries,
    measures: &Measures,
    xis: &[TestFunction],
) -> Result<ReportEntry> {
    let grid = fam.grid();
    let horizon = (series.sets.len() - 1) as f64 * fam.dt();
    let dt = fam.dt();
    let mut worst = 0.0f64;
    let mut per_xi = Vec::new();
    for xi in xis {
        if !xi.is_vector() {
            return Err(McfError::InvalidTestFunction(
                "curvature identity takes vector test functions".into(),
            ));
        }
        xi.validate(grid, horizon)?;
        let mut lhs_frames = Vec::with_capacity(series.sets.len());
        let mut rhs_frames = Vec::with_capacity(series.sets.len());
        let mut scale_frames = Vec::with_capacity(series.sets.len());
        for (k, set) in series.sets.iter().enumerate() {
            let t = fam.time_of(k);
            let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
            if let Some(m) = &measures.per_frame[k] {
                let contour = set.boundary();
                for (ci, vi, p) in contour.vertices() {
                    if m.v.flagged[ci][vi] {
                        continue;
                    }
                    let w = m.weights[ci][vi];
                    let nu = m.nu.values[ci][vi];
                    let jac = xi.jacobian(p[0], p[1], t);
                    let div = jac[0][0] + jac[1][1];
                    let njn = nu[0] * (jac[0][0] * nu[0] + jac[0][1] * nu[1])
                        + nu[1] * (jac[1][0] * nu[0] + jac[1][1] * nu[1]);
                    let val = xi.vec(p[0], p[1], t);
                    let xin = val[0] * nu[0] + val[1] * nu[1];
                    let vv = m.v.values[ci][vi];
                    lhs += (div - njn) * w;
                    rhs += vv * xin * w;
                    let jac_norm = (jac[0][0] * jac[0][0]
                        + jac[0][1] * jac[0][1]
                        + jac[1][0] * jac[1][0]
                        + jac[1][1] * jac[1][1])
                        .sqrt();
                    scale += (vv.abs() * (val[0] * val[0] + val[1] * val[1]).sqrt() + jac_norm) * w;
                }
            }
            lhs_frames.push(lhs);
            rhs_frames.push(rhs);
            scale_frames.push(scale);
        }
        let lhs = trapz(&lhs_frames, dt);
        let rhs = -trapz(&rhs_frames, dt);
        let scale = trapz(&scale_frames, dt) + 1e-12;
        let normalized = (lhs - rhs).abs() / scale;
        worst = worst.max(normalized);
        per_xi.push(json!({
            "xi": xi.label(),
            "lhs": lhs,
            "rhs": rhs,
            "scale": scale,
            "normalized": normalized,
        }));
    }
    Ok(ReportEntry::two_sided(
        "dist_curvature",
        worst,
        1.0,
        DEFAULT_TOLERANCE,
        json!({ "per_function": per_xi }),
    ))
}

/// Brakke inequality over `[t1, t2]` (snapped to frames) for one
/// nonnegative test function:
/// `∫f dμ(t₂) + ∫∫(|H̄|²f + H̄·∇f − ∂_tf) dμ dt ≤ ∫f dμ(t₁)`.
/// One-sided: sudden mass loss passes, mass creation fails.
pub fn brakke_residual(
    fam: &LevelFamily,
    s: f64,
    f: &TestFunction,
    t1: f64,
    t2: f64,
) -> Result<ReportEntry> {
    let u = fam.require_source()?;
    let series = fam.series(s)?;
    let measures = compute_measures(u, series)?;
    let (residual, scale, meta) = brakke_impl(fam, series, &measures, f, t1, t2)?;
    Ok(ReportEntry::one_sided(
        "brakke",
        residual,
        scale,
        DEFAULT_TOLERANCE,
        meta,
    ))
}

fn brakke_impl(
    fam: &LevelFamily,
    series: &LevelSeries,
    measures: &Measures,
    f: &TestFunction,
    t1: f64,
    t2: f64,
) -> Result<(f64, f64, Value)> {
    if !f.is_nonnegative() {
        return Err(McfError::InvalidTestFunction(
            "Brakke test functions must be nonnegative".into(),
        ));
    }
    let dt = fam.dt();
    let n = series.sets.len();
    let k1 = (t1 / dt).round() as usize;
    let k2 = (t2 / dt).round() as usize;
    if k1 >= k2 || k2 >= n {
        return Err(McfError::InvalidArgument(format!(
            "Brakke window [{t1}, {t2}] does not fit the {n} frames at dt = {dt}"
        )));
    }
    let mass = |k: usize| -> f64 {
        match &measures.per_frame[k] {
            None => 0.0,
            Some(m) => {
                let contour = series.sets[k].boundary();
                let t = fam.time_of(k);
                contour
                    .vertices()
                    .filter(|&(ci, vi, _)| !m.v.flagged[ci][vi])
                    .map(|(ci, vi, p)| f.value(p[0], p[1], t) * m.weights[ci][vi])
                    .sum()
            }
        }
    };
    let mut diss_frames = Vec::with_capacity(k2 - k1 + 1);
    let mut h2f_frames = Vec::with_capacity(k2 - k1 + 1);
    for k in k1..=k2 {
        let t = fam.time_of(k);
        let (mut diss, mut h2f) = (0.0, 0.0);
        if let Some(m) = &measures.per_frame[k] {
            let contour = series.sets[k].boundary();
            for (ci, vi, p) in contour.vertices() {
                if m.v.flagged[ci][vi] {
                    continue;
                }
                let w = m.weights[ci][vi];
                let curv = m.h.values[ci][vi];
                let nu = m.nu.values[ci][vi];
                let grad_f = f.grad(p[0], p[1], t);
                // First-variation representative H̄ = +H·ν (outward for a
                // shrinking circle); the flow moves with V⃗ = −H̄.
                let hdotgrad = curv * (nu[0] * grad_f[0] + nu[1] * grad_f[1]);
                let fval = f.value(p[0], p[1], t);
                diss += (curv * curv * fval + hdotgrad - f.time_derivative(p[0], p[1], t)) * w;
                h2f += curv * curv * fval * w;
            }
        }
        diss_frames.push(diss);
        h2f_frames.push(h2f);
    }
    let mass1 = mass(k1);
    let mass2 = mass(k2);
    let dissipation = trapz(&diss_frames, dt);
    let residual = mass2 + dissipation - mass1;
    let scale = mass1 + trapz(&h2f_frames, dt) + 1e-12;
    let meta = json!({
        "f": f.label(),
        "t1": fam.time_of(k1),
        "t2": fam.time_of(k2),
        "mass_t1": mass1,
        "mass_t2": mass2,
        "dissipation": dissipation,
    });
    Ok((residual, scale, meta))
}

/// Avoidance: the boundary distance between two evolutions never falls more
/// than 2h below its initial value, until either set vanishes.
pub fn check_avoidance(a: &LevelSeries, b: &LevelSeries, h: f64, dt: f64) -> ReportEntry {
    let n = a.sets.len().min(b.sets.len());
    let d0 = boundary_distance(a.sets[0].boundary(), b.sets[0].boundary());
    if !d0.is_finite() || d0 <= 0.0 {
        return ReportEntry::skipped("avoidance", "boundaries initially empty or intersecting");
    }
    let mut min_d = f64::INFINITY;
    let mut min_at = 0usize;
    let mut checked = 0usize;
    for k in 0..n {
        if a.sets[k].boundary().is_empty() || b.sets[k].boundary().is_empty() {
            break;
        }
        let d = boundary_distance(a.sets[k].boundary(), b.sets[k].boundary());
        if d < min_d {
            min_d = d;
            min_at = k;
        }
        checked += 1;
    }
    let meta = json!({
        "d0": d0,
        "min_distance": json_f64(min_d),
        "t_min": min_at as f64 * dt,
        "frames_checked": checked,
    });
    ReportEntry::one_sided("avoidance", d0 - min_d, 1.0, 2.0 * h, meta)
}

/// Discrete comparison: ordered initial data stay ordered nodewise at every
/// frame, with zero tolerance.
pub fn check_comparison(ua: &SpaceTimeField, ub: &SpaceTimeField) -> Result<ReportEntry> {
    if ua.grid() != ub.grid() || ua.n_frames() != ub.n_frames() {
        return Err(McfError::GridMismatch(
            "comparison needs matching runs".into(),
        ));
    }
    let initial_ok = ua
        .frame(0)
        .values()
        .iter()
        .zip(ub.frame(0).values())
        .all(|(a, b)| a <= b);
    if !initial_ok {
        return Ok(ReportEntry::skipped(
            "comparison",
            "initial data are not ordered",
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_frame = 0usize;
    for (k, (fa, fb)) in ua.frames().iter().zip(ub.frames()).enumerate() {
        for (a, b) in fa.values().iter().zip(fb.values()) {
            if a - b > worst {
                worst = a - b;
                worst_frame = k;
            }
        }
    }
    let range = ua.frame(0).range().max(1e-12);
    let meta = json!({
        "worst_violation": worst,
        "t_worst": ua.frame(worst_frame).time_tag(),
    });
    Ok(ReportEntry::with_verdict(
        "comparison",
        worst.max(0.0),
        range,
        0.0,
        worst <= 0.0,
        meta,
    ))
}

#[derive(Debug, Clone, serde::Serialize)]
struct L1Jump {
    lag: f64,
    t: f64,
    magnitude: f64,
    median: f64,
}

/// L¹ modulus of continuity: `m(lag) = max_t |Ω(t+lag) Δ Ω(t)|` over dyadic
/// lags, fitted exponent of `log m` vs `log lag`, and single-lag jump
/// detection (a lag value more than 10× the median over t).
pub fn l1_continuity_modulus(fam: &LevelFamily, s: f64) -> Result<ReportEntry> {
    let series = fam.series(s)?;
    let n = series.sets.len();
    if n < 8 {
        return Err(McfError::InsufficientData(format!(
            "L¹ modulus needs ≥ 8 frames, have {n}"
        )));
    }
    let dt = fam.dt();
    let mut lags = Vec::new();
    let mut lag = 1usize;
    while lag <= (n - 1) / 2 {
        lags.push(lag);
        lag *= 2;
    }
    let mut m_per_lag = Vec::new();
    let mut jumps: Vec<L1Jump> = Vec::new();
    for &lag in &lags {
        let mut vals = Vec::new();
        for t in 0..n - lag {
            // Pairs entirely past extinction carry no continuity signal.
            if series.sets[t].is_empty() && series.sets[t + lag].is_empty() {
                continue;
            }
            let d = crate::geometry::sym_diff_area(&series.sets[t], &series.sets[t + lag])?;
            vals.push((t, d));
        }
        if vals.is_empty() {
            m_per_lag.push((lag as f64 * dt, 0.0));
            continue;
        }
        let (t_max, m) =
            vals.iter().cloned().fold(
                (0usize, 0.0f64),
                |acc, (t, d)| if d > acc.1 { (t, d) } else { acc },
            );
        let mut sorted: Vec<f64> = vals.iter().map(|&(_, d)| d).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        if m > 10.0 * median && m > 0.0 {
            jumps.push(L1Jump {
                lag: lag as f64 * dt,
                t: (t_max + lag) as f64 * dt,
                magnitude: m,
                median,
            });
        }
        m_per_lag.push((lag as f64 * dt, m));
    }
    // Least-squares slope of log m against log lag over nonzero entries.
    let pts: Vec<(f64, f64)> = m_per_lag
        .iter()
        .filter(|&&(_, m)| m > 0.0)
        .map(|&(l, m)| (l.ln(), m.ln()))
        .collect();
    let exponent = if pts.len() < 2 {
        // Stationary family: m ≡ 0 is perfectly continuous.
        1.0
    } else {
        let nn = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (nn * sxy - sx * sy) / (nn * sxx - sx * sx)
    };
    let pass = exponent >= 0.45 && jumps.is_empty();
    let meta = json!({
        "exponent": exponent,
        "m_per_lag": m_per_lag,
        "jumps": serde_json::to_value(&jumps).unwrap(),
    });
    Ok(ReportEntry::with_verdict(
        "l1_continuity",
        exponent,
        1.0,
        0.45,
        pass,
        meta,
    ))
}

/// Fattening detector: fit `A(δ) = |Ω_{s+δ} \ Ω_{s−δ}|` linearly in δ and
/// extrapolate to δ → 0; an intercept above `10·h·P(Σ_s(t))` flags a level
/// set of positive measure.
pub fn detect_fattening(u: &SpaceTimeField, s: f64, t: f64, deltas: &[f64]) -> Result<ReportEntry> {
    if deltas.len() < 2 {
        return Err(McfError::InvalidArgument("need ≥ 2 delta values".into()));
    }
    for pair in deltas.windows(2) {
        if pair[1] >= pair[0] {
            return Err(McfError::InvalidArgument(
                "deltas must decrease toward 0".into(),
            ));
        }
    }
    if *deltas.last().unwrap() <= 0.0 {
        return Err(McfError::InvalidArgument(
            "deltas must stay positive".into(),
        ));
    }
    let k = u.frame_index_at(t)?;
    let frame = u.frame(k);
    let grid = frame.grid();
    let h = grid.h();
    let contour = marching_squares(frame, s);
    let perimeter = contour.perimeter();
    // Local Lipschitz bound: the largest gradient on the level set itself.
    let mut lip: f64 = 0.0;
    for (_, _, p) in contour.vertices() {
        let g = frame.interp_gradient(p[0], p[1]);
        lip = lip.max((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    let delta_min = *deltas.last().unwrap();
    if lip > 0.0 && delta_min <= 2.0 * h * lip {
        return Err(McfError::InvalidArgument(format!(
            "smallest delta {delta_min} is below the resolvable band 2·h·Lip = {}",
            2.0 * h * lip
        )));
    }
    let areas: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let hi = sublevel_set(frame, s + d);
            let lo = sublevel_set(frame, s - d);
            hi.area() - lo.area()
        })
        .collect();
    // Least-squares line A(δ) = intercept + slope·δ.
    let nn = deltas.len() as f64;
    let sx: f64 = deltas.iter().sum();
    let sy: f64 = areas.iter().sum();
    let sxx: f64 = deltas.iter().map(|d| d * d).sum();
    let sxy: f64 = deltas.iter().zip(&areas).map(|(d, a)| d * a).sum();
    let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nn;
    let threshold = 10.0 * h * perimeter;
    let fattening = intercept > threshold;
    let meta = json!({
        "intercept": intercept,
        "slope": slope,
        "threshold": threshold,
        "perimeter": perimeter,
        "lip": lip,
        "deltas": deltas,
        "areas": areas,
        "time": u.frame(k).time_tag(),
    });
    // Pass means: no fattening detected at this (s, t).
    Ok(ReportEntry::with_verdict(
        "fattening",
        intercept,
        threshold.max(1e-12),
        1.0,
        !fattening,
        meta,
    ))
}

/// Aggregate verdict of one level: perimeter bound, L² velocity, both
/// distributional identities, Brakke over the battery (bumps plus f_E
/// localizations of the initial set), and L¹ continuity. The level is
/// "variational" when every check passes.
pub fn verify_variational(
    fam: &LevelFamily,
    s: f64,
    battery: &CheckBattery,
) -> Result<VerificationReport> {
    let u = fam.require_source()?;
    let series = fam.series(s)?;
    let measures = compute_measures(u, series)?;
    let mut checks = vec![
        check_perimeter_bound(fam, s)?,
        velocity_l2_impl(fam, series, &measures)?,
        dist_velocity_impl(fam, series, &measures, &battery.zetas)?,
        dist_curvature_impl(fam, series, &measures, &battery.xis)?,
    ];

    // Brakke over the nonnegative battery plus the localization functions
    // of the initial sub-level set.
    let h = fam.grid().h();
    let mut brakke_fns: Vec<TestFunction> = battery.zetas.clone();
    let mut fe_notes = Vec::new();
    for c1_cells in [6.0, 12.0] {
        let c1 = c1_cells * h;
        match build_localization_fe(&series.sets[0], c1, c1 / 6.0) {
            Ok(fe) => brakke_fns.push(fe),
            Err(err) => fe_notes.push(format!("f_E(c1={c1:.4}) skipped: {err}")),
        }
    }
    let (t1, t2) = battery.brakke_window;
    let mut worst = f64::NEG_INFINITY;
    let mut per_f = Vec::new();
    for f in &brakke_fns {
        let (residual, scale, meta) = brakke_impl(fam, series, &measures, f, t1, t2)?;
        let normalized = residual / scale;
        if normalized > worst {
            worst = normalized;
        }
        per_f.push(json!({ "meta": meta, "normalized": normalized }));
    }
    checks.push(ReportEntry::one_sided(
        "brakke",
        worst,
        1.0,
        DEFAULT_TOLERANCE,
        json!({ "per_function": per_f, "skipped_localizations": fe_notes }),
    ));

    checks.push(l1_continuity_modulus(fam, s)?);

    let all_pass = checks.iter().all(|c| c.passed());
    Ok(VerificationReport {
        level: s,
        checks,
        verdict: if all_pass {
            "variational".into()
        } else {
            "not_variational".into()
        },
    })
}
