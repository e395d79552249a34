//! The evolve / verify / reconstruct subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde_json::json;

use mcflab_core::error::McfError;
use mcflab_core::field::SpaceTimeField;
use mcflab_core::geometry::{contour_to_csv, curvature_on_contour, marching_squares};
use mcflab_core::initial_data::{build_datum, two_circles_datum, DatumSpec};
use mcflab_core::reconstruct::{
    check_level_consistency, layer_cake, repair_nesting, sup_norm_distance, LayerCakeParams,
};
use mcflab_core::solver::{check_viscosity_inequalities, evolve};
use mcflab_core::verify::{
    check_avoidance, check_comparison, detect_fattening, standard_battery, verify_variational,
    LevelFamily, ReportEntry, VerificationReport,
};

use crate::config::RunConfig;
use crate::run_io::{load_frames, load_manifest, manifest_path, write_frames, Manifest};
use crate::svg::{LineChart, Series};

/// Exit codes: 0 pass, 1 some checks fail, 2 solver error, 3 I/O,
/// 4 missing data, 5 nesting violation.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if let Some(core) = err.downcast_ref::<McfError>() {
        return match core {
            McfError::NestingViolation { .. } => 5,
            McfError::Io(_) | McfError::Format(_) => 3,
            McfError::InsufficientData(_) => 4,
            _ => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    let text = err.to_string();
    if text.contains("missing manifest")
        || text.contains("missing frame")
        || text.contains("missing family")
    {
        4
    } else if text.contains("config") || text.contains("reading") || text.contains("parsing") {
        3
    } else {
        2
    }
}

pub fn cmd_evolve(config_path: &Path) -> anyhow::Result<()> {
    let config = RunConfig::load(config_path)?;
    let grid = config.grid.build()?;
    let started = Instant::now();

    let fields: Vec<(String, SpaceTimeField)> = match &config.datum {
        DatumSpec::TwoCircles { r1, r2, separation } => {
            let (a, b) = two_circles_datum(*r1, *r2, *separation, &grid)?;
            vec![
                ("frames_a".to_string(), evolve(&a, &config.solver)?),
                ("frames_b".to_string(), evolve(&b, &config.solver)?),
            ]
        }
        spec => {
            let g = build_datum(spec, &grid)?;
            vec![("frames".to_string(), evolve(&g, &config.solver)?)]
        }
    };

    std::fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating output directory {}", config.out_dir.display()))?;
    let mut field_frames = Vec::new();
    for (sub, u) in &fields {
        field_frames.push(write_frames(&config.out_dir, sub, u)?);
    }
    let u0 = &fields[0].1;
    let eps = config.solver.resolve_eps(&grid);
    let dt_micro = config
        .solver
        .dt
        .unwrap_or(config.solver.cfl_safety * grid.h() * grid.h() / 8.0);
    let manifest = Manifest {
        config: config.clone(),
        eps,
        dt_micro,
        frame_dt: u0.dt(),
        n_steps: (u0.horizon() / dt_micro).round() as usize,
        horizon_effective: u0.horizon(),
        fields: field_frames,
        timings_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    std::fs::write(
        manifest_path(&config.out_dir),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    println!(
        "evolved {} field(s): {} frames to t = {:.4} (dt = {:.3e}, eps = {:.3e})",
        fields.len(),
        u0.n_frames(),
        u0.horizon(),
        dt_micro,
        eps
    );
    println!("run written to {}", config.out_dir.display());
    Ok(())
}

pub struct VerifyOptions {
    pub run_dir: PathBuf,
    pub levels: Option<usize>,
    pub checks: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub compare_run: Option<PathBuf>,
    pub export_contours: bool,
}

/// Extra (non-per-level) report block.
#[derive(serde::Serialize)]
struct FullReport {
    levels: Vec<VerificationReport>,
    aggregate: String,
    extra: Vec<ReportEntry>,
}

pub fn cmd_verify(opts: &VerifyOptions) -> anyhow::Result<bool> {
    let manifest = load_manifest(&opts.run_dir)?;
    let primary = load_frames(&opts.run_dir, &manifest.fields[0], manifest.frame_dt)?;
    let secondary = manifest
        .fields
        .get(1)
        .map(|f| load_frames(&opts.run_dir, f, manifest.frame_dt))
        .transpose()?;

    let checks: Vec<String> = opts
        .checks
        .clone()
        .unwrap_or_else(|| manifest.config.checks.clone());
    let enabled = |name: &str| checks.iter().any(|c| c == name);
    let seed = opts.seed.unwrap_or(manifest.config.seed);

    let levels = match opts.levels {
        Some(k) => crate::config::LevelSpec::Count { count: k }
            .resolve(primary.frame(0).min(), primary.frame(0).max())?,
        None => manifest
            .config
            .levels
            .resolve(primary.frame(0).min(), primary.frame(0).max())?,
    };
    let fam = LevelFamily::extract(&primary, &levels)?;
    let battery = standard_battery(primary.grid(), primary.horizon());

    let mut reports: Vec<VerificationReport> = Vec::new();
    if enabled("variational") {
        reports = fam
            .levels()
            .to_vec()
            .par_iter()
            .map(|&s| verify_variational(&fam, s, &battery))
            .collect::<Result<Vec<_>, _>>()?;
    }

    let mut extra: Vec<ReportEntry> = Vec::new();
    if enabled("avoidance") {
        match &secondary {
            Some(ub) => {
                // Two-field run: avoidance between the 0-levels.
                let fa = LevelFamily::extract(&primary, &[0.0])?;
                let fb = LevelFamily::extract(ub, &[0.0])?;
                extra.push(check_avoidance(
                    fa.series(0.0)?,
                    fb.series(0.0)?,
                    primary.grid().h(),
                    primary.dt(),
                ));
            }
            None => {
                // Single field: adjacent levels of the foliation avoid each
                // other.
                for pair in fam.levels().windows(2) {
                    let mut entry = check_avoidance(
                        fam.series(pair[0])?,
                        fam.series(pair[1])?,
                        primary.grid().h(),
                        primary.dt(),
                    );
                    entry.name = format!("avoidance[{:.4},{:.4}]", pair[0], pair[1]);
                    extra.push(entry);
                }
            }
        }
    }
    if enabled("comparison") {
        // Try both orders; the precondition picks whichever pair is
        // actually ordered at t = 0.
        let ordered_comparison = |a: &SpaceTimeField, b: &SpaceTimeField| -> anyhow::Result<ReportEntry> {
            let forward = check_comparison(a, b)?;
            if forward.verdict != mcflab_core::verify::Verdict::Skipped {
                return Ok(forward);
            }
            check_comparison(b, a).map_err(Into::into)
        };
        match (&secondary, &opts.compare_run) {
            (_, Some(dir)) => {
                let other_manifest = load_manifest(dir)?;
                let other = load_frames(dir, &other_manifest.fields[0], other_manifest.frame_dt)?;
                extra.push(ordered_comparison(&primary, &other)?);
            }
            (Some(ub), None) => extra.push(ordered_comparison(&primary, ub)?),
            (None, None) => extra.push(ReportEntry::skipped(
                "comparison",
                "needs --compare-run or a two-field run",
            )),
        }
    }
    if enabled("fattening") {
        let target_level = fam
            .levels()
            .iter()
            .cloned()
            .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap_or(0.0);
        for frac in [0.5, 1.0] {
            let t = primary.horizon() * frac;
            let entry = fattening_probe(&primary, target_level, t)?;
            extra.push(entry);
        }
    }
    if enabled("viscosity") {
        let tol = viscosity_tolerance(primary.grid().h());
        let report = check_viscosity_inequalities(&primary, 200, tol, seed)?;
        let frac = report.satisfied_fraction();
        let pass = frac >= 0.99 && !report.too_many_skips();
        extra.push(ReportEntry::with_verdict(
            "viscosity",
            1.0 - frac,
            1.0,
            0.01,
            pass,
            json!({
                "samples": report.samples.len(),
                "skipped": report.skipped,
                "satisfied_fraction": frac,
                "tolerance": tol,
            }),
        ));
    }

    let variational_count = reports.iter().filter(|r| r.is_variational()).count();
    let aggregate = format!(
        "foliation variational on {variational_count} of {} levels",
        reports.len()
    );
    let all_pass = reports.iter().all(|r| r.is_variational())
        && extra
            .iter()
            .all(|e| e.verdict != mcflab_core::verify::Verdict::Fail);

    let full = FullReport {
        levels: reports,
        aggregate,
        extra,
    };
    std::fs::write(
        opts.run_dir.join("report.json"),
        serde_json::to_vec_pretty(&full)?,
    )?;
    std::fs::write(
        opts.run_dir.join("report.csv"),
        mcflab_core::verify::report_csv(&full.levels),
    )?;
    write_plots(&opts.run_dir, &manifest, &primary, &fam, &full)?;
    if opts.export_contours {
        export_contours(&opts.run_dir, &primary, &fam)?;
    }
    println!("{}", full.aggregate);
    for e in &full.extra {
        println!("{}: {:?} (residual {:.4e})", e.name, e.verdict, e.residual);
    }
    Ok(all_pass)
}

/// Tolerance of the viscosity spot checks: C·h with C pinned to 25, wide
/// enough for the O(h) consistency error of the scheme near the interface.
pub fn viscosity_tolerance(h: f64) -> f64 {
    25.0 * h
}

fn fattening_probe(u: &SpaceTimeField, s: f64, t: f64) -> anyhow::Result<ReportEntry> {
    let k = u.frame_index_at(t)?;
    let frame = u.frame(k);
    let h = frame.grid().h();
    let contour = marching_squares(frame, s);
    if contour.is_empty() {
        return Ok(ReportEntry::skipped(
            "fattening",
            "level set empty at probe time",
        ));
    }
    let mut lip = 0.0f64;
    for (_, _, p) in contour.vertices() {
        let g = frame.interp_gradient(p[0], p[1]);
        lip = lip.max((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    let dmin = (2.5 * h * lip).max(4.0 * h);
    let dmax_range = 0.8 * (frame.max() - s).min(s - frame.min());
    let dmax = (4.0 * dmin).min(dmax_range.max(dmin * 1.5));
    let deltas = [dmax, (dmax * dmin * dmin).cbrt().max(dmin * 1.2), dmin]
        .into_iter()
        .filter(|d| *d > 0.0)
        .collect::<Vec<_>>();
    let mut sorted = deltas.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.dedup();
    if sorted.len() < 2 {
        return Ok(ReportEntry::skipped("fattening", "no usable delta ladder"));
    }
    let mut entry = detect_fattening(u, s, u.frame(k).time_tag(), &sorted)?;
    entry.name = format!("fattening[s={s:.4},t={:.4}]", u.frame(k).time_tag());
    Ok(entry)
}

fn write_plots(
    run_dir: &Path,
    manifest: &Manifest,
    u: &SpaceTimeField,
    fam: &LevelFamily,
    full: &FullReport,
) -> anyhow::Result<()> {
    let plots = run_dir.join("plots");
    std::fs::create_dir_all(&plots)?;

    // Radius of the level nearest 0 against time, with the closed-form
    // overlay for circle data.
    let level = fam
        .levels()
        .iter()
        .cloned()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .ok_or_else(|| anyhow!("family has no levels"))?;
    let series0 = fam.series(level)?;
    let measured: Vec<(f64, f64)> = series0
        .sets
        .iter()
        .enumerate()
        .filter(|(_, set)| !set.boundary().is_empty())
        .map(|(k, set)| (fam.time_of(k), set.boundary().mean_radius([0.0, 0.0])))
        .collect();
    let mut radius_series = vec![Series {
        label: format!("level {level:.3}"),
        points: measured,
        dashed: false,
    }];
    if let DatumSpec::Circle { radius, .. } = &manifest.config.datum {
        let r0 = *radius;
        let overlay: Vec<(f64, f64)> = (0..u.n_frames())
            .map(|k| {
                let t = fam.time_of(k);
                (t, (r0 * r0 - 2.0 * t).max(0.0).sqrt())
            })
            .filter(|&(_, r)| r > 0.0)
            .collect();
        radius_series.push(Series {
            label: "sqrt(R0^2 - 2t)".into(),
            points: overlay,
            dashed: true,
        });
    }
    std::fs::write(
        plots.join("radius_vs_t.svg"),
        LineChart {
            title: "extracted radius".into(),
            x_label: "t".into(),
            y_label: "radius".into(),
            log_log: false,
            series: radius_series,
        }
        .render(),
    )?;

    // Perimeter per level against time.
    let perim_series: Vec<Series> = fam
        .all_series()
        .iter()
        .map(|ls| Series {
            label: format!("s = {:.3}", ls.level),
            points: ls
                .sets
                .iter()
                .enumerate()
                .map(|(k, set)| (fam.time_of(k), set.perimeter()))
                .collect(),
            dashed: false,
        })
        .collect();
    std::fs::write(
        plots.join("perimeter_vs_t.svg"),
        LineChart {
            title: "perimeter".into(),
            x_label: "t".into(),
            y_label: "P".into(),
            log_log: false,
            series: perim_series,
        }
        .render(),
    )?;

    // Residuals per check against level.
    if !full.levels.is_empty() {
        let names: Vec<String> = full.levels[0]
            .checks
            .iter()
            .map(|c| c.name.clone())
            .collect();
        let mut series = Vec::new();
        for name in names {
            let points: Vec<(f64, f64)> = full
                .levels
                .iter()
                .filter_map(|r| r.entry(&name).map(|e| (r.level, e.residual)))
                .collect();
            series.push(Series {
                label: name,
                points,
                dashed: false,
            });
        }
        std::fs::write(
            plots.join("residuals_vs_level.svg"),
            LineChart {
                title: "check residuals by level".into(),
                x_label: "level".into(),
                y_label: "residual".into(),
                log_log: false,
                series,
            }
            .render(),
        )?;

        // L¹ modulus of the level closest to zero, log-log.
        if let Some(report) = full
            .levels
            .iter()
            .min_by(|a, b| a.level.abs().partial_cmp(&b.level.abs()).unwrap())
        {
            if let Some(entry) = report.entry("l1_continuity") {
                if let Some(pairs) = entry.meta.get("m_per_lag").and_then(|v| v.as_array()) {
                    let points: Vec<(f64, f64)> = pairs
                        .iter()
                        .filter_map(|p| {
                            let a = p.as_array()?;
                            Some((a[0].as_f64()?, a[1].as_f64()?))
                        })
                        .collect();
                    std::fs::write(
                        plots.join("l1_modulus_loglog.svg"),
                        LineChart {
                            title: format!("L1 modulus, level {:.3}", report.level),
                            x_label: "lag".into(),
                            y_label: "m(lag)".into(),
                            log_log: true,
                            series: vec![Series {
                                label: "m".into(),
                                points,
                                dashed: false,
                            }],
                        }
                        .render(),
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn export_contours(run_dir: &Path, u: &SpaceTimeField, fam: &LevelFamily) -> anyhow::Result<()> {
    let dir = run_dir.join("contours");
    std::fs::create_dir_all(&dir)?;
    let level = fam
        .levels()
        .iter()
        .cloned()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap_or(0.0);
    for k in [0, u.n_frames() / 2, u.n_frames() - 1] {
        let c = marching_squares(u.frame(k), level);
        let h = curvature_on_contour(u.frame(k), &c);
        let v = mcflab_core::geometry::velocity_on_existing_contour(u, k, &c)?;
        let csv = contour_to_csv(&c, Some(&v), Some(&h))?;
        std::fs::write(dir.join(format!("level0_frame_{k:05}.csv")), csv)?;
    }
    Ok(())
}

pub struct ReconstructOptions {
    pub run_dir: PathBuf,
    pub levels: usize,
    pub family: Option<PathBuf>,
    pub repair: bool,
}

#[derive(serde::Serialize)]
struct ReconReport {
    k_bound: f64,
    ds: f64,
    levels: usize,
    sup_distance: f64,
    bound: f64,
    lip: f64,
    consistency: ReportEntry,
}

pub fn cmd_reconstruct(opts: &ReconstructOptions) -> anyhow::Result<()> {
    let manifest = load_manifest(&opts.run_dir)?;
    let u = load_frames(&opts.run_dir, &manifest.fields[0], manifest.frame_dt)?;

    let (fam, params) = match &opts.family {
        Some(dir) => {
            let fam = crate::family_io::load_family(dir)?;
            let levels = fam.levels();
            if levels.len() < 2 {
                bail!("external family needs at least two levels");
            }
            let ds = levels
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0f64, f64::max);
            let k_bound = (-levels[0]).max(*levels.last().unwrap()) + 0.499 * ds;
            (fam, LayerCakeParams { k_bound, ds })
        }
        None => {
            let params = LayerCakeParams::for_field(u.frame(0), opts.levels)?;
            let fam = LevelFamily::extract(&u, &params.levels())?;
            (fam, params)
        }
    };
    let fam = if opts.repair {
        repair_nesting(&fam)?
    } else {
        fam
    };

    let v = layer_cake(&fam, &params).map_err(anyhow::Error::from)?;
    let distance = sup_norm_distance(&u, &v)?;

    // Lipschitz scale of the datum for the round-trip bound Δs + 4h·Lip(g).
    let g0 = u.frame(0);
    let grid = g0.grid().clone();
    let mut lip = 0.0f64;
    for (i, j) in grid.interior(1) {
        let grad = g0.gradient_central(i, j)?;
        lip = lip.max((grad[0] * grad[0] + grad[1] * grad[1]).sqrt());
    }
    let bound = params.ds + 4.0 * grid.h() * lip;

    let consistency = check_level_consistency(&u, &fam)?;
    let recon_dir = opts.run_dir.join("recon");
    std::fs::create_dir_all(&recon_dir)?;
    for (k, frame) in v.frames().iter().enumerate() {
        frame.write_snapshot(&recon_dir.join(format!("v_{k:05}.mcf")))?;
    }
    let report = ReconReport {
        k_bound: params.k_bound,
        ds: params.ds,
        levels: fam.levels().len(),
        sup_distance: distance,
        bound,
        lip,
        consistency,
    };
    std::fs::write(
        opts.run_dir.join("recon_report.json"),
        serde_json::to_vec_pretty(&report)?,
    )?;
    println!(
        "reconstructed {} levels: sup distance {distance:.5} (bound {bound:.5})",
        fam.levels().len()
    );
    Ok(())
}
