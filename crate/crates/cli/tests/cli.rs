//! End-to-end tests of the binary: the exit-code contract, run artifacts,
//! determinism of the solver output, and the external-family negative
//! control.

use std::path::Path;
use std::process::Command;

use mcflab_core::field::{make_grid, ScalarField, SpaceTimeField};
use mcflab_core::geometry::sublevel_set;
use mcflab_core::verify::{LevelFamily, LevelSeries};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcflab"))
}

fn write_config(
    dir: &Path,
    name: &str,
    out_dir: &Path,
    extra: serde_json::Value,
) -> std::path::PathBuf {
    let mut config = serde_json::json!({
        "datum": {"kind": "circle", "radius": 1.0, "width": 0.5},
        "grid": {"half_width": 2.5, "n": 65},
        "solver": {"eps": null, "dt": null, "horizon": 0.1, "cfl_safety": 1.0, "save_every": null},
        "levels": {"count": 3},
        "out_dir": out_dir,
        "seed": 1
    });
    if let Some(map) = extra.as_object() {
        for (k, v) in map {
            config[k] = v.clone();
        }
    }
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn evolve_writes_expected_frame_count_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &run,
        serde_json::json!({
            "solver": {"eps": null, "dt": null, "horizon": 0.1, "cfl_safety": 1.0, "save_every": 16}
        }),
    );
    let out = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    // T/dt steps split into strides of 16 plus the initial frame.
    let files = manifest["fields"][0]["files"].as_array().unwrap();
    let n_steps = manifest["n_steps"].as_u64().unwrap();
    assert_eq!(files.len() as u64, n_steps / 16 + 1);
    assert!(manifest["eps"].as_f64().unwrap() > 0.0);
    assert!(manifest["dt_micro"].as_f64().unwrap() > 0.0);
    for name in files {
        assert!(run.join("frames").join(name.as_str().unwrap()).exists());
    }
}

#[test]
fn evolve_bad_output_path_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        Path::new("/proc/definitely/not/writable"),
        serde_json::json!({}),
    );
    let out = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evolve_missing_config_exits_3() {
    let out = bin()
        .args(["evolve", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evolve_unstable_dt_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &run,
        serde_json::json!({
            "solver": {"eps": null, "dt": 0.5, "horizon": 0.1, "cfl_safety": 1.0, "save_every": null}
        }),
    );
    let out = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn verify_missing_run_exits_4() {
    let out = bin()
        .args(["verify", "--run", "/nonexistent/run"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_circle_run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &run,
        serde_json::json!({
            "grid": {"half_width": 2.5, "n": 129},
            "solver": {"eps": null, "dt": null, "horizon": 0.2, "cfl_safety": 1.0, "save_every": null}
        }),
    );
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let out = bin()
        .args(["verify", "--run"])
        .arg(&run)
        .args(["--checks", "variational,avoidance", "--export-contours"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run.join("report.json").exists());
    assert!(run.join("report.csv").exists());
    assert!(run.join("plots/radius_vs_t.svg").exists());
    assert!(run.join("plots/perimeter_vs_t.svg").exists());
    assert!(run.join("plots/residuals_vs_level.svg").exists());
    assert!(run.join("plots/l1_modulus_loglog.svg").exists());
    let contour = std::fs::read_to_string(run.join("contours/level0_frame_00000.csv")).unwrap();
    assert!(contour.starts_with("component_id,vertex_index,x,y,v,h,flagged"));
    assert!(contour.lines().count() > 10);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert!(report["aggregate"]
        .as_str()
        .unwrap()
        .contains("variational on"));
    // The CSV has a row per (level, check) plus the header.
    let csv = std::fs::read_to_string(run.join("report.csv")).unwrap();
    let levels = report["levels"].as_array().unwrap();
    let rows: usize = levels
        .iter()
        .map(|l| l["checks"].as_array().unwrap().len())
        .sum();
    assert_eq!(csv.lines().count(), rows + 1);
}

#[test]
fn verify_lemniscate_flags_fattening() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &run,
        serde_json::json!({
            "datum": {"kind": "lemniscate", "clamp_width": 0.05},
            "grid": {"half_width": 1.6, "n": 257},
            "solver": {"eps": null, "dt": null, "horizon": 0.05, "cfl_safety": 1.0, "save_every": null},
            "levels": {"list": [0.0]},
            "checks": ["fattening"]
        }),
    );
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let out = bin().args(["verify", "--run"]).arg(&run).output().unwrap();
    // Fattening detected: the run reports a failure (exit 1).
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    let extra = report["extra"].as_array().unwrap();
    let flagged = extra
        .iter()
        .any(|e| e["name"].as_str().unwrap().starts_with("fattening") && e["verdict"] == "fail");
    assert!(flagged, "{extra:?}");
}

#[test]
fn reconstruct_rounds_trip_and_refines() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &run,
        serde_json::json!({
            "grid": {"half_width": 2.5, "n": 129},
            "solver": {"eps": null, "dt": null, "horizon": 0.2, "cfl_safety": 1.0, "save_every": null}
        }),
    );
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let mut distances = Vec::new();
    for levels in ["64", "128"] {
        let out = bin()
            .args(["reconstruct", "--run"])
            .arg(&run)
            .args(["--levels", levels])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(run.join("recon_report.json")).unwrap())
                .unwrap();
        let d = report["sup_distance"].as_f64().unwrap();
        assert!(d <= report["bound"].as_f64().unwrap());
        distances.push(d);
        assert!(run.join("recon/v_00000.mcf").exists());
    }
    assert!(
        distances[1] < distances[0],
        "doubling levels must reduce the distance"
    );
}

#[test]
fn reconstruct_non_nested_family_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = write_config(dir.path(), "cfg.json", &run, serde_json::json!({}));
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );

    // Build a deliberately non-nested external family: the lower level
    // carries the bigger disc.
    let g = make_grid([0.0, 0.0], 2.5, 65).unwrap();
    let f = ScalarField::from_fn(g, 0.0, |x, y| x * x + y * y - 1.0).unwrap();
    let n_frames = {
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap())
                .unwrap();
        manifest["fields"][0]["files"].as_array().unwrap().len()
    };
    let big = sublevel_set(&f, 0.5);
    let small = sublevel_set(&f, -0.5);
    let fam = LevelFamily::from_series(
        vec![
            LevelSeries {
                level: -0.5,
                sets: vec![big; n_frames],
            },
            LevelSeries {
                level: 0.5,
                sets: vec![small; n_frames],
            },
        ],
        0.1,
    )
    .unwrap();
    let fam_dir = dir.path().join("family");
    mcflab_cli::family_io::save_family(&fam, &fam_dir).unwrap();

    let out = bin()
        .args(["reconstruct", "--run"])
        .arg(&run)
        .args(["--levels", "2", "--family"])
        .arg(&fam_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // The explicit repair mode turns the same family into a usable one.
    let out = bin()
        .args(["reconstruct", "--run"])
        .arg(&run)
        .args(["--levels", "2", "--family"])
        .arg(&fam_dir)
        .arg("--repair-nesting")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn family_io_round_trip() {
    let g = make_grid([0.0, 0.0], 2.0, 65).unwrap();
    let u = SpaceTimeField::from_fn(g, 0.05, 4, |x, y, t| x * x + y * y - 1.0 + 2.0 * t).unwrap();
    let fam = LevelFamily::extract(&u, &[-0.25, 0.0, 0.5]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    mcflab_cli::family_io::save_family(&fam, dir.path()).unwrap();
    let back = mcflab_cli::family_io::load_family(dir.path()).unwrap();
    assert_eq!(back.levels(), fam.levels());
    assert_eq!(back.n_frames(), fam.n_frames());
    for (a, b) in fam.all_series().iter().zip(back.all_series()) {
        for (sa, sb) in a.sets.iter().zip(&b.sets) {
            assert_eq!(sa.indicator(), sb.indicator());
        }
    }
}

#[test]
fn mcf_threads_env_is_respected() {
    // Smoke test: a capped pool must still produce byte-identical frames.
    let dir = tempfile::tempdir().unwrap();
    let run1 = dir.path().join("run1");
    let run2 = dir.path().join("run2");
    let cfg1 = write_config(dir.path(), "cfg1.json", &run1, serde_json::json!({}));
    let cfg2 = write_config(dir.path(), "cfg2.json", &run2, serde_json::json!({}));
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg1)
            .env("MCF_THREADS", "1")
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    assert_eq!(
        bin()
            .args(["evolve", "--config"])
            .arg(&cfg2)
            .env("MCF_THREADS", "4")
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let m1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run1.join("manifest.json")).unwrap())
            .unwrap();
    let m2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run2.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m1["fields"][0]["sha256"], m2["fields"][0]["sha256"]);

    // Reports must not depend on the pool size either.
    for (run, threads) in [(&run1, "1"), (&run2, "4")] {
        let status = bin()
            .args(["verify", "--run"])
            .arg(run)
            .args(["--seed", "5"])
            .env("MCF_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.code().is_some());
    }
    let r1 = std::fs::read(run1.join("report.json")).unwrap();
    let r2 = std::fs::read(run2.join("report.json")).unwrap();
    assert_eq!(r1, r2, "reports differ across thread counts");
}
