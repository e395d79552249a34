//! Run-directory layout: frame snapshots plus a manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mcflab_core::field::{ScalarField, SpaceTimeField};

use crate::config::RunConfig;

/// Manifest written by `evolve`: parameters, frame checksums, timings.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub eps: f64,
    pub dt_micro: f64,
    pub frame_dt: f64,
    pub n_steps: usize,
    pub horizon_effective: f64,
    /// Frame file names per field ("frames" or "frames_a"/"frames_b").
    pub fields: Vec<FieldFrames>,
    pub timings_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldFrames {
    pub dir: String,
    pub files: Vec<String>,
    pub sha256: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_frames(run_dir: &Path, sub: &str, u: &SpaceTimeField) -> anyhow::Result<FieldFrames> {
    let dir = run_dir.join(sub);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let mut checksums = Vec::new();
    for (k, frame) in u.frames().iter().enumerate() {
        let name = format!("frame_{k:05}.mcf");
        let path = dir.join(&name);
        frame.write_snapshot(&path)?;
        let bytes = std::fs::read(&path)?;
        checksums.push(sha256_hex(&bytes));
        files.push(name);
    }
    Ok(FieldFrames {
        dir: sub.into(),
        files,
        sha256: checksums,
    })
}

pub fn manifest_path(run_dir: &Path) -> PathBuf {
    run_dir.join("manifest.json")
}

pub fn load_manifest(run_dir: &Path) -> anyhow::Result<Manifest> {
    let path = manifest_path(run_dir);
    if !path.exists() {
        bail!("missing manifest: {}", path.display());
    }
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_frames(
    run_dir: &Path,
    frames: &FieldFrames,
    frame_dt: f64,
) -> anyhow::Result<SpaceTimeField> {
    let dir = run_dir.join(&frames.dir);
    let mut fields = Vec::with_capacity(frames.files.len());
    for name in &frames.files {
        let path = dir.join(name);
        if !path.exists() {
            bail!("missing frame {}", path.display());
        }
        fields.push(ScalarField::read_snapshot(&path)?);
    }
    Ok(SpaceTimeField::new(fields, frame_dt)?)
}
