//! Run configuration: JSON round-trippable description of a full run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use mcflab_core::field::{make_grid, Grid2};
use mcflab_core::initial_data::DatumSpec;
use mcflab_core::solver::SolverParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub center: [f64; 2],
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn build(&self) -> anyhow::Result<Grid2> {
        Ok(make_grid(self.center, self.half_width, self.n)?)
    }
}

/// Level selection: an explicit list or an interior ladder of `count`
/// levels spanning the inner 80% of the datum range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    Count { count: usize },
    List { list: Vec<f64> },
}

impl Default for LevelSpec {
    fn default() -> Self {
        LevelSpec::Count { count: 9 }
    }
}

impl LevelSpec {
    pub fn resolve(&self, min: f64, max: f64) -> anyhow::Result<Vec<f64>> {
        match self {
            LevelSpec::List { list } => {
                if list.is_empty() {
                    bail!("level list is empty");
                }
                Ok(list.clone())
            }
            LevelSpec::Count { count } => {
                if *count == 0 {
                    bail!("level count must be positive");
                }
                let lo = min + 0.1 * (max - min);
                let hi = max - 0.1 * (max - min);
                let k = *count;
                Ok((0..k)
                    .map(|j| lo + (j as f64 + 0.5) * (hi - lo) / k as f64)
                    .collect())
            }
        }
    }
}

/// Full configuration of a run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub datum: DatumSpec,
    pub grid: GridSpec,
    pub solver: SolverParams,
    #[serde(default)]
    pub levels: LevelSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_checks() -> Vec<String> {
    vec!["variational".into(), "avoidance".into(), "fattening".into()]
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }
}
