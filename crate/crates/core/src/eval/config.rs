use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapter::TargetMode;
use crate::error::{RailError, Result};
use crate::fusion::FusionConfig;

pub const DEFAULT_SHOTS: usize = 16;
pub const DEFAULT_RHL_DIM: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    Primal,
    #[default]
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Xtail,
    Mtil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Rbf,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub validation_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lambdas: vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            gammas: vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
            validation_fraction: 0.2,
        }
    }
}

/// Everything needed to reproduce one protocol run. Missing `lambda` or
/// `gamma` are chosen by grid search on the first domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub domains: Vec<PathBuf>,
    pub adapter: AdapterKind,
    pub mode: Mode,
    pub shots: usize,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub kernel: KernelKind,
    pub rhl_dim: usize,
    pub targets: TargetMode,
    pub fusion: FusionConfig,
    pub grid: GridConfig,
    /// L2-normalize every embedding row after loading.
    pub normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domains: Vec::new(),
            adapter: AdapterKind::default(),
            mode: Mode::default(),
            shots: DEFAULT_SHOTS,
            seed: 0,
            lambda: None,
            gamma: None,
            kernel: KernelKind::default(),
            rhl_dim: DEFAULT_RHL_DIM,
            targets: TargetMode::default(),
            fusion: FusionConfig::default(),
            grid: GridConfig::default(),
            normalize: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(RailError::InvalidParameter("shots must be at least 1".into()));
        }
        if self.rhl_dim == 0 {
            return Err(RailError::InvalidParameter("rhl_dim must be at least 1".into()));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(RailError::InvalidLambda(l));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(RailError::InvalidParameter(format!("gamma must be positive, got {g}")));
            }
        }
        let f = self.grid.validation_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(RailError::InvalidParameter(format!(
                "validation fraction must lie in (0, 1), got {f}"
            )));
        }
        self.fusion.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| RailError::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| RailError::from(e).in_file(path))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Reads a domain order file: one directory per line, relative paths taken
/// from the file's own directory, blank lines and `#` comments skipped.
pub fn read_order_file(path: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path).map_err(|e| RailError::from(e).in_file(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let dirs: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let p = Path::new(l);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        })
        .collect();
    if dirs.is_empty() {
        return Err(RailError::InvalidParameter(format!("{} lists no domains", path.display())));
    }
    Ok(dirs)
}
