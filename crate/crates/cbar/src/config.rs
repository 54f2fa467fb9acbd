//! The run config file and its merge with command-line flags.
//!
//! A flat TOML file; every key is optional and flags take precedence.
//! Relative paths are resolved against the file's directory.
//!
//! ```toml
//! seed = 7
//! jobs = 4
//! severity_table = "severities.toml"
//! dataset = "data/clean"
//! output = "out"
//! images = 100
//! corruption_draws = 100
//! augmentation_draws = 100
//! msd_budget = 100000
//! candidates = 100000
//! budget_factor = 100
//! repeats = 10
//! tolerance = 1.0
//! spread_band = 0.5
//!
//! [extractor]
//! grid = 8
//! bands = 8
//! ```

use std::path::{Path, PathBuf};

use cbar_core::{BuiltinExtractor, Seed};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_IMAGES: usize = 100;
pub const DEFAULT_CORRUPTION_DRAWS: usize = 100;
pub const DEFAULT_AUGMENTATION_DRAWS: usize = 100;
pub const DEFAULT_MSD_BUDGET: usize = 100_000;
pub const DEFAULT_CANDIDATES: usize = 100_000;
pub const DEFAULT_BUDGET_FACTOR: usize = 100;
pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_TOLERANCE: f64 = 1.0;
pub const DEFAULT_SPREAD_BAND: f64 = 0.5;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractorConfig {
    pub grid: Option<usize>,
    pub bands: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub severity_table: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub features: Option<Vec<PathBuf>>,
    pub errors: Option<PathBuf>,
    pub reference_errors: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub images: Option<usize>,
    pub corruption_draws: Option<usize>,
    pub augmentation_draws: Option<usize>,
    pub msd_budget: Option<usize>,
    pub candidates: Option<usize>,
    pub budget_factor: Option<usize>,
    pub repeats: Option<usize>,
    pub tolerance: Option<f64>,
    pub spread_band: Option<f64>,
    #[serde(default)]
    pub extractor: ExtractorConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut cfg.severity_table,
            &mut cfg.dataset,
            &mut cfg.errors,
            &mut cfg.reference_errors,
            &mut cfg.output,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        for p in cfg.features.iter_mut().flatten() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn extractor(&self) -> Result<BuiltinExtractor> {
        let d = BuiltinExtractor::default();
        BuiltinExtractor::new(
            self.extractor.grid.unwrap_or(d.grid),
            self.extractor.bands.unwrap_or(d.bands),
        )
        .map_err(|e| CliError::Config(format!("extractor: {e}")))
    }
}

/// Whether the `CI` environment variable marks a CI run.
pub fn ci_mode() -> bool {
    std::env::var("CI").is_ok_and(|v| !matches!(v.trim(), "" | "0" | "false"))
}

/// The run seed. In CI mode it must be given explicitly.
pub fn resolve_seed(flag: Option<u64>, cfg: &RunConfig, ci: bool) -> Result<Seed> {
    match flag.or(cfg.seed) {
        Some(s) => Ok(Seed(s)),
        None if ci => Err(CliError::Config("--seed is required when CI is set".into())),
        None => Ok(Seed(0)),
    }
}

/// A sample budget; must be at least 1.
pub fn budget(
    name: &str,
    flag: Option<usize>,
    cfg: Option<usize>,
    default: usize,
) -> Result<usize> {
    let v = flag.or(cfg).unwrap_or(default);
    if v == 0 {
        return Err(CliError::Config(format!("{name} must be at least 1")));
    }
    Ok(v)
}

/// A non-negative finite parameter.
pub fn nonneg(name: &str, flag: Option<f64>, cfg: Option<f64>, default: f64) -> Result<f64> {
    let v = flag.or(cfg).unwrap_or(default);
    if !(v.is_finite() && v >= 0.0) {
        return Err(CliError::Config(format!(
            "{name} must be a non-negative number"
        )));
    }
    Ok(v)
}

/// A required path that must exist.
pub fn existing(name: &str, flag: Option<PathBuf>, cfg: Option<&PathBuf>) -> Result<PathBuf> {
    let p = flag
        .or_else(|| cfg.cloned())
        .ok_or_else(|| CliError::Config(format!("{name} is required")))?;
    if !p.exists() {
        return Err(CliError::Config(format!(
            "{name} {} does not exist",
            p.display()
        )));
    }
    Ok(p)
}

/// A required output path.
pub fn output(name: &str, flag: Option<PathBuf>, cfg: Option<&PathBuf>) -> Result<PathBuf> {
    flag.or_else(|| cfg.cloned())
        .ok_or_else(|| CliError::Config(format!("{name} is required")))
}
