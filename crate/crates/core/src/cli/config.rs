use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::discretization::{build_grid, Grid1D, MIN_INTERVALS};
use crate::iteration::{Decomposition, Layout, SolveOptions};
use crate::model::{catalog_lookup, ProblemSpec};
use crate::volterra::{DEFAULT_MARGIN, DEFAULT_SAMPLES};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DecompositionConfig {
    Split { i1_hi: usize, i2_lo: usize },
    Named(String),
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_sweeps: usize,
    #[serde(default = "default_margin")]
    pub c_margin: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub solution_csv: Option<PathBuf>,
    pub history_csv: Option<PathBuf>,
}

/// On-disk run description. Output paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    /// Refinement sequence for `order`; defaults to `[grid]`.
    #[serde(default)]
    pub grids: Option<Vec<GridConfig>>,
    pub decomposition: DecompositionConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A config file resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub raw: RunConfig,
    pub spec: ProblemSpec,
    pub grid: Grid1D,
    pub layout: Layout,
    pub options: SolveOptions,
    pub solution_csv: Option<PathBuf>,
    pub history_csv: Option<PathBuf>,
}

impl LoadedConfig {
    pub fn grids(&self) -> Vec<(usize, usize)> {
        match &self.raw.grids {
            Some(list) => list.iter().map(|g| (g.nx, g.nt)).collect(),
            None => vec![(self.raw.grid.nx, self.raw.grid.nt)],
        }
    }

    /// Layout for another grid of the refinement sequence, keeping the
    /// interfaces at the same fractions of the interval.
    pub fn layout_for(&self, grid: &Grid1D) -> crate::Result<Layout> {
        match self.layout {
            Layout::Single => Ok(Layout::Single),
            Layout::Split(d) => {
                let base = self.grid.nx as f64;
                Ok(Layout::Split(Decomposition::proportional(
                    grid.nx,
                    d.i2_lo as f64 / base,
                    d.i1_hi as f64 / base,
                )?))
            }
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| config_error("<document>", e.to_string()))
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error("<file>", format!("{}: {e}", path.display())))?;
    let raw = parse_config(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve(raw, base)
}

/// Validates a parsed config and builds the problem, grid and options.
pub fn resolve(raw: RunConfig, base_dir: &Path) -> Result<LoadedConfig, ConfigError> {
    let spec = catalog_lookup(&raw.problem.name, &raw.problem.params)
        .map_err(|e| config_error("problem", e.to_string()))?;

    let nx = raw.grid.nx;
    if nx < MIN_INTERVALS {
        return Err(config_error(
            "grid.nx",
            format!("must be at least {MIN_INTERVALS}"),
        ));
    }
    if raw.grid.nt < 1 {
        return Err(config_error("grid.nt", "must be at least 1"));
    }
    let grid = build_grid(spec.domain, nx, raw.grid.nt)
        .map_err(|e| config_error("grid", e.to_string()))?;
    if let Some(list) = &raw.grids {
        if list.is_empty() {
            return Err(config_error("grids", "must not be empty"));
        }
        for (n, g) in list.iter().enumerate() {
            if g.nx < MIN_INTERVALS || g.nt < 1 {
                return Err(config_error(
                    &format!("grids[{n}]"),
                    format!("nx must be at least {MIN_INTERVALS} and nt at least 1"),
                ));
            }
        }
    }

    let layout = match &raw.decomposition {
        DecompositionConfig::Named(name) if name == "single_domain" => Layout::Single,
        DecompositionConfig::Named(name) => {
            return Err(config_error(
                "decomposition",
                format!("expected an object or \"single_domain\", got {name:?}"),
            ))
        }
        &DecompositionConfig::Split { i1_hi, i2_lo } => {
            if i2_lo == 0 || i2_lo >= nx {
                return Err(config_error(
                    "decomposition.i2_lo",
                    format!("must lie in [1, {}]", nx - 1),
                ));
            }
            if i1_hi == 0 || i1_hi >= nx {
                return Err(config_error(
                    "decomposition.i1_hi",
                    format!("must lie in [1, {}]", nx - 1),
                ));
            }
            if i2_lo >= i1_hi {
                return Err(config_error(
                    "decomposition.i2_lo",
                    format!("i2_lo = {i2_lo} must be smaller than i1_hi = {i1_hi}"),
                ));
            }
            let d = Decomposition::new(i1_hi, i2_lo, nx)
                .map_err(|e| config_error("decomposition", e.to_string()))?;
            Layout::Split(d)
        }
    };

    let solver = &raw.solver;
    if !(solver.tol > 0.0) {
        return Err(config_error("solver.tol", "must be positive"));
    }
    if solver.max_sweeps < 1 {
        return Err(config_error("solver.max_sweeps", "must be at least 1"));
    }
    if !(solver.c_margin >= 0.0) {
        return Err(config_error("solver.c_margin", "must be nonnegative"));
    }
    if solver.n_samples < 2 {
        return Err(config_error("solver.n_samples", "must be at least 2"));
    }
    let options = SolveOptions {
        tol: solver.tol,
        max_sweeps: solver.max_sweeps,
        c_margin: solver.c_margin,
        n_samples: solver.n_samples,
        ..SolveOptions::default()
    };

    let solution_csv = raw.output.solution_csv.as_ref().map(|p| base_dir.join(p));
    let history_csv = raw.output.history_csv.as_ref().map(|p| base_dir.join(p));
    Ok(LoadedConfig {
        raw,
        spec,
        grid,
        layout,
        options,
        solution_csv,
        history_csv,
    })
}
