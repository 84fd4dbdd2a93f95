use std::path::Path;

use desitter_twistor::chart::ChartGrid;
use desitter_twistor::energy::SolverConfig;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_THRESHOLDS: &str = include_str!("../config/thresholds.toml");
pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub version: u32,
    pub checks: Checks,
    pub analysis: AnalysisLimits,
    pub reconstruct: ReconstructLimits,
    pub solver: SolverSettings,
}

/// Coefficients `c` of the `c·h²` thresholds used by `check`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    pub j1: f64,
    pub j2: f64,
    pub conformal: f64,
    pub horizontal: f64,
    pub harmonic: f64,
    pub zcc: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalysisLimits {
    pub conformality: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReconstructLimits {
    pub absolute: f64,
    pub coefficient: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub newton_tol: f64,
    pub damping: f64,
}

pub fn scaled(c: f64, grid: &ChartGrid) -> f64 {
    let h = grid.h();
    c * h * h
}

impl Thresholds {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let t: Thresholds = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if t.version != CONFIG_VERSION {
            return Err(CliError::Config(format!("unsupported config version {}", t.version)));
        }
        Ok(t)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Self::parse(DEFAULT_THRESHOLDS),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text)
            }
        }
    }

    pub fn reconstruct_threshold(&self, grid: &ChartGrid) -> f64 {
        self.reconstruct
            .absolute
            .max(scaled(self.reconstruct.coefficient, grid))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iter: self.solver.max_iter,
            newton_tol: self.solver.newton_tol,
            damping: self.solver.damping,
            ..SolverConfig::default()
        }
    }
}
