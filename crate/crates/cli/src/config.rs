//! Run configuration: a single JSON document with every default explicit
//! and unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use logsp_core::{
    GridSpec, InitSpec, PositivityPolicy, PotentialSpec, Problem, SolverConfig, TWO_PI,
};

use crate::error::CliError;
use crate::output::read_field_csv;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Half-width of the truncated square.
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub b: f64,
    pub potential: PotentialConfig,
    pub tol_cerami: f64,
    pub tol_energy_stall: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub step0: f64,
    pub step_shrink: f64,
    pub step_grow: f64,
    pub armijo: f64,
    pub init: InitConfig,
    pub positivity: PositivityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            n: 64,
            p: 6.0,
            gamma: TWO_PI,
            b: 1.0,
            potential: PotentialConfig::Harmonic { c0: 1.0, a: 1.0 },
            tol_cerami: 1e-6,
            tol_energy_stall: 1e-13,
            max_iter: 20_000,
            seed: 42,
            step0: 1.0,
            step_shrink: 0.5,
            step_grow: 1.1,
            armijo: 1e-4,
            init: InitConfig::Gaussian {
                center: [0.0, 0.0],
                width: 1.0,
                amplitude: 1.0,
            },
            positivity: PositivityConfig::ProjectEachIter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Harmonic {
        c0: f64,
        a: f64,
    },
    Anisotropic {
        c0: f64,
        a: f64,
        alpha: f64,
        b: f64,
        beta: f64,
    },
    ShiftedModulated {
        c0: f64,
        a: f64,
        center: [f64; 2],
        eps: f64,
        k: f64,
    },
    /// Samples read from a field CSV (`i,j,x,y,u`) on the run's grid.
    Tabulated {
        path: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    Gaussian {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    TwoBump {
        centers: [[f64; 2]; 2],
        width: f64,
        amplitude: f64,
    },
    Random,
    Tabulated {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityConfig {
    ProjectEachIter,
    ProjectAtEnd,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.half_width, self.n).map_err(CliError::from)
    }

    pub fn potential_spec(&self, grid: GridSpec) -> Result<PotentialSpec, CliError> {
        let spec = match &self.potential {
            PotentialConfig::Harmonic { c0, a } => PotentialSpec::harmonic(*c0, *a)?,
            PotentialConfig::Anisotropic {
                c0,
                a,
                alpha,
                b,
                beta,
            } => PotentialSpec::anisotropic(*c0, *a, *alpha, *b, *beta)?,
            PotentialConfig::ShiftedModulated {
                c0,
                a,
                center,
                eps,
                k,
            } => PotentialSpec::shifted_modulated(*c0, *a, *center, *eps, *k)?,
            PotentialConfig::Tabulated { path } => {
                let field = read_field_csv(Path::new(path), grid)?;
                PotentialSpec::tabulated(field)?
            }
        };
        if !spec.meets_unit_normalization() {
            eprintln!(
                "note: potential floor {} is below the normalized inf V = 1; proceeding anyway",
                spec.floor()
            );
        }
        Ok(spec)
    }

    /// Validate and build the runtime problem. The `p > 4` requirement is
    /// checked here so a bad config fails before any computation.
    pub fn problem(&self) -> Result<Problem, CliError> {
        if !(self.p.is_finite() && self.p > 4.0) {
            return Err(CliError::Config(format!(
                "the exponent p must satisfy p > 4 (ground-state theory applies only there), got p = {}",
                self.p
            )));
        }
        let grid = self.grid()?;
        let potential = self.potential_spec(grid)?;
        Problem::new(grid, potential, self.p, self.gamma, self.b).map_err(CliError::from)
    }

    pub fn solver_config(&self, grid: GridSpec) -> Result<SolverConfig, CliError> {
        let init = match &self.init {
            InitConfig::Gaussian {
                center,
                width,
                amplitude,
            } => InitSpec::Gaussian {
                center: *center,
                width: *width,
                amplitude: *amplitude,
            },
            InitConfig::TwoBump {
                centers,
                width,
                amplitude,
            } => InitSpec::TwoBump {
                centers: *centers,
                width: *width,
                amplitude: *amplitude,
            },
            InitConfig::Random => InitSpec::Random,
            InitConfig::Tabulated { path } => {
                InitSpec::Tabulated(read_field_csv(Path::new(path), grid)?)
            }
        };
        let cfg = SolverConfig {
            max_iter: self.max_iter,
            tol_cerami: self.tol_cerami,
            tol_energy_stall: self.tol_energy_stall,
            step0: self.step0,
            step_shrink: self.step_shrink,
            step_grow: self.step_grow,
            armijo: self.armijo,
            seed: self.seed,
            init,
            positivity: match self.positivity {
                PositivityConfig::ProjectEachIter => PositivityPolicy::ProjectEachIter,
                PositivityConfig::ProjectAtEnd => PositivityPolicy::ProjectAtEnd,
            },
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
