//! Scenario file: TOML with nested sections, every key optional.

use std::path::{Path, PathBuf};

use nlnls::density::{read_snapshots, SolverConfig};
use nlnls::propagators::{cached_c_delta, PropagatorConfig};
use nlnls::spectral::{Grid, GridSpec, SpectralField, Space};
use nlnls::{InitialData, SymbolKind, SymbolSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::{CliError, ExitCode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridSection,
    pub time: TimeSection,
    pub symbol: SymbolSection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    pub verify: VerifySection,
    pub convergence: ConvergenceSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub horizon: f64,
    pub steps_per_unit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolChoice {
    Zero,
    Constant,
    FractionalBracket,
    CmDnlsRegularized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolSection {
    pub kind: SymbolChoice,
    pub delta: f64,
    pub sign: f64,
    /// Real and imaginary part of a constant symbol.
    pub value: f64,
    pub imag: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Sech,
    PlaneModulated,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub family: Family,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub velocity: f64,
    pub wavenumber: f64,
    /// Snapshot file for `family = "file"`; the first snapshot is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_delta: Option<f64>,
    pub fp_tolerance: f64,
    pub max_iterations: usize,
    pub truncation_order: usize,
    pub tail_tolerance: f64,
    pub smallness_target: f64,
    pub contraction_limit: f64,
    pub seam_tolerance: f64,
    pub max_local_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Estimate ids, or `"all"`.
    pub estimates: Vec<String>,
    pub ensemble_size: usize,
    pub max_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub time_rates: Vec<f64>,
    pub orders: Vec<usize>,
    pub reference_order: usize,
    pub sizes: Vec<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: nlnls::estimates::DEFAULT_SEED,
            output_dir: PathBuf::from("nlnls-out"),
            grid: GridSection::default(),
            time: TimeSection::default(),
            symbol: SymbolSection::default(),
            initial: InitialSection::default(),
            solver: SolverSection::default(),
            verify: VerifySection::default(),
            convergence: ConvergenceSection::default(),
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 256, length: 64.0 * std::f64::consts::PI }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { horizon: 1.0, steps_per_unit: 256.0 }
    }
}

impl Default for SymbolSection {
    fn default() -> Self {
        Self { kind: SymbolChoice::FractionalBracket, delta: 0.5, sign: 1.0, value: 0.0, imag: 0.0 }
    }
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            family: Family::Gaussian,
            amplitude: 0.2,
            width: 2.0,
            center: 0.0,
            velocity: 0.0,
            wavenumber: 1.0,
            path: None,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        use nlnls::density::*;
        Self {
            radius: None,
            c_delta: None,
            fp_tolerance: DEFAULT_FP_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            truncation_order: SOLVER_TRUNCATION_ORDER,
            tail_tolerance: SOLVER_TAIL_TOLERANCE,
            smallness_target: nlnls::propagators::config::DEFAULT_SMALLNESS_TARGET,
            contraction_limit: DEFAULT_CONTRACTION_LIMIT,
            seam_tolerance: DEFAULT_SEAM_TOLERANCE,
            max_local_time: 1.0,
        }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { estimates: Vec::new(), ensemble_size: 50, max_order: nlnls::estimates::MAX_MULTILINEAR_ORDER }
    }
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            time_rates: vec![64.0, 128.0, 256.0, 512.0],
            orders: vec![4, 6, 8, 10],
            reference_order: 40,
            sizes: vec![64, 128, 256, 512],
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::new(ExitCode::Config, "configuration", msg)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical TOML with the output directory blanked,
    /// so relocating a run does not change its identity.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let digest = Sha256::digest(c.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn is_linear(&self) -> bool {
        match self.symbol.kind {
            SymbolChoice::Zero => true,
            SymbolChoice::Constant => self.symbol.value == 0.0 && self.symbol.imag == 0.0,
            _ => self.symbol.sign == 0.0,
        }
    }

    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        GridSpec::new(self.grid.n, self.grid.length)
            .and_then(Grid::new)
            .map_err(|e| config_error(e.to_string()))
    }

    pub fn symbol(&self) -> Result<SymbolSpec, CliError> {
        let s = &self.symbol;
        let kind = match s.kind {
            SymbolChoice::Zero => SymbolKind::Constant { re: 0.0, im: 0.0 },
            SymbolChoice::Constant => SymbolKind::Constant { re: s.value, im: s.imag },
            SymbolChoice::FractionalBracket => SymbolKind::FractionalBracket { sign: s.sign },
            SymbolChoice::CmDnlsRegularized => SymbolKind::CmDnlsRegularized { sign: s.sign },
        };
        SymbolSpec::new(kind, s.delta).map_err(|e| config_error(e.to_string()))
    }

    /// `None` for file data.
    pub fn initial_family(&self) -> Option<InitialData> {
        let i = &self.initial;
        match i.family {
            Family::Gaussian => Some(InitialData::Gaussian {
                amplitude: i.amplitude,
                width: i.width,
                center: i.center,
                velocity: i.velocity,
            }),
            Family::Sech => Some(InitialData::Sech {
                amplitude: i.amplitude,
                width: i.width,
                center: i.center,
                velocity: i.velocity,
            }),
            Family::PlaneModulated => Some(InitialData::PlaneModulated {
                amplitude: i.amplitude,
                width: i.width,
                wavenumber: i.wavenumber,
            }),
            Family::File => None,
        }
    }

    pub fn initial(&self, grid: &Grid<f64>) -> Result<SpectralField<f64>, CliError> {
        match self.initial_family() {
            Some(d) => d.sample(grid).map_err(|e| config_error(e.to_string())),
            None => {
                let path = self
                    .initial
                    .path
                    .as_ref()
                    .ok_or_else(|| config_error("initial.path is required for family = \"file\""))?;
                let snaps = read_snapshots(path, grid).map_err(|e| config_error(e.to_string()))?;
                let first = snaps
                    .into_iter()
                    .next()
                    .ok_or_else(|| config_error(format!("{} holds no snapshot", path.display())))?;
                debug_assert_eq!(first.space(), Space::Physical);
                Ok(first)
            }
        }
    }

    pub fn propagator(&self) -> Result<PropagatorConfig, CliError> {
        let s = &self.solver;
        let delta = self.symbol.delta;
        let c = match s.c_delta {
            Some(c) => c,
            None => cached_c_delta(delta).map_err(|e| config_error(e.to_string()))?,
        };
        let mut p = PropagatorConfig::with_constant(delta, c).map_err(|e| config_error(e.to_string()))?;
        p.truncation_order = s.truncation_order;
        p.tail_tolerance = s.tail_tolerance;
        p.smallness_target = s.smallness_target;
        p.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(p)
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let mut cfg = SolverConfig::with_propagator(self.propagator()?).map_err(|e| config_error(e.to_string()))?;
        cfg.propagator.truncation_order = s.truncation_order;
        cfg.propagator.tail_tolerance = s.tail_tolerance;
        cfg.radius = s.radius;
        cfg.fp_tolerance = s.fp_tolerance;
        cfg.max_iterations = s.max_iterations;
        cfg.global_horizon = self.time.horizon;
        cfg.steps_per_unit = self.time.steps_per_unit;
        cfg.contraction_limit = s.contraction_limit;
        cfg.seam_tolerance = s.seam_tolerance;
        cfg.max_local_time = s.max_local_time;
        cfg.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks that do not need a calibration run.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.symbol()?;
        if self.initial.family == Family::File && self.initial.path.is_none() {
            return Err(config_error("initial.path is required for family = \"file\""));
        }
        let steps = self.time.horizon * self.time.steps_per_unit;
        if !(self.time.horizon > 0.0) || (steps - steps.round()).abs() > 1e-9 {
            return Err(config_error(format!(
                "time.horizon {} is not a whole number of steps at {} per unit",
                self.time.horizon, self.time.steps_per_unit
            )));
        }
        Ok(())
    }
}
