//! Fixed-point solver settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::PropagatorConfig;

pub const DEFAULT_FP_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 60;
pub const DEFAULT_STEPS_PER_UNIT: f64 = 256.0;
pub const DEFAULT_CONTRACTION_LIMIT: f64 = 0.55;
pub const DEFAULT_SEAM_TOLERANCE: f64 = 1e-9;
/// Series settings inside the solver: run the Dyson sum to roundoff so the
/// map being iterated does not change with the iterate.
pub const SOLVER_TAIL_TOLERANCE: f64 = 1e-15;
pub const SOLVER_TRUNCATION_ORDER: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Ball radius; `None` means `4 ||phi||^2` of each window's data.
    pub radius: Option<f64>,
    /// Relative `L^2_t H^{1/2}` change that ends the iteration.
    pub fp_tolerance: f64,
    pub max_iterations: usize,
    pub global_horizon: f64,
    pub steps_per_unit: f64,
    /// Ratios above this are reported as gate miscalibration (ratios
    /// above 1 abort).
    pub contraction_limit: f64,
    pub seam_tolerance: f64,
    /// Cap on a window's length.
    pub max_local_time: f64,
    pub propagator: PropagatorConfig,
}

impl SolverConfig {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_propagator(PropagatorConfig::new(delta)?)
    }

    /// Solver defaults around `prop`; the series tail settings are
    /// tightened to [`SOLVER_TAIL_TOLERANCE`] / [`SOLVER_TRUNCATION_ORDER`].
    pub fn with_propagator(mut prop: PropagatorConfig) -> Result<Self> {
        prop.tail_tolerance = SOLVER_TAIL_TOLERANCE;
        prop.truncation_order = SOLVER_TRUNCATION_ORDER;
        let cfg = Self {
            radius: None,
            fp_tolerance: DEFAULT_FP_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            global_horizon: 1.0,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            contraction_limit: DEFAULT_CONTRACTION_LIMIT,
            seam_tolerance: DEFAULT_SEAM_TOLERANCE,
            max_local_time: 1.0,
            propagator: prop,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.propagator.validate()?;
        let bad = |m: &str| Err(Error::Configuration(m.into()));
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return bad("radius must be positive");
            }
        }
        if !(self.fp_tolerance > 0.0) {
            return bad("fp_tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.global_horizon > 0.0 && self.global_horizon.is_finite()) {
            return bad("global_horizon must be positive");
        }
        if !(self.steps_per_unit >= 1.0 && self.steps_per_unit.is_finite()) {
            return bad("steps_per_unit must be at least 1");
        }
        if !(self.max_local_time > 0.0 && self.max_local_time <= 1.0) {
            return bad("max_local_time must lie in (0, 1]");
        }
        if !(self.contraction_limit > 0.0 && self.contraction_limit < 1.0) {
            return bad("contraction_limit must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps_per_unit
    }

    /// `R` for data of mass `mass`: the override if set, else `4 mass`.
    pub fn radius_for(&self, mass: f64) -> Result<f64> {
        match self.radius {
            Some(r) if r < 4.0 * mass * (1.0 - 1e-12) => Err(Error::Configuration(format!(
                "radius {r} below 4 ||phi||^2 = {}",
                4.0 * mass
            ))),
            Some(r) => Ok(r),
            None => Ok(4.0 * mass),
        }
    }
}
