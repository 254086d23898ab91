//! Propagator settings and the smallness gate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SobolevIndex;

pub const DEFAULT_TRUNCATION_ORDER: usize = 12;
pub const DEFAULT_SMALLNESS_TARGET: f64 = 0.5;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
/// Upper limit on the gate threshold; the difference estimate needs it.
pub const MAX_SMALLNESS_TARGET: f64 = 2.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    /// Subcriticality index fixing the gate norm `L^2_t H^{-1/2+delta}`.
    pub delta: f64,
    pub truncation_order: usize,
    pub c_delta: f64,
    pub smallness_target: f64,
    /// Series stops once a term is below `tail_tolerance * ||psi||`.
    pub tail_tolerance: f64,
}

impl PropagatorConfig {
    /// Defaults with `c_delta` from the cached calibration for `delta`.
    pub fn new(delta: f64) -> Result<Self> {
        let c = super::calibrate::cached_c_delta(delta)?;
        Self::with_constant(delta, c)
    }

    pub fn with_constant(delta: f64, c_delta: f64) -> Result<Self> {
        let cfg = Self {
            delta,
            truncation_order: DEFAULT_TRUNCATION_ORDER,
            c_delta,
            smallness_target: DEFAULT_SMALLNESS_TARGET,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Configuration(format!("delta {} outside (0,1)", self.delta)));
        }
        if self.truncation_order == 0 || self.truncation_order > super::dyson::MAX_ORDER {
            return Err(Error::Configuration(format!(
                "truncation order {} outside 1..={}",
                self.truncation_order,
                super::dyson::MAX_ORDER
            )));
        }
        if !(self.c_delta > 0.0 && self.c_delta.is_finite()) {
            return Err(Error::Configuration(format!("c_delta must be positive, got {}", self.c_delta)));
        }
        if !(self.smallness_target > 0.0 && self.smallness_target <= MAX_SMALLNESS_TARGET) {
            return Err(Error::Configuration(format!(
                "smallness target {} outside (0, 2/3]",
                self.smallness_target
            )));
        }
        if !(self.tail_tolerance >= 0.0) {
            return Err(Error::Configuration("tail tolerance must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        (self.delta / 2.0).min(0.25)
    }

    /// Spatial index of the gate norm.
    pub fn gate_index(&self) -> SobolevIndex {
        SobolevIndex::inhomogeneous(self.delta - 0.5)
    }

    /// `c_delta |t-s|^theta ||V||` for an interval length and potential norm.
    pub fn gate_product(&self, length: f64, v_norm: f64) -> f64 {
        self.c_delta * length.powf(self.theta()) * v_norm
    }
}
