//! Empirical stand-in for the constant `C_delta` of the multilinear bound:
//! the largest observed `||W^{(1)}_V(t,s)|| / (|t-s|^theta ||V||)` over a
//! random ensemble, times a safety factor.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dyson::conjugated_potential_integral;
use super::probe::operator_norm_estimate;
use super::samples::PotentialFamily;
use crate::error::{Error, Result};
use crate::spectral::{bochner_norm, Grid, GridSpec, SobolevIndex, TimeGrid};

pub const SAFETY_FACTOR: f64 = 1.5;
pub const CALIBRATION_SEED: u64 = 20_240_601;
pub const MIN_ENSEMBLE: usize = 10;
/// Ensemble size behind [`cached_c_delta`].
pub const CACHED_ENSEMBLE: usize = 24;
pub const CALIBRATION_STEPS_PER_UNIT: f64 = 256.0;
const POWER_ITERATIONS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub delta: f64,
    pub c_delta: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub steps_per_unit: f64,
    pub max_ratio: f64,
    pub safety_factor: f64,
    /// Per-sample measured ratios, in sample order.
    pub ratios: Vec<f64>,
}

impl Calibration {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Calibration on the default grid with the default seed.
pub fn calibrate_c_delta(delta: f64, ensemble_size: usize) -> Result<Calibration> {
    calibrate_with(
        delta,
        ensemble_size,
        CALIBRATION_SEED,
        GridSpec::default(),
        CALIBRATION_STEPS_PER_UNIT,
    )
}

/// The ensemble mixes narrow and wide bumps, slow and fast modulation in
/// space and time, and interval lengths in `[0.05, 1]`.
pub fn calibrate_with(
    delta: f64,
    ensemble_size: usize,
    seed: u64,
    grid: GridSpec,
    steps_per_unit: f64,
) -> Result<Calibration> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::contract(format!("delta must lie in (0,1), got {delta}")));
    }
    if ensemble_size < MIN_ENSEMBLE {
        return Err(Error::contract(format!(
            "calibration ensemble needs at least {MIN_ENSEMBLE} samples, got {ensemble_size}"
        )));
    }
    let g: Grid<f64> = Grid::new(grid)?;
    let theta = (delta / 2.0).min(0.25);
    let idx = SobolevIndex::inhomogeneous(delta - 0.5);
    let kmax = 0.5 * grid.max_frequency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(u64, f64, PotentialFamily)> = (0..ensemble_size)
        .map(|i| {
            let length = 0.05 + 0.95 * rng.gen::<f64>();
            let narrow = i % 3 == 0;
            let fam = PotentialFamily {
                bumps: 1 + (i % 3),
                width: if narrow { (0.25, 0.8) } else { (0.8, 4.0) },
                center: 3.0,
                wavenumber: (0.0, kmax),
                time_frequency: (0.0, 4.0 + 20.0 * rng.gen::<f64>()),
                mean_zero: i % 4 == 1,
            };
            (rng.gen::<u64>(), length, fam)
        })
        .collect();
    let ratios = jobs
        .par_iter()
        .map(|(s, length, fam)| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(*s);
            let times = TimeGrid::with_rate(0.0, *length, steps_per_unit)?;
            let v = fam.sample(&mut rng, &g, times);
            let denom = times.t_end.powf(theta) * bochner_norm(&v, 2.0, idx)?;
            let mut probe = conjugated_potential_integral(&v, 0.0, times.t_end)?;
            let num = operator_norm_estimate(&mut probe, POWER_ITERATIONS)?;
            Ok(if denom > 0.0 { num / denom } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    if !(max_ratio > 0.0 && max_ratio.is_finite()) {
        return Err(Error::InvalidInput("calibration ensemble produced no usable ratio".into()));
    }
    Ok(Calibration {
        delta,
        c_delta: max_ratio * SAFETY_FACTOR,
        ensemble_size,
        seed,
        grid,
        steps_per_unit,
        max_ratio,
        safety_factor: SAFETY_FACTOR,
        ratios,
    })
}

/// Process-wide calibration per `delta`, computed on first use.
pub fn cached_c_delta(delta: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("calibration cache").get(&delta.to_bits()) {
        return Ok(*c);
    }
    let c = calibrate_c_delta(delta, CACHED_ENSEMBLE)?.c_delta;
    cache
        .lock()
        .expect("calibration cache")
        .entry(delta.to_bits())
        .or_insert(c);
    Ok(c)
}
