//! Seeded sample streams shared by the verification routines.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::propagators::{gate_profile, PotentialFamily, PropagatorConfig};
use crate::spectral::{Grid, GridSpec, SpectralField, TimeGrid, Trajectory};

/// Seed of the runs the ceilings were frozen from.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub size: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub steps_per_unit: f64,
    /// Range of interval lengths `T` (or `|I|`).
    pub length: (f64, f64),
    pub potentials: PotentialFamily,
}

impl EnsembleSpec {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            grid: GridSpec::default(),
            steps_per_unit: 256.0,
            length: (0.05, 1.0),
            potentials: PotentialFamily::default(),
        }
    }

    /// Same ensemble on a grid with twice the points and twice the time steps.
    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        s.grid.n_points *= 2;
        s.steps_per_unit *= 2.0;
        s
    }

    /// Independent stream for sample `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(index as u64);
        r
    }

    pub fn draw_length(&self, rng: &mut impl Rng) -> f64 {
        let (a, b) = self.length;
        // a whole number of steps
        let t = a + (b - a) * rng.gen::<f64>();
        ((t * self.steps_per_unit).round().max(1.0)) / self.steps_per_unit
    }

    pub fn times(&self, length: f64) -> Result<TimeGrid> {
        TimeGrid::with_rate(0.0, length, self.steps_per_unit)
    }

    /// Runs `f` over every sample index; results keep index order.
    pub fn collect<R: Send>(&self, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
        (0..self.size).into_par_iter().map(f).collect()
    }
}

/// Gaussian envelope of random width, centre, amplitude and modulation.
pub fn random_state(rng: &mut impl Rng, grid: &Grid<f64>) -> SpectralField<f64> {
    let width = 2.0 + 2.0 * rng.gen::<f64>();
    let x0 = 8.0 * (rng.gen::<f64>() - 0.5);
    let k = 2.0 * (rng.gen::<f64>() - 0.5);
    let amp = 0.25 + rng.gen::<f64>();
    let phase = std::f64::consts::TAU * rng.gen::<f64>();
    SpectralField::from_fn(grid, |x| {
        let y = (x - x0) / width;
        Complex::from_polar(amp * (-0.5 * y * y).exp(), k * x + phase)
    })
}

/// A family potential on `times` rescaled to gate product `gate`.
pub fn gated_potential(
    rng: &mut impl Rng,
    family: &PotentialFamily,
    grid: &Grid<f64>,
    times: TimeGrid,
    cfg: &PropagatorConfig,
    gate: f64,
) -> Result<Trajectory<f64>> {
    let v = family.sample(rng, grid, times);
    let prof = gate_profile(&v, cfg)?;
    let now = cfg.gate_product(times.t_end - times.t_start, prof.total());
    Ok(v.scaled(Complex::new(gate / now, 0.0)))
}
