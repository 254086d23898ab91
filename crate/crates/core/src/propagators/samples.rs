//! Random smooth potentials for ensembles (calibration, tests, lab).

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::spectral::{Grid, TimeGrid, Trajectory};

/// Ranges for a sum of modulated Gaussian bumps with oscillating
/// time envelopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialFamily {
    pub bumps: usize,
    pub width: (f64, f64),
    pub center: f64,
    pub wavenumber: (f64, f64),
    pub time_frequency: (f64, f64),
    /// Drop the zero mode from every snapshot.
    pub mean_zero: bool,
}

impl Default for PotentialFamily {
    fn default() -> Self {
        Self {
            bumps: 3,
            width: (0.6, 3.0),
            center: 4.0,
            wavenumber: (0.0, 2.0),
            time_frequency: (0.0, 8.0),
            mean_zero: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Bump {
    amp: f64,
    x0: f64,
    width: f64,
    k: f64,
    phase: f64,
    omega: f64,
    chi: f64,
    depth: f64,
}

impl PotentialFamily {
    /// A real potential on `times`; the caller rescales as needed.
    pub fn sample<T: Real>(&self, rng: &mut impl Rng, grid: &Grid<T>, times: TimeGrid) -> Trajectory<T> {
        let uni = |rng: &mut dyn rand::RngCore, (a, b): (f64, f64)| a + (b - a) * rng.gen::<f64>();
        let bumps: Vec<Bump> = (0..self.bumps.max(1))
            .map(|_| Bump {
                amp: uni(rng, (-1.0, 1.0)),
                x0: uni(rng, (-self.center, self.center)),
                width: uni(rng, self.width),
                k: uni(rng, self.wavenumber),
                phase: uni(rng, (0.0, std::f64::consts::TAU)),
                omega: uni(rng, self.time_frequency),
                chi: uni(rng, (0.0, std::f64::consts::TAU)),
                depth: uni(rng, (0.0, 0.9)),
            })
            .collect();
        let traj = Trajectory::from_fn(grid, times, |t, x| {
            let x = x.as_f64();
            let v: f64 = bumps
                .iter()
                .map(|b| {
                    let y = (x - b.x0) / b.width;
                    b.amp
                        * (-0.5 * y * y).exp()
                        * (b.k * x + b.phase).cos()
                        * (1.0 + b.depth * (b.omega * t + b.chi).sin())
                })
                .sum();
            Complex::new(T::lit(v), T::zero())
        });
        if self.mean_zero {
            remove_mean(&traj)
        } else {
            traj
        }
    }
}

/// Zeroes the `xi = 0` coefficient of every snapshot.
pub fn remove_mean<T: Real>(v: &Trajectory<T>) -> Trajectory<T> {
    v.map(|f| {
        let mut g = f.to_frequency();
        g.values_mut()[0] = Complex::new(T::zero(), T::zero());
        g.into_physical()
    })
}
