//! Periodic collocation grid standing in for the real line.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default period `64 pi`.
pub const DEFAULT_LENGTH: f64 = 64.0 * PI;
pub const DEFAULT_POINTS: usize = 256;

/// Resolution and period of the torus. Plain data; see [`Grid`] for the
/// handle that carries transform plans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_points: usize,
    pub length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            length: DEFAULT_LENGTH,
        }
    }
}

impl GridSpec {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        let spec = Self { n_points, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 8 || self.n_points % 2 != 0 {
            return Err(Error::contract(format!(
                "grid needs an even number of points >= 8, got {}",
                self.n_points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::contract(format!(
                "grid length must be positive and finite, got {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Signed mode number of FFT slot `k`: `0..n/2-1` then `-n/2..-1`.
    pub fn mode_number(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * PI * self.mode_number(k) as f64 / self.length
    }

    /// Spacing of the frequency lattice, `2 pi / L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn max_frequency(&self) -> f64 {
        PI * self.n_points as f64 / self.length
    }
}

struct GridInner<T: Real> {
    spec: GridSpec,
    dx: T,
    points: Vec<T>,
    frequencies: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    unitary_scale: T,
}

/// Shared handle to a grid plus its FFT plans. Cloning is cheap.
#[derive(Clone)]
pub struct Grid<T: Real> {
    inner: Arc<GridInner<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.inner.spec).finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dx = spec.dx();
        let points = (0..n)
            .map(|j| T::lit(-spec.length / 2.0 + j as f64 * dx))
            .collect();
        let frequencies = (0..n).map(|k| T::lit(spec.frequency(k))).collect();
        Ok(Self {
            inner: Arc::new(GridInner {
                spec,
                dx: T::lit(dx),
                points,
                frequencies,
                forward,
                inverse,
                unitary_scale: T::lit(1.0 / (n as f64).sqrt()),
            }),
        })
    }

    pub fn with_points(n_points: usize, length: f64) -> Result<Self> {
        Self::new(GridSpec::new(n_points, length)?)
    }

    pub fn spec(&self) -> GridSpec {
        self.inner.spec
    }

    pub fn n(&self) -> usize {
        self.inner.spec.n_points
    }

    pub fn length(&self) -> T {
        T::lit(self.inner.spec.length)
    }

    pub fn dx(&self) -> T {
        self.inner.dx
    }

    /// Collocation points `x_j = -L/2 + j dx`.
    pub fn points(&self) -> &[T] {
        &self.inner.points
    }

    /// Frequencies `xi_k` in FFT slot order.
    pub fn frequencies(&self) -> &[T] {
        &self.inner.frequencies
    }

    /// Unitary forward DFT in place.
    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.n());
        self.inner.forward.process(buf);
        let s = self.inner.unitary_scale;
        buf.iter_mut().for_each(|z| *z = *z * s);
    }

    /// Unitary inverse DFT in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.n());
        self.inner.inverse.process(buf);
        let s = self.inner.unitary_scale;
        buf.iter_mut().for_each(|z| *z = *z * s);
    }

    /// Free-flow multiplier `e^{-i t xi^2}` over the frequency slots.
    pub fn free_phase(&self, t: T) -> Vec<Complex<T>> {
        self.frequencies()
            .iter()
            .map(|&xi| crate::scalar::expi(-(t * xi * xi)))
            .collect()
    }

    /// Japanese bracket `<xi> = (1 + xi^2)^{1/2}` per slot.
    pub fn brackets(&self) -> Vec<T> {
        self.frequencies()
            .iter()
            .map(|&xi| (T::one() + xi * xi).sqrt())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(GridSpec::new(7, 1.0).is_err());
        assert!(GridSpec::new(6, 1.0).is_err());
        assert!(GridSpec::new(10, 0.0).is_err());
        assert!(GridSpec::new(10, f64::NAN).is_err());
        assert!(GridSpec::new(8, 1.0).is_ok());
    }

    #[test]
    fn frequency_set_is_symmetric_except_nyquist() {
        let spec = GridSpec::new(16, 2.0 * PI).unwrap();
        let modes: Vec<i64> = (0..16).map(|k| spec.mode_number(k)).collect();
        assert_eq!(modes[0], 0);
        assert_eq!(modes[8], -8);
        for m in 1..8 {
            assert!(modes.contains(&m) && modes.contains(&-m));
        }
        assert!(!modes.contains(&8));
    }

    #[test]
    fn dx_times_n_is_length() {
        let spec = GridSpec::default();
        assert_eq!(spec.dx() * spec.n_points as f64, spec.length);
        let g: Grid<f64> = Grid::new(spec).unwrap();
        assert_eq!(g.points()[0], -spec.length / 2.0);
    }
}
