//! Uniform time grids and the trajectories sampled on them.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::{Space, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::contract(format!(
                "time grid needs t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if n_steps == 0 {
            return Err(Error::contract("time grid needs at least one step"));
        }
        Ok(Self {
            t_start,
            t_end,
            n_steps,
        })
    }

    /// `[t_start, t_start + duration]` with `round(duration * steps_per_unit)` steps.
    pub fn with_rate(t_start: f64, duration: f64, steps_per_unit: f64) -> Result<Self> {
        let n = (duration * steps_per_unit).round().max(1.0) as usize;
        Self::new(t_start, t_start + duration, n)
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn node(&self, m: usize) -> f64 {
        if m >= self.n_steps {
            self.t_end
        } else {
            self.t_start + m as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|m| self.node(m)).collect()
    }

    /// Nearest node to `t`, and whether `t` had to be moved to reach it.
    pub fn snap(&self, t: f64) -> Result<(usize, bool)> {
        let dt = self.dt();
        if t < self.t_start - 0.5 * dt || t > self.t_end + 0.5 * dt || !t.is_finite() {
            return Err(Error::contract(format!(
                "time {t} outside [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        let m = ((t - self.t_start) / dt).round().clamp(0.0, self.n_steps as f64) as usize;
        let snapped = (self.node(m) - t).abs() > 1e-9 * dt.max(1.0);
        Ok((m, snapped))
    }

    /// Sub-grid over nodes `i0..=i1`.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        if i0 >= i1 || i1 > self.n_steps {
            return Err(Error::contract(format!(
                "invalid node range {i0}..={i1} of {}",
                self.n_steps
            )));
        }
        Ok(Self {
            t_start: self.node(i0),
            t_end: self.node(i1),
            n_steps: i1 - i0,
        })
    }

    /// Trapezoid weights for nodes `i0..=i1`.
    pub fn trapezoid_weights(&self, i0: usize, i1: usize) -> Vec<f64> {
        let h = self.dt();
        (i0..=i1)
            .map(|m| if m == i0 || m == i1 { 0.5 * h } else { h })
            .collect()
    }
}

/// Physical-space snapshots, one per node of `times`.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    grid: Grid<T>,
    times: TimeGrid,
    snapshots: Vec<SpectralField<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(grid: Grid<T>, times: TimeGrid, snapshots: Vec<SpectralField<T>>) -> Result<Self> {
        if snapshots.len() != times.n_nodes() {
            return Err(Error::contract(format!(
                "trajectory has {} snapshots for {} nodes",
                snapshots.len(),
                times.n_nodes()
            )));
        }
        let snapshots = snapshots
            .into_iter()
            .map(|s| {
                if s.grid() != &grid {
                    Err(Error::contract("snapshot grid differs from trajectory grid"))
                } else {
                    Ok(s.into_physical())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            times,
            snapshots,
        })
    }

    pub fn from_fn(grid: &Grid<T>, times: TimeGrid, mut f: impl FnMut(f64, T) -> Complex<T>) -> Self {
        let snapshots = times
            .nodes()
            .into_iter()
            .map(|t| SpectralField::from_fn(grid, |x| f(t, x)))
            .collect();
        Self {
            grid: grid.clone(),
            times,
            snapshots,
        }
    }

    pub fn zeros(grid: &Grid<T>, times: TimeGrid) -> Self {
        Self::constant(grid, times, &SpectralField::zeros(grid, Space::Physical))
    }

    pub fn constant(grid: &Grid<T>, times: TimeGrid, snapshot: &SpectralField<T>) -> Self {
        let s = snapshot.to_physical();
        Self {
            grid: grid.clone(),
            times,
            snapshots: vec![s; times.n_nodes()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField<T>] {
        &self.snapshots
    }

    pub fn snapshot(&self, m: usize) -> &SpectralField<T> {
        &self.snapshots[m]
    }

    pub fn last(&self) -> &SpectralField<T> {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn map(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            times: self.times,
            snapshots: self.snapshots.iter().map(|s| f(s).into_physical()).collect(),
        }
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        self.map(|s| s.scaled(c))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_matching(other)?;
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid.clone(),
            times: self.times,
            snapshots,
        })
    }

    pub fn check_matching(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::contract("trajectories have different grids"));
        }
        Ok(())
    }

    /// Nodes `i0..=i1` as their own trajectory.
    pub fn window(&self, i0: usize, i1: usize) -> Result<Self> {
        let times = self.times.slice(i0, i1)?;
        Ok(Self {
            grid: self.grid.clone(),
            times,
            snapshots: self.snapshots[i0..=i1].to_vec(),
        })
    }

    /// Glue `next` after `self`; the shared seam node is taken from `next`.
    pub fn concat(&self, next: &Self) -> Result<Self> {
        let dt_a = self.times.dt();
        let dt_b = next.times.dt();
        if self.grid != next.grid
            || (self.times.t_end - next.times.t_start).abs() > 1e-9 * dt_a.max(1.0)
            || (dt_a - dt_b).abs() > 1e-9 * dt_a
        {
            return Err(Error::contract("trajectories are not adjacent on a common step"));
        }
        let mut snapshots = self.snapshots[..self.snapshots.len() - 1].to_vec();
        snapshots.extend(next.snapshots.iter().cloned());
        let times = TimeGrid::new(
            self.times.t_start,
            next.times.t_end,
            self.times.n_steps + next.times.n_steps,
        )?;
        Ok(Self {
            grid: self.grid.clone(),
            times,
            snapshots,
        })
    }

    /// Replace every snapshot with `weights`-multiplied copy (e.g. `a(D) rho`).
    pub fn multiplied(&self, weights: &[Complex<T>]) -> Result<Self> {
        let snapshots = self
            .snapshots
            .iter()
            .map(|s| super::field::apply_multiplier(s, weights))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid.clone(),
            times: self.times,
            snapshots,
        })
    }
}
