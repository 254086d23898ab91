//! Complex fields on the grid, tagged with the space they live in.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Physical,
    Frequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// physical -> frequency
    Forward,
    /// frequency -> physical
    Inverse,
}

impl Direction {
    pub fn source(self) -> Space {
        match self {
            Direction::Forward => Space::Physical,
            Direction::Inverse => Space::Frequency,
        }
    }

    pub fn target(self) -> Space {
        match self {
            Direction::Forward => Space::Frequency,
            Direction::Inverse => Space::Physical,
        }
    }
}

/// Samples `f(x_j)` in physical space, or unitary DFT coefficients in
/// frequency space. Both representations carry the same `dx`-weighted
/// L2 norm.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
    space: Space,
}

impl<T: Real> SpectralField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>, space: Space) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::contract(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self {
            grid,
            values,
            space,
        })
    }

    pub fn zeros(grid: &Grid<T>, space: Space) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.n()],
            grid: grid.clone(),
            space,
        }
    }

    /// Physical-space field sampled from `f(x)`.
    pub fn from_fn(grid: &Grid<T>, mut f: impl FnMut(T) -> Complex<T>) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self {
            grid: grid.clone(),
            values,
            space: Space::Physical,
        }
    }

    pub fn from_real_fn(grid: &Grid<T>, mut f: impl FnMut(T) -> T) -> Self {
        Self::from_fn(grid, |x| Complex::new(f(x), T::zero()))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Same field in physical space (no-op if already there).
    pub fn to_physical(&self) -> Self {
        match self.space {
            Space::Physical => self.clone(),
            Space::Frequency => self.transformed_unchecked(Direction::Inverse),
        }
    }

    pub fn to_frequency(&self) -> Self {
        match self.space {
            Space::Frequency => self.clone(),
            Space::Physical => self.transformed_unchecked(Direction::Forward),
        }
    }

    pub fn into_physical(self) -> Self {
        match self.space {
            Space::Physical => self,
            Space::Frequency => self.transformed_unchecked(Direction::Inverse),
        }
    }

    pub fn into_frequency(self) -> Self {
        match self.space {
            Space::Frequency => self,
            Space::Physical => self.transformed_unchecked(Direction::Forward),
        }
    }

    fn transformed_unchecked(&self, dir: Direction) -> Self {
        let mut values = self.values.clone();
        match dir {
            Direction::Forward => self.grid.forward_in_place(&mut values),
            Direction::Inverse => self.grid.inverse_in_place(&mut values),
        }
        Self {
            grid: self.grid.clone(),
            values,
            space: dir.target(),
        }
    }

    /// `dx * sum |v|^2`; identical in either space by Parseval.
    pub fn l2_norm_sq(&self) -> T {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<T>()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_sq().sqrt()
    }

    /// Largest modulus among the stored values.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `<self, other> = dx * sum conj(self) other`, both moved to a common space.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_compatible(other)?;
        let o = if other.space == self.space {
            std::borrow::Cow::Borrowed(other)
        } else if self.space == Space::Physical {
            std::borrow::Cow::Owned(other.to_physical())
        } else {
            std::borrow::Cow::Owned(other.to_frequency())
        };
        let s: Complex<T> = self
            .values
            .iter()
            .zip(o.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::contract("fields live on different grids"));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|z| *z = *z * c);
        out
    }

    /// `self + c * other`, result in `self`'s space.
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let o = match (self.space, other.space) {
            (a, b) if a == b => other.clone(),
            (Space::Physical, _) => other.to_physical(),
            _ => other.to_frequency(),
        };
        let mut out = self.clone();
        out.values
            .iter_mut()
            .zip(o.values.iter())
            .for_each(|(a, b)| *a = *a + *b * c);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex::new(-T::one(), T::zero()), other)
    }

    /// L2 distance, used throughout the tests.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.l2_norm())
    }

    /// Pointwise `|f|^2` as a real-valued physical field.
    pub fn modulus_sq(&self) -> Self {
        let p = self.to_physical();
        let values = p
            .values
            .iter()
            .map(|z| Complex::new(z.norm_sqr(), T::zero()))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
            space: Space::Physical,
        }
    }

    /// Samples of the whole-line transform `(2 pi)^{-1/2} int e^{-i x xi} f dx`
    /// at the grid frequencies, FFT slot order.
    pub fn continuum_transform(&self) -> Vec<Complex<T>> {
        let f = self.to_frequency();
        let n = self.grid.n();
        let spec = self.grid.spec();
        let scale = T::lit(spec.dx() * (n as f64).sqrt() / (2.0 * std::f64::consts::PI).sqrt());
        f.values
            .iter()
            .enumerate()
            .map(|(k, z)| {
                // grid starts at -L/2, contributing e^{i xi_k L/2} = (-1)^mode
                let sign = if spec.mode_number(k).rem_euclid(2) == 0 {
                    T::one()
                } else {
                    -T::one()
                };
                *z * (scale * sign)
            })
            .collect()
    }
}

/// Unitary DFT between the two spaces. Errors if `f` is not in the
/// direction's source space.
pub fn transform<T: Real>(f: &SpectralField<T>, direction: Direction) -> Result<SpectralField<T>> {
    if f.space != direction.source() {
        return Err(Error::contract(format!(
            "{:?} transform expects a {:?} field, got {:?}",
            direction,
            direction.source(),
            f.space
        )));
    }
    Ok(f.transformed_unchecked(direction))
}

/// Pointwise multiplication by `weights` in frequency space.
///
/// A frequency-space input yields a frequency-space output. A physical-space
/// input is transformed, multiplied and transformed back, so the result is
/// again physical.
pub fn apply_multiplier<T: Real>(
    f: &SpectralField<T>,
    weights: &[Complex<T>],
) -> Result<SpectralField<T>> {
    if weights.len() != f.grid.n() {
        return Err(Error::contract(format!(
            "multiplier has {} weights but grid has {} points",
            weights.len(),
            f.grid.n()
        )));
    }
    let mut g = f.to_frequency();
    g.values
        .iter_mut()
        .zip(weights)
        .for_each(|(z, w)| *z = *z * *w);
    Ok(match f.space {
        Space::Frequency => g,
        Space::Physical => g.into_physical(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Grid<f64> {
        Grid::new(GridSpec::new(n, l).unwrap()).unwrap()
    }

    fn random_field(g: &Grid<f64>, rng: &mut ChaCha8Rng) -> SpectralField<f64> {
        SpectralField::from_fn(g, |_| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn constant_field_concentrates_on_zero_mode() {
        let g = grid(64, 10.0);
        let f = SpectralField::from_real_fn(&g, |_| 1.0);
        let fh = transform(&f, Direction::Forward).unwrap();
        assert!((fh.values()[0].re - 8.0).abs() < 1e-12);
        for z in &fh.values()[1..] {
            assert!(z.norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid(128, 20.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f = random_field(&g, &mut rng);
            let fh = transform(&f, Direction::Forward).unwrap();
            let back = transform(&fh, Direction::Inverse).unwrap();
            let rel = back.distance(&f).unwrap() / f.l2_norm();
            assert!(rel < 1e-12, "round trip {rel}");
            let parseval = (fh.l2_norm() - f.l2_norm()).abs() / f.l2_norm();
            assert!(parseval < 1e-12);
        }
    }

    #[test]
    fn wrong_space_is_rejected() {
        let g = grid(16, 1.0);
        let f = SpectralField::zeros(&g, Space::Physical);
        assert!(matches!(
            transform(&f, Direction::Inverse),
            Err(Error::Contract(_))
        ));
        assert!(apply_multiplier(&f, &[Complex::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = grid(512, 64.0 * PI);
        let f = SpectralField::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let fh = f.continuum_transform();
        for (k, z) in fh.iter().enumerate() {
            let xi = g.frequencies()[k];
            let exact = (-xi * xi / 2.0).exp();
            assert!((z.re - exact).abs() < 1e-8 && z.im.abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn identity_and_plane_wave_multipliers() {
        let g = grid(64, 2.0 * PI * 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_field(&g, &mut rng);
        let ones = vec![Complex::new(1.0, 0.0); 64];
        let same = apply_multiplier(&f, &ones).unwrap();
        assert!(same.distance(&f).unwrap() < 1e-13);

        let k1 = 5usize;
        let xi1 = g.frequencies()[k1];
        let wave = SpectralField::from_fn(&g, |x| Complex::new(0.0, xi1 * x).exp());
        let t = 0.37;
        let out = apply_multiplier(&wave, &g.free_phase(t)).unwrap();
        let expect = wave.scaled(Complex::new(0.0, -t * xi1 * xi1).exp());
        assert!(out.distance(&expect).unwrap() < 1e-12);
        assert_eq!(out.space(), Space::Physical);
    }

    #[test]
    fn bracket_multiplier_matches_dense_matrix() {
        // Dense oracle: F^{-1} diag(w) F built column by column from the DFT sum.
        let n = 64;
        let g = grid(n, 32.0);
        let f = SpectralField::from_real_fn(&g, |x| 1.0 / x.cosh());
        let w: Vec<Complex<f64>> = g
            .brackets()
            .iter()
            .map(|b| Complex::new(b.sqrt(), 0.0))
            .collect();
        let fast = apply_multiplier(&f, &w).unwrap();
        let mut dense = vec![Complex::new(0.0, 0.0); n];
        for (j, out) in dense.iter_mut().enumerate() {
            for (l, fl) in f.values().iter().enumerate() {
                let mut kern = Complex::new(0.0, 0.0);
                for (k, wk) in w.iter().enumerate() {
                    let ph = 2.0 * PI * (k as f64) * (j as f64 - l as f64) / n as f64;
                    kern += wk * Complex::new(0.0, ph).exp();
                }
                *out += kern * fl / n as f64;
            }
        }
        for (a, b) in fast.values().iter().zip(&dense) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn multiplier_composition_is_product() {
        let g = grid(128, 40.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_field(&g, &mut rng).into_frequency();
        let m1: Vec<_> = (0..128).map(|_| Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let m2: Vec<_> = (0..128).map(|_| Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let prod: Vec<_> = m1.iter().zip(&m2).map(|(a, b)| a * b).collect();
        let two = apply_multiplier(&apply_multiplier(&f, &m2).unwrap(), &m1).unwrap();
        let one = apply_multiplier(&f, &prod).unwrap();
        for (a, b) in two.values().iter().zip(one.values()) {
            assert!((a - b).norm() <= 1e-13 * (1.0 + b.norm()));
        }
    }
}
