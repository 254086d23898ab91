//! Black-box linear operators on grid fields and power-iteration norms.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Grid, Space, SpectralField};

type Action<'a, T> = Box<dyn Fn(&SpectralField<T>) -> SpectralField<T> + Send + Sync + 'a>;

const POWER_SEED: u64 = 0x00c0_ffee;

/// An operator known only through its action, plus power-iteration state.
pub struct LinearOperatorProbe<'a, T: Real> {
    grid: Grid<T>,
    apply: Action<'a, T>,
    adjoint: Option<Action<'a, T>>,
    dense_adjoint: Option<Vec<Complex<T>>>,
    /// `||A x_k||` per power-iteration step of the latest estimate.
    pub history: Vec<f64>,
}

impl<'a, T: Real> LinearOperatorProbe<'a, T> {
    pub fn new(
        grid: &Grid<T>,
        apply: impl Fn(&SpectralField<T>) -> SpectralField<T> + Send + Sync + 'a,
    ) -> Self {
        Self {
            grid: grid.clone(),
            apply: Box::new(apply),
            adjoint: None,
            dense_adjoint: None,
            history: Vec::new(),
        }
    }

    pub fn with_adjoint(
        mut self,
        adjoint: impl Fn(&SpectralField<T>) -> SpectralField<T> + Send + Sync + 'a,
    ) -> Self {
        self.adjoint = Some(Box::new(adjoint));
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    pub fn apply(&self, psi: &SpectralField<T>) -> SpectralField<T> {
        (self.apply)(psi)
    }

    /// `A^dagger psi`; without a supplied adjoint the dense matrix is
    /// materialised once and its conjugate transpose used.
    pub fn apply_adjoint(&mut self, psi: &SpectralField<T>) -> SpectralField<T> {
        if let Some(adj) = &self.adjoint {
            return adj(psi);
        }
        let n = self.grid.n();
        if self.dense_adjoint.is_none() {
            let a = self.dense_matrix();
            let mut at = vec![Complex::new(T::zero(), T::zero()); n * n];
            for r in 0..n {
                for c in 0..n {
                    at[c * n + r] = a[r * n + c].conj();
                }
            }
            self.dense_adjoint = Some(at);
        }
        let at = self.dense_adjoint.as_ref().expect("just built");
        let x = psi.to_frequency();
        let y: Vec<Complex<T>> = (0..n)
            .map(|r| {
                at[r * n..(r + 1) * n]
                    .iter()
                    .zip(x.values())
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect();
        let f = SpectralField::new(self.grid.clone(), y, Space::Frequency).expect("grid-sized");
        match psi.space() {
            Space::Frequency => f,
            Space::Physical => f.into_physical(),
        }
    }

    /// Row-major matrix in the unitary frequency basis: entry `(r, c)` is
    /// coefficient `r` of `A e_c`.
    pub fn dense_matrix(&self) -> Vec<Complex<T>> {
        let n = self.grid.n();
        let mut m = vec![Complex::new(T::zero(), T::zero()); n * n];
        for c in 0..n {
            let mut e = SpectralField::zeros(&self.grid, Space::Frequency);
            e.values_mut()[c] = Complex::new(T::one(), T::zero());
            let col = self.apply(&e).into_frequency();
            for (r, z) in col.values().iter().enumerate() {
                m[r * n + c] = *z;
            }
        }
        m
    }
}

/// Power iteration on `A^dagger A` from a fixed-seed start. Returns
/// `||A x_k||` after the last step; `probe.history` keeps every step.
pub fn operator_norm_estimate<T: Real>(
    probe: &mut LinearOperatorProbe<'_, T>,
    iterations: usize,
) -> Result<f64> {
    if iterations == 0 {
        return Err(Error::contract("power iteration needs at least one step"));
    }
    let grid = probe.grid.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut x = SpectralField::from_fn(&grid, |_| {
        Complex::new(T::lit(rng.gen::<f64>() - 0.5), T::lit(rng.gen::<f64>() - 0.5))
    })
    .into_frequency();
    probe.history.clear();
    for _ in 0..iterations {
        let nx = x.l2_norm();
        x = x.scaled(Complex::new(T::one() / nx, T::zero()));
        let y = probe.apply(&x);
        let ny = y.l2_norm().as_f64();
        probe.history.push(ny);
        if ny == 0.0 {
            break;
        }
        x = probe.apply_adjoint(&y).into_frequency();
        if x.l2_norm() == T::zero() {
            break;
        }
    }
    Ok(*probe.history.last().expect("one step"))
}
