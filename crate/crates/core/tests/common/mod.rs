//! Helpers and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use nlnls::propagators::{gate_profile, PotentialFamily, PropagatorConfig};
use nlnls::spectral::{Grid, GridSpec, SpectralField, TimeGrid, Trajectory};
use num_complex::Complex;
use rand::Rng;

pub type C = Complex<f64>;

pub fn grid(n: usize, length: f64) -> Grid<f64> {
    Grid::new(GridSpec::new(n, length).unwrap()).unwrap()
}

pub fn default_grid() -> Grid<f64> {
    Grid::new(GridSpec::default()).unwrap()
}

pub fn grid_128() -> Grid<f64> {
    grid(128, 64.0 * PI)
}

/// A random smooth real potential rescaled so its gate product on the
/// whole time grid equals `gate`.
pub fn gated_potential(
    rng: &mut impl Rng,
    g: &Grid<f64>,
    times: TimeGrid,
    cfg: &PropagatorConfig,
    gate: f64,
) -> Trajectory<f64> {
    let v = PotentialFamily::default().sample(rng, g, times);
    rescale_to_gate(&v, cfg, gate)
}

pub fn rescale_to_gate(v: &Trajectory<f64>, cfg: &PropagatorConfig, gate: f64) -> Trajectory<f64> {
    let prof = gate_profile(v, cfg).unwrap();
    let len = v.times().t_end - v.times().t_start;
    let now = cfg.gate_product(len, prof.total());
    v.scaled(C::new(gate / now, 0.0))
}

pub fn random_gaussian_state(rng: &mut impl Rng, g: &Grid<f64>) -> SpectralField<f64> {
    let width = 2.0 + 2.0 * rng.gen::<f64>();
    let x0 = 6.0 * (rng.gen::<f64>() - 0.5);
    let k = 1.5 * (rng.gen::<f64>() - 0.5);
    let amp = 0.5 + rng.gen::<f64>();
    SpectralField::from_fn(g, |x| {
        let y = (x - x0) / width;
        C::from_polar(amp * (-0.5 * y * y).exp(), k * x)
    })
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Largest singular value of a row-major complex matrix.
pub fn dense_spectral_norm(m: &[C], n: usize) -> f64 {
    let mat = DMatrix::from_row_slice(n, n, m);
    mat.singular_values().max()
}

/// Strang split-step solver for `i u_t + u_xx = lambda |u|^2 u`,
/// independent of the library's propagators.
pub fn split_step_cubic(phi: &SpectralField<f64>, lambda: f64, t_end: f64, steps: usize) -> SpectralField<f64> {
    use rustfft::FftPlanner;
    let g = phi.grid();
    let n = g.n();
    let l = g.spec().length;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let h = t_end / steps as f64;
    let k2: Vec<f64> = (0..n)
        .map(|k| {
            let m = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let xi = 2.0 * PI * m / l;
            xi * xi
        })
        .collect();
    let half: Vec<C> = k2.iter().map(|q| C::from_polar(1.0, -0.5 * h * q)).collect();
    let mut u: Vec<C> = phi.to_physical().values().to_vec();
    let linear = |u: &mut Vec<C>| {
        fwd.process(u);
        for (z, p) in u.iter_mut().zip(&half) {
            *z *= *p / n as f64;
        }
        inv.process(u);
    };
    for _ in 0..steps {
        linear(&mut u);
        for z in u.iter_mut() {
            *z *= C::from_polar(1.0, -lambda * h * z.norm_sqr());
        }
        linear(&mut u);
    }
    SpectralField::new(g.clone(), u, nlnls::Space::Physical).unwrap()
}
