//! Brute-force reference propagator: the linear ODE
//! `i u' = (-d_xx + V(tau)) u` integrated with classical RK4 on dense
//! frequency-basis matrices, always in `f64`.
//!
//! `V` is linearly interpolated between nodes and RK4 substeps never cross
//! a node, so the kinks of the interpolant sit on step boundaries.

use num_complex::Complex;

use super::dyson::resolve_span;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Grid, GridSpec, Space, SpectralField, Trajectory};

pub const ORACLE_MAX_POINTS: usize = 512;
pub const ORACLE_MAX_HALVINGS: usize = 20;
pub const ORACLE_TOLERANCE: f64 = 1e-10;

type C = Complex<f64>;

#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Substeps per node interval of the accepted run.
    pub substeps: usize,
    pub halvings: usize,
    /// Relative change between the last two runs.
    pub last_change: f64,
}

pub fn oracle_propagate<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    oracle_propagate_report(v, s, t, psi).map(|(f, _)| f)
}

pub fn oracle_propagate_report<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<(SpectralField<T>, OracleReport)> {
    let spec: GridSpec = psi.grid().spec();
    if spec.n_points > ORACLE_MAX_POINTS {
        return Err(Error::contract(format!(
            "oracle limited to {ORACLE_MAX_POINTS} points, grid has {}",
            spec.n_points
        )));
    }
    if v.grid() != psi.grid() {
        return Err(Error::contract("potential and state live on different grids"));
    }
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let g64: Grid<f64> = Grid::new(spec)?;
    let n = spec.n_points;
    let lift = |f: &SpectralField<T>| -> Vec<C> {
        let mut buf: Vec<C> = f
            .to_physical()
            .values()
            .iter()
            .map(|z| C::new(z.re.as_f64(), z.im.as_f64()))
            .collect();
        g64.forward_in_place(&mut buf);
        buf
    };
    let v_hat: Vec<Vec<C>> = (i0..=i1).map(|m| lift(v.snapshot(m))).collect();
    let u0 = lift(psi);
    let dispersion: Vec<f64> = g64.frequencies().iter().map(|x| x * x).collect();
    let h = v.times().dt();
    let norm0 = (u0.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt().max(f64::MIN_POSITIVE);

    let run = |q: usize| -> Vec<C> {
        let mut ode = DenseOde::new(n, &dispersion);
        let mut u = u0.clone();
        let hs = h / q as f64;
        for m in 0..(i1 - i0) {
            for k in 0..q {
                let l0 = k as f64 / q as f64;
                let lm = (k as f64 + 0.5) / q as f64;
                let l1 = (k as f64 + 1.0) / q as f64;
                u = ode.rk4(&u, hs, [l0, lm, l1], &v_hat[m], &v_hat[m + 1]);
            }
        }
        u
    };

    let mut q = 1usize;
    let mut prev = run(q);
    let mut last_change = f64::INFINITY;
    for halving in 1..=ORACLE_MAX_HALVINGS {
        if i1 == i0 {
            last_change = 0.0;
            break;
        }
        q *= 2;
        let next = run(q);
        let diff: f64 = next.iter().zip(&prev).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        last_change = diff / norm0;
        prev = next;
        if last_change.is_finite() && last_change < ORACLE_TOLERANCE {
            let out = finish(psi, &g64, prev);
            return Ok((
                out,
                OracleReport {
                    substeps: q,
                    halvings: halving,
                    last_change,
                },
            ));
        }
    }
    if i1 == i0 {
        return Ok((
            psi.clone(),
            OracleReport {
                substeps: 0,
                halvings: 0,
                last_change,
            },
        ));
    }
    Err(Error::OracleFailure {
        halvings: ORACLE_MAX_HALVINGS,
        last_change,
    })
}

fn finish<T: Real>(psi: &SpectralField<T>, g64: &Grid<f64>, mut u: Vec<C>) -> SpectralField<T> {
    if psi.space() == Space::Physical {
        g64.inverse_in_place(&mut u);
    }
    let vals = u.iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect();
    SpectralField::new(psi.grid().clone(), vals, psi.space()).expect("grid-sized")
}

/// Right-hand side `-i (D + C(tau))` with a dense circulant `C`.
struct DenseOde<'a> {
    n: usize,
    dispersion: &'a [f64],
    matrix: Vec<C>,
    scale: f64,
}

impl<'a> DenseOde<'a> {
    fn new(n: usize, dispersion: &'a [f64]) -> Self {
        Self {
            n,
            dispersion,
            matrix: vec![C::new(0.0, 0.0); n * n],
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    /// Fills `C_{kj} = V^_{(k-j) mod n} / sqrt(n)` for the interpolated potential.
    fn build(&mut self, lambda: f64, a: &[C], b: &[C]) {
        let n = self.n;
        let vh: Vec<C> = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x * (1.0 - lambda) + y * lambda) * self.scale)
            .collect();
        for k in 0..n {
            let row = &mut self.matrix[k * n..(k + 1) * n];
            for (j, z) in row.iter_mut().enumerate() {
                *z = vh[(k + n - j) % n];
            }
        }
    }

    fn rhs(&self, u: &[C]) -> Vec<C> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let row = &self.matrix[k * n..(k + 1) * n];
                let cu = row.iter().zip(u).fold(C::new(0.0, 0.0), |acc, (m, x)| acc + m * x);
                let z = cu + u[k] * self.dispersion[k];
                C::new(z.im, -z.re)
            })
            .collect()
    }

    fn rk4(&mut self, u: &[C], h: f64, lam: [f64; 3], a: &[C], b: &[C]) -> Vec<C> {
        let axpy = |x: &[C], c: f64, y: &[C]| -> Vec<C> {
            x.iter().zip(y).map(|(p, q)| p + q * c).collect()
        };
        self.build(lam[0], a, b);
        let k1 = self.rhs(u);
        self.build(lam[1], a, b);
        let k2 = self.rhs(&axpy(u, 0.5 * h, &k1));
        let k3 = self.rhs(&axpy(u, 0.5 * h, &k2));
        self.build(lam[2], a, b);
        let k4 = self.rhs(&axpy(u, h, &k3));
        (0..self.n)
            .map(|i| u[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect()
    }
}
