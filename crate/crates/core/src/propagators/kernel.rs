//! Hilbert–Schmidt norm of the conjugated integral, by two routes:
//! the kernel `K(xi, eta) = int e^{i tau (xi^2 - eta^2)} m_{xi - eta}(tau)`
//! summed directly over a frequency lattice, and the weighted space-time
//! norm `||V||_{L^2_t Hdot^{-1/2}} / sqrt 2` it reduces to.
//!
//! The lattice is the full `2 pi / L` lattice (not the grid's aliased
//! frequency set). Temporal frequencies are kept inside the band
//! `|xi^2 - eta^2| <= pi / h` that the time grid resolves.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dyson::resolve_span;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{bochner_norm, SobolevIndex, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsKernelNorms {
    pub direct: f64,
    pub transform: f64,
    pub relative_gap: f64,
}

pub fn hs_kernel_norm<T: Real>(v: &Trajectory<T>, s: f64, t: f64) -> Result<HsKernelNorms> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let grid = v.grid();
    let n = grid.n();
    let times = v.times();
    let scale = (n as f64).sqrt();
    // m_r(tau_m) per mode and node (modulus only matters)
    let coeffs: Vec<Vec<Complex<f64>>> = (i0..=i1)
        .map(|m| {
            v.snapshot(m)
                .to_frequency()
                .values()
                .iter()
                .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()) / scale)
                .collect()
        })
        .collect();
    for row in &coeffs {
        let peak = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if row[0].norm() > 1e-10 * peak.max(f64::MIN_POSITIVE) && row[0].norm() > 1e-300 {
            return Err(Error::contract("potential must be mean zero for the kernel route"));
        }
    }
    if i0 == i1 {
        return Ok(HsKernelNorms {
            direct: 0.0,
            transform: 0.0,
            relative_gap: 0.0,
        });
    }

    let h = times.dt();
    let weights = times.trapezoid_weights(i0, i1);
    let delta = grid.spec().frequency_step();
    let band = std::f64::consts::PI / h;

    let direct_sq: f64 = (1..n)
        .into_par_iter()
        .map(|k| {
            let r = grid.spec().frequency(k);
            let a: Vec<Complex<f64>> = coeffs.iter().zip(&weights).map(|(c, w)| c[k] * *w).collect();
            if a.iter().all(|z| z.norm_sqr() == 0.0) {
                return 0.0;
            }
            mode_sum(&a, r, delta, h, band)
        })
        .sum();

    let transform = {
        let window = v.window(i0, i1)?;
        bochner_norm(&window, 2.0, SobolevIndex::homogeneous(-0.5))?.as_f64() / 2f64.sqrt()
    };
    let direct = direct_sq.sqrt();
    let denom = direct.max(transform);
    Ok(HsKernelNorms {
        direct,
        transform,
        relative_gap: if denom > 0.0 { (direct - transform).abs() / denom } else { 0.0 },
    })
}

/// `sum_xi |K(xi, xi - r)|^2` over the lattice points `xi = j delta` in the
/// band. With `omega_j = r (2 xi_j - r)` linear in `j`, the lattice sum of
/// `e^{i (tau_m - tau_m') omega_j}` is a Dirichlet sum in closed form, so
/// the total is `sum_{m, m'} a_m conj(a_m') D(m - m')`.
fn mode_sum(a: &[Complex<f64>], r: f64, delta: f64, h: f64, band: f64) -> f64 {
    // |r (2 j delta - r)| <= band
    let lo_xi = 0.5 * (r - band / r.abs());
    let hi_xi = 0.5 * (r + band / r.abs());
    let j_lo = (lo_xi / delta).ceil() as i64;
    let j_hi = (hi_xi / delta).floor() as i64;
    if j_hi < j_lo {
        return 0.0;
    }
    let count = (j_hi - j_lo + 1) as f64;
    let mid = 0.5 * (j_lo + j_hi) as f64;
    let m = a.len();
    // D(d) = sum_j e^{i d h r (2 j delta - r)}
    let dirichlet: Vec<Complex<f64>> = (0..m)
        .map(|d| {
            let lag = d as f64 * h;
            let theta = (2.0 * r * delta * lag).rem_euclid(std::f64::consts::TAU);
            let theta = if theta > std::f64::consts::PI { theta - std::f64::consts::TAU } else { theta };
            let amp = if theta.abs() < 1e-12 {
                count
            } else {
                (0.5 * count * theta).sin() / (0.5 * theta).sin()
            };
            Complex::from_polar(amp, theta * mid - lag * r * r)
        })
        .collect();
    let mut total = 0.0;
    for i in 0..m {
        total += a[i].norm_sqr() * dirichlet[0].re;
        for j in 0..i {
            // pair (i, j) and (j, i) together
            total += 2.0 * (a[i] * a[j].conj() * dirichlet[i - j]).re;
        }
    }
    total
}
