//! Sobolev norms in space and Bochner (mixed space-time) norms.

use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::time::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Homogeneity {
    /// weight `<xi>^s`
    Inhomogeneous,
    /// weight `|xi|^s`; the zero mode is dropped when `s < 0`
    Homogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneity: Homogeneity,
}

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex {
        s: 0.0,
        homogeneity: Homogeneity::Inhomogeneous,
    };

    pub fn inhomogeneous(s: f64) -> Self {
        Self {
            s,
            homogeneity: Homogeneity::Inhomogeneous,
        }
    }

    pub fn homogeneous(s: f64) -> Self {
        Self {
            s,
            homogeneity: Homogeneity::Homogeneous,
        }
    }

    /// Weight at frequency `xi`, `None` where the weight is undefined.
    pub fn weight(&self, xi: f64) -> Option<f64> {
        match self.homogeneity {
            Homogeneity::Inhomogeneous => Some((1.0 + xi * xi).powf(self.s / 2.0)),
            Homogeneity::Homogeneous => {
                if xi == 0.0 {
                    if self.s < 0.0 {
                        None
                    } else if self.s == 0.0 {
                        Some(1.0)
                    } else {
                        Some(0.0)
                    }
                } else {
                    Some(xi.abs().powf(self.s))
                }
            }
        }
    }

    /// Squared weights per FFT slot, 0 where undefined.
    pub fn weights_sq<T: Real>(&self, freqs: &[T]) -> Vec<f64> {
        freqs
            .iter()
            .map(|xi| self.weight(xi.as_f64()).map_or(0.0, |w| w * w))
            .collect()
    }
}

/// Per-mode `dx |f_k|^2` in frequency space.
pub(crate) fn mode_power<T: Real>(f: &SpectralField<T>) -> Vec<f64> {
    let fh = f.to_frequency();
    let dx = f.grid().dx().as_f64();
    fh.values().iter().map(|z| dx * z.norm_sqr().as_f64()).collect()
}

/// `(sum_k w(xi_k)^2 |f^(xi_k)|^2 2pi/L)^{1/2}` with `f^` the whole-line
/// transform samples; equals the usual L2 norm at `s = 0`.
pub fn sobolev_norm<T: Real>(f: &SpectralField<T>, idx: SobolevIndex) -> T {
    let w2 = idx.weights_sq(f.grid().frequencies());
    let s: f64 = mode_power(f).iter().zip(&w2).map(|(p, w)| p * w).sum();
    T::lit(s.sqrt())
}

/// Norm in `X + Y` for two diagonal spaces, minimised over frequency splits.
///
/// Modes are ranked by how much cheaper they are in `b` than in `a`; every
/// prefix of that ranking is tried as the `b` part. Modes undefined in one
/// space always go to the other.
pub fn sum_space_norm<T: Real>(f: &SpectralField<T>, a: SobolevIndex, b: SobolevIndex) -> T {
    let freqs = f.grid().frequencies();
    let p = mode_power(f);
    let wa = a.weights_sq(freqs);
    let wb = b.weights_sq(freqs);
    let order = split_order(freqs, a, b);
    let fixed_a: f64 = forced_a(freqs, a, b).iter().map(|&k| p[k] * wa[k]).sum();
    // suffix sums, so the a part of every split is summed rather than subtracted
    let mut a_tail = vec![0.0; order.len() + 1];
    for (i, &(k, _)) in order.iter().enumerate().rev() {
        a_tail[i] = a_tail[i + 1] + p[k] * wa[k];
    }
    let mut b_part: f64 = forced_b(freqs, a, b).iter().map(|&k| p[k] * wb[k]).sum();
    let mut best = (a_tail[0] + fixed_a).sqrt() + b_part.sqrt();
    for (i, &(k, _)) in order.iter().enumerate() {
        b_part += p[k] * wb[k];
        best = best.min((a_tail[i + 1] + fixed_a).sqrt() + b_part.sqrt());
    }
    T::lit(best)
}

fn defined(idx: SobolevIndex, xi: f64) -> bool {
    idx.weight(xi).is_some()
}

/// Modes defined in both spaces, sorted by `w_b / w_a` ascending.
fn split_order<T: Real>(freqs: &[T], a: SobolevIndex, b: SobolevIndex) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = freqs
        .iter()
        .enumerate()
        .filter_map(|(k, xi)| {
            let xi = xi.as_f64();
            match (a.weight(xi), b.weight(xi)) {
                (Some(wa), Some(wb)) => Some((k, if wa > 0.0 { wb / wa } else { f64::INFINITY })),
                _ => None,
            }
        })
        .collect();
    order.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    order
}

fn forced_a<T: Real>(freqs: &[T], a: SobolevIndex, b: SobolevIndex) -> Vec<usize> {
    freqs
        .iter()
        .enumerate()
        .filter(|(_, xi)| defined(a, xi.as_f64()) && !defined(b, xi.as_f64()))
        .map(|(k, _)| k)
        .collect()
}

fn forced_b<T: Real>(freqs: &[T], a: SobolevIndex, b: SobolevIndex) -> Vec<usize> {
    freqs
        .iter()
        .enumerate()
        .filter(|(_, xi)| !defined(a, xi.as_f64()) && defined(b, xi.as_f64()))
        .map(|(k, _)| k)
        .collect()
}

/// Per-node spatial norms of a trajectory, with prefix sums for fast
/// `L^p_t` queries on node ranges.
#[derive(Clone, Debug)]
pub struct NormProfile {
    times: TimeGrid,
    spatial: Vec<f64>,
    p: f64,
    prefix: Vec<f64>,
}

impl NormProfile {
    pub fn new<T: Real>(traj: &Trajectory<T>, p: f64, idx: SobolevIndex) -> Result<Self> {
        let spatial = traj
            .snapshots()
            .iter()
            .map(|s| sobolev_norm(s, idx).as_f64())
            .collect();
        Self::from_spatial(*traj.times(), spatial, p)
    }

    pub fn from_spatial(times: TimeGrid, spatial: Vec<f64>, p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::contract(format!("time exponent must be positive, got {p}")));
        }
        if spatial.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite spatial norm in trajectory".into()));
        }
        let h = times.dt();
        let mut prefix = Vec::with_capacity(spatial.len());
        prefix.push(0.0);
        for w in spatial.windows(2) {
            let last = *prefix.last().unwrap();
            prefix.push(last + 0.5 * h * (w[0].powf(p) + w[1].powf(p)));
        }
        Ok(Self {
            times,
            spatial,
            p,
            prefix,
        })
    }

    pub fn spatial(&self) -> &[f64] {
        &self.spatial
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    /// `L^p_t` norm over nodes `i0..=i1` (trapezoid).
    pub fn range(&self, i0: usize, i1: usize) -> f64 {
        if i1 <= i0 {
            return 0.0;
        }
        (self.prefix[i1] - self.prefix[i0]).max(0.0).powf(1.0 / self.p)
    }

    pub fn total(&self) -> f64 {
        self.range(0, self.spatial.len() - 1)
    }
}

/// `(int ||f(t)||_{H^s}^p dt)^{1/p}` by the trapezoid rule over all nodes.
pub fn bochner_norm<T: Real>(traj: &Trajectory<T>, p: f64, idx: SobolevIndex) -> Result<T> {
    if traj.times().n_nodes() < 2 {
        return Err(Error::contract("Bochner norm needs at least two nodes"));
    }
    Ok(T::lit(NormProfile::new(traj, p, idx)?.total()))
}

/// One component of a Bochner sum space: time exponent plus spatial index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BochnerSpace {
    pub p: f64,
    pub idx: SobolevIndex,
}

/// `||V||_{A + B}` for Bochner spaces, minimised over frequency splits
/// that are fixed in time.
pub fn bochner_sum_space_norm<T: Real>(
    traj: &Trajectory<T>,
    a: BochnerSpace,
    b: BochnerSpace,
) -> Result<T> {
    if !(a.p > 0.0 && b.p > 0.0) {
        return Err(Error::contract("time exponents must be positive"));
    }
    let freqs = traj.grid().frequencies();
    let wa = a.idx.weights_sq(freqs);
    let wb = b.idx.weights_sq(freqs);
    let order = split_order(freqs, a.idx, b.idx);
    let fa = forced_a(freqs, a.idx, b.idx);
    let fb = forced_b(freqs, a.idx, b.idx);
    let powers: Vec<Vec<f64>> = traj.snapshots().iter().map(mode_power).collect();
    let mut a_sq: Vec<f64> = powers
        .iter()
        .map(|p| {
            order.iter().map(|&(k, _)| p[k] * wa[k]).sum::<f64>()
                + fa.iter().map(|&k| p[k] * wa[k]).sum::<f64>()
        })
        .collect();
    let mut b_sq: Vec<f64> = powers
        .iter()
        .map(|p| fb.iter().map(|&k| p[k] * wb[k]).sum::<f64>())
        .collect();
    let times = *traj.times();
    let eval = |a_sq: &[f64], b_sq: &[f64]| -> Result<f64> {
        let na = NormProfile::from_spatial(times, a_sq.iter().map(|v| v.max(0.0).sqrt()).collect(), a.p)?;
        let nb = NormProfile::from_spatial(times, b_sq.iter().map(|v| v.max(0.0).sqrt()).collect(), b.p)?;
        Ok(na.total() + nb.total())
    };
    let mut best = eval(&a_sq, &b_sq)?;
    for &(k, _) in &order {
        for (m, p) in powers.iter().enumerate() {
            a_sq[m] -= p[k] * wa[k];
            b_sq[m] += p[k] * wb[k];
        }
        best = best.min(eval(&a_sq, &b_sq)?);
    }
    Ok(T::lit(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::{Grid, GridSpec};
    use num_complex::Complex;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Grid<f64> {
        Grid::new(GridSpec::new(n, l).unwrap()).unwrap()
    }

    #[test]
    fn s_zero_is_l2_and_zero_field_is_zero() {
        let g = grid(128, 30.0);
        let f = SpectralField::from_real_fn(&g, |x| (-x * x).exp() * (3.0 * x).cos());
        assert!((sobolev_norm(&f, SobolevIndex::L2) - f.l2_norm()).abs() < 1e-13);
        assert!((sobolev_norm(&f, SobolevIndex::homogeneous(0.0)) - f.l2_norm()).abs() < 1e-13);
        let z = SpectralField::<f64>::zeros(&g, crate::Space::Physical);
        for idx in [
            SobolevIndex::inhomogeneous(0.5),
            SobolevIndex::homogeneous(-0.5),
            SobolevIndex::homogeneous(0.5),
        ] {
            assert_eq!(sobolev_norm(&z, idx), 0.0);
        }
    }

    #[test]
    fn homogeneous_negative_drops_zero_mode() {
        let g = grid(64, 10.0);
        let c = SpectralField::from_real_fn(&g, |_| 2.0);
        assert!(sobolev_norm(&c, SobolevIndex::homogeneous(-0.5)) < 1e-12);
    }

    #[test]
    fn sech_half_norm_matches_quadrature() {
        let g = grid(512, 64.0 * PI);
        let f = SpectralField::from_real_fn(&g, |x| 1.0 / x.cosh());
        let got = sobolev_norm(&f, SobolevIndex::inhomogeneous(0.5));
        // int <xi> (pi/2) sech^2(pi xi / 2) dxi by Simpson on [-40, 40]
        let n = 200_000;
        let (a, b) = (-40.0f64, 40.0f64);
        let h = (b - a) / n as f64;
        let integrand = |xi: f64| {
            let s = 1.0 / (PI * xi / 2.0).cosh();
            (1.0 + xi * xi).sqrt() * PI / 2.0 * s * s
        };
        let mut acc = integrand(a) + integrand(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(a + i as f64 * h);
        }
        let exact = (acc * h / 3.0).sqrt();
        assert!((got - exact).abs() / exact < 1e-6, "{got} vs {exact}");
    }

    #[test]
    fn bochner_constant_and_homogeneity() {
        let g = grid(64, 20.0);
        let tg = TimeGrid::new(0.5, 2.0, 30).unwrap();
        let snap = SpectralField::from_real_fn(&g, |x| (-x * x / 4.0).exp());
        let traj = Trajectory::constant(&g, tg, &snap);
        let idx = SobolevIndex::inhomogeneous(0.5);
        let b = bochner_norm(&traj, 2.0, idx).unwrap();
        let expect = (1.5f64).sqrt() * sobolev_norm(&snap, idx);
        assert!((b - expect).abs() < 1e-12 * expect);
        let scaled = traj.scaled(Complex::new(-3.0, 0.0));
        let bs = bochner_norm(&scaled, 4.0 / 3.0, idx).unwrap();
        let b43 = bochner_norm(&traj, 4.0 / 3.0, idx).unwrap();
        assert!((bs - 3.0 * b43).abs() < 1e-12 * bs);
        assert!(bochner_norm(&traj, 0.0, idx).is_err());
    }

    #[test]
    fn bochner_refinement_is_stable_for_smooth_trajectory() {
        let g = grid(64, 20.0);
        let make = |steps| {
            let tg = TimeGrid::new(0.0, 1.0, steps).unwrap();
            Trajectory::from_fn(&g, tg, |t, x| {
                Complex::new((-(x - t).powi(2)).exp() * (1.0 + t * t), 0.0)
            })
        };
        let idx = SobolevIndex::inhomogeneous(0.5);
        let coarse = bochner_norm(&make(64), 2.0, idx).unwrap();
        let fine = bochner_norm(&make(128), 2.0, idx).unwrap();
        assert!((coarse - fine).abs() / fine < 1e-4);
    }

    #[test]
    fn sum_space_prefers_cheaper_component() {
        let g = grid(128, 40.0);
        let f = SpectralField::from_real_fn(&g, |x| (-x * x).exp() * (2.0 * x).sin());
        let n = sum_space_norm(&f, SobolevIndex::L2, SobolevIndex::homogeneous(-0.5));
        assert!(n <= f.l2_norm() + 1e-14);
        assert!(n <= sobolev_norm(&f, SobolevIndex::homogeneous(-0.5)) + 1e-14);
    }
}
