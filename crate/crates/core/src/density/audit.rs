//! Post-solve checks: the mass identity, the Duhamel residual, and the
//! density equation on the full interval.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::record::SolutionRecord;
use super::solver::h_half;
use crate::error::Result;
use crate::propagators::{free_propagate, propagate_trajectory};
use crate::scalar::{mul_neg_i, Real};
use crate::spectral::{apply_multiplier, bochner_norm, make_symbol_weights, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassAudit {
    pub times: Vec<f64>,
    /// `||u(t_m)||^2`
    pub lhs: Vec<f64>,
    /// `||phi||^2 + 2 int_0^{t_m} Im int V rho dx dt`
    pub rhs: Vec<f64>,
    pub max_identity_gap: f64,
    /// `max_m | ||u(t_m)|| - ||phi|| | / ||phi||` (zero for `phi = 0`).
    pub max_relative_drift: f64,
    /// For real symbols, `max_m |Im sum a(xi) |rho_hat|^2|`.
    pub max_imag_integrand: Option<f64>,
}

/// Both sides of the mass identity at every node. The pairing is taken in
/// physical space here, independently of the spectral ledger in the record.
pub fn mass_audit<T: Real>(rec: &SolutionRecord<T>) -> Result<MassAudit> {
    let w = make_symbol_weights(&rec.symbol, rec.grid())?;
    let times = rec.times().nodes();
    let mass0 = rec.initial.l2_norm_sq().as_f64();
    let dx = rec.grid().dx().as_f64();
    let lhs: Vec<f64> = rec
        .field
        .snapshots()
        .iter()
        .map(|s| s.l2_norm_sq().as_f64())
        .collect();
    let mut pairing = Vec::with_capacity(times.len());
    let mut imag = 0.0f64;
    for r in rec.density.snapshots() {
        let rho = r.to_physical();
        let v = apply_multiplier(&rho, &w.values)?.to_physical();
        let s: Complex<f64> = v
            .values()
            .iter()
            .zip(rho.values())
            .map(|(a, b)| Complex::new(a.re.as_f64(), a.im.as_f64()) * b.re.as_f64())
            .sum::<Complex<f64>>()
            * dx;
        pairing.push(s.im);
        if w.real_valued {
            let f = rho.to_frequency();
            let im: f64 = f
                .values()
                .iter()
                .zip(&w.values)
                .map(|(z, a)| (a.im * z.norm_sqr()).as_f64())
                .sum();
            imag = imag.max(im.abs());
        }
    }
    let mut rhs = vec![mass0; times.len()];
    for m in 1..times.len() {
        let h = times[m] - times[m - 1];
        rhs[m] = rhs[m - 1] + h * (pairing[m - 1] + pairing[m]);
    }
    let gap = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let drift = if mass0 > 0.0 {
        lhs.iter()
            .map(|m| (m.sqrt() - mass0.sqrt()).abs() / mass0.sqrt())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(MassAudit {
        times,
        lhs,
        rhs,
        max_identity_gap: gap,
        max_relative_drift: drift,
        max_imag_integrand: w.real_valued.then_some(imag),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    Simpson,
}

/// `max_m ||u(t_m) - S(t_m) phi + i int_0^{t_m} S(t_m - s) (a(D)|u|^2 u)(s) ds||`
/// with the time integral done by `quad` on the solution nodes.
pub fn duhamel_residual<T: Real>(rec: &SolutionRecord<T>, quad: Quadrature) -> Result<f64> {
    let w = make_symbol_weights(&rec.symbol, rec.grid())?;
    let times = rec.times();
    let t0 = times.t_start;
    // pulled back to t0: S(t0 - s) N(s)
    let pulled: Vec<SpectralField<T>> = rec
        .field
        .snapshots()
        .iter()
        .enumerate()
        .map(|(m, u)| {
            let u = u.to_physical();
            let v = apply_multiplier(&u.modulus_sq(), &w.values)?.to_physical();
            let vals = v.values().iter().zip(u.values()).map(|(a, b)| *a * *b).collect();
            let n = SpectralField::new(u.grid().clone(), vals, crate::Space::Physical)?;
            Ok(free_propagate(&n, t0 - times.node(m)).to_frequency())
        })
        .collect::<Result<_>>()?;
    let h = times.dt();
    let phi = rec.initial.to_frequency();
    let n = phi.grid().n();
    let mut worst = 0.0f64;
    let mut trap = vec![Complex::new(T::zero(), T::zero()); n];
    for m in 0..times.n_nodes() {
        if m > 0 {
            let a = pulled[m - 1].values();
            let b = pulled[m].values();
            let half = T::lit(h / 2.0);
            trap.iter_mut()
                .zip(a.iter().zip(b))
                .for_each(|(acc, (x, y))| *acc = *acc + (*x + *y) * half);
        }
        let integral = match quad {
            Quadrature::Trapezoid => trap.clone(),
            Quadrature::Simpson => simpson_prefix(&pulled, m, h),
        };
        let back = free_propagate(&rec.field.snapshot(m).to_frequency(), t0 - times.node(m)).to_frequency();
        let mut r2 = 0.0f64;
        for k in 0..n {
            let z = back.values()[k] - phi.values()[k] - mul_neg_i(integral[k]);
            r2 += z.norm_sqr().as_f64();
        }
        worst = worst.max((r2 * phi.grid().dx().as_f64()).sqrt());
    }
    Ok(worst)
}

/// Composite Simpson over nodes `0..=m` (3/8 rule on the last three
/// intervals when `m` is odd; trapezoid for `m = 1`).
fn simpson_prefix<T: Real>(f: &[SpectralField<T>], m: usize, h: f64) -> Vec<Complex<T>> {
    let n = f[0].grid().n();
    let mut acc = vec![Complex::new(T::zero(), T::zero()); n];
    let mut add = |j: usize, c: f64| {
        let c = T::lit(c * h);
        acc.iter_mut()
            .zip(f[j].values())
            .for_each(|(a, x)| *a = *a + *x * c);
    };
    if m == 0 {
    } else if m == 1 {
        add(0, 0.5);
        add(1, 0.5);
    } else {
        let even_end = if m % 2 == 0 { m } else { m - 3 };
        let mut j = 0;
        while j + 2 <= even_end {
            add(j, 1.0 / 3.0);
            add(j + 1, 4.0 / 3.0);
            add(j + 2, 1.0 / 3.0);
            j += 2;
        }
        if m % 2 == 1 {
            let s = m - 3;
            add(s, 3.0 / 8.0);
            add(s + 1, 9.0 / 8.0);
            add(s + 2, 9.0 / 8.0);
            add(s + 3, 3.0 / 8.0);
        }
    }
    acc
}

/// `||rho - |S_{a(D) rho}(., t_0) phi|^2||_{L^2_t H^{1/2}}` with a single
/// propagation over the whole record.
pub fn density_residual<T: Real>(rec: &SolutionRecord<T>) -> Result<f64> {
    let w = make_symbol_weights(&rec.symbol, rec.grid())?;
    let v = rec.density.multiplied(&w.values)?;
    let t = rec.times();
    let (u, _) = propagate_trajectory(&v, t.t_start, t.t_end, &rec.initial, &rec.config.propagator)?;
    let again = u.map(|s| s.to_physical().modulus_sq());
    Ok(bochner_norm(&again.sub(&rec.density)?, 2.0, h_half())?.as_f64())
}
