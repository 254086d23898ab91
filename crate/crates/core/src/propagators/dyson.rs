//! Interaction-picture sweeps: the conjugated integral `int S^* V S` and the
//! ordered / unordered Dyson terms built from it.

use log::warn;
use num_complex::Complex;
use rayon::prelude::*;

use super::probe::LinearOperatorProbe;
use crate::error::{Error, Result};
use crate::scalar::{mul_neg_i, Real};
use crate::spectral::{Grid, Space, SpectralField, TimeGrid, Trajectory};

/// Largest Dyson order any routine will build.
pub const MAX_ORDER: usize = 64;

/// Per-node work is spread over threads once a sweep has this many nodes.
const PAR_NODES: usize = 48;

/// Node range `i0..=i1` for `[s, t]`, snapping off-grid endpoints.
pub(crate) fn resolve_span(times: &TimeGrid, s: f64, t: f64) -> Result<(usize, usize)> {
    if !(s.is_finite() && t.is_finite()) || t < s {
        return Err(Error::contract(format!("need s <= t, got s = {s}, t = {t}")));
    }
    let (i0, m0) = times.snap(s)?;
    let (i1, m1) = times.snap(t)?;
    if m0 || m1 {
        warn!(
            "interval [{s}, {t}] is not node-aligned; snapped to [{}, {}]",
            times.node(i0),
            times.node(i1)
        );
    }
    Ok((i0, i1))
}

pub(crate) fn freq_norm<T: Real>(grid: &Grid<T>, v: &[Complex<T>]) -> f64 {
    let s: f64 = v.iter().map(|z| z.norm_sqr().as_f64()).sum();
    (grid.dx().as_f64() * s).sqrt()
}

/// Free-flow phases `e^{-i tau_m xi^2}` (the symbol of `S(tau_m)`) for a node range, ready for
/// repeated conjugation `S(tau_m)^* V(tau_m) S(tau_m)`.
pub(crate) struct Conjugator<T: Real> {
    grid: Grid<T>,
    times: TimeGrid,
    i0: usize,
    i1: usize,
    phases: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Conjugator<T> {
    pub fn new(grid: &Grid<T>, times: &TimeGrid, i0: usize, i1: usize) -> Self {
        let phases = (i0..=i1)
            .map(|m| phase_row(grid, times.node(m)))
            .collect();
        Self {
            grid: grid.clone(),
            times: *times,
            i0,
            i1,
            phases,
        }
    }

    pub fn len(&self) -> usize {
        self.i1 - self.i0 + 1
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn phase(&self, j: usize) -> &[Complex<T>] {
        &self.phases[j]
    }

    pub fn half_step(&self) -> T {
        T::lit(0.5 * self.times.dt())
    }

    /// `S(tau)^* V(tau) S(tau) g` at local node `j`; `g` and the result are
    /// frequency coefficients, `pot` is the physical potential.
    pub fn conjugate(&self, j: usize, pot: &[Complex<T>], g: &[Complex<T>]) -> Vec<Complex<T>> {
        let p = &self.phases[j];
        let mut buf: Vec<Complex<T>> = g.iter().zip(p).map(|(a, b)| *a * *b).collect();
        self.grid.inverse_in_place(&mut buf);
        buf.iter_mut().zip(pot).for_each(|(z, v)| *z = *z * *v);
        self.grid.forward_in_place(&mut buf);
        buf.iter_mut().zip(p).for_each(|(z, b)| *z = *z * b.conj());
        buf
    }

    fn conjugate_all(&self, pot: &Trajectory<T>, g: &[Vec<Complex<T>>]) -> Vec<Vec<Complex<T>>> {
        let f = |j: usize| self.conjugate(j, pot.snapshot(self.i0 + j).values(), &g[j]);
        if self.len() >= PAR_NODES {
            (0..self.len()).into_par_iter().map(f).collect()
        } else {
            (0..self.len()).map(f).collect()
        }
    }

    /// One Duhamel sweep: `out(t_j) = -i int_{t_0}^{t_j} S^* V S prev`,
    /// cumulative trapezoid over the node samples of `prev`.
    pub fn sweep(&self, pot: &Trajectory<T>, prev: &[Vec<Complex<T>>]) -> Vec<Vec<Complex<T>>> {
        let f = self.conjugate_all(pot, prev);
        let hh = self.half_step();
        let n = self.grid.n();
        let mut out = Vec::with_capacity(self.len());
        let mut acc = vec![Complex::new(T::zero(), T::zero()); n];
        out.push(acc.clone());
        for j in 1..self.len() {
            for k in 0..n {
                acc[k] = acc[k] + mul_neg_i((f[j - 1][k] + f[j][k]) * hh);
            }
            out.push(acc.clone());
        }
        out
    }

    /// Trapezoid value of `int S^* V S g dtau` for a fixed `g`.
    pub fn integral(&self, pot: &Trajectory<T>, g: &[Complex<T>]) -> Vec<Complex<T>> {
        let terms: Vec<Vec<Complex<T>>> = {
            let f = |j: usize| self.conjugate(j, pot.snapshot(self.i0 + j).values(), g);
            if self.len() >= PAR_NODES {
                (0..self.len()).into_par_iter().map(f).collect()
            } else {
                (0..self.len()).map(f).collect()
            }
        };
        let hh = self.half_step();
        let two = T::lit(2.0);
        let last = self.len() - 1;
        let mut acc = vec![Complex::new(T::zero(), T::zero()); self.grid.n()];
        for (j, row) in terms.iter().enumerate() {
            let w = if j == 0 || j == last { hh } else { hh * two };
            for (a, z) in acc.iter_mut().zip(row) {
                *a = *a + *z * w;
            }
        }
        if last == 0 {
            acc.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
        }
        acc
    }
}

pub(crate) fn phase_row<T: Real>(grid: &Grid<T>, tau: f64) -> Vec<Complex<T>> {
    grid.frequencies()
        .iter()
        .map(|xi| {
            let xi = xi.as_f64();
            let (s, c) = (-tau * xi * xi).sin_cos();
            Complex::new(T::lit(c), T::lit(s))
        })
        .collect()
}

fn check_potential<T: Real>(v: &Trajectory<T>, psi: &SpectralField<T>) -> Result<()> {
    if v.grid() != psi.grid() {
        return Err(Error::contract("potential and state live on different grids"));
    }
    Ok(())
}

fn restore_space<T: Real>(grid: &Grid<T>, coeffs: Vec<Complex<T>>, space: Space) -> Result<SpectralField<T>> {
    let f = SpectralField::new(grid.clone(), coeffs, Space::Frequency)?;
    Ok(match space {
        Space::Frequency => f,
        Space::Physical => f.into_physical(),
    })
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::contract(format!("Dyson order {n} exceeds cap {MAX_ORDER}")));
    }
    Ok(())
}

/// `psi -> int_s^t S(tau)^* V(tau) S(tau) psi dtau` as a probe; the adjoint
/// uses `conj(V)`.
pub fn conjugated_potential_integral<'a, T: Real>(
    v: &'a Trajectory<T>,
    s: f64,
    t: f64,
) -> Result<LinearOperatorProbe<'a, T>> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let conj = std::sync::Arc::new(Conjugator::new(v.grid(), v.times(), i0, i1));
    let v_bar = v.map(|f| {
        let vals = f.values().iter().map(|z| z.conj()).collect();
        SpectralField::new(f.grid().clone(), vals, Space::Physical).expect("same length")
    });
    let c1 = conj.clone();
    let apply = move |psi: &SpectralField<T>| {
        let g = psi.to_frequency();
        restore_space(psi.grid(), c1.integral(v, g.values()), psi.space()).expect("grid-sized")
    };
    let adjoint = move |psi: &SpectralField<T>| {
        let g = psi.to_frequency();
        restore_space(psi.grid(), conj.integral(&v_bar, g.values()), psi.space())
            .expect("grid-sized")
    };
    Ok(LinearOperatorProbe::new(v.grid(), apply).with_adjoint(adjoint))
}

/// Ordered Dyson term `W^{(n)}_{V_1..V_n}(t, s) psi`; `pots[0]` is the
/// outermost (latest-time) factor. All trajectories share one time grid.
pub fn dyson_multilinear_apply<T: Real>(
    pots: &[&Trajectory<T>],
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    check_order(pots.len())?;
    let Some(first) = pots.first() else {
        return Ok(psi.clone());
    };
    check_potential(first, psi)?;
    for p in pots {
        p.check_matching(first)?;
    }
    let (i0, i1) = resolve_span(first.times(), s, t)?;
    let conj = Conjugator::new(psi.grid(), first.times(), i0, i1);
    let g0 = psi.to_frequency().into_values();
    let mut g = vec![g0; conj.len()];
    for pot in pots.iter().rev() {
        g = conj.sweep(pot, &g);
    }
    let last = g.pop().expect("at least one node");
    restore_space(psi.grid(), last, psi.space())
}

/// `S(t_j) W^{(n)}_{V_1..V_n}(t_j, s) psi` at every node of `[s, t]`, in
/// physical space. With no potentials this is the free flow `S(t_j) psi`.
pub fn dyson_multilinear_nodes<T: Real>(
    pots: &[&Trajectory<T>],
    times: &TimeGrid,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<Trajectory<T>> {
    check_order(pots.len())?;
    for p in pots {
        check_potential(p, psi)?;
        if p.times() != times {
            return Err(Error::contract("potentials must share the requested time grid"));
        }
    }
    let (i0, i1) = resolve_span(times, s, t)?;
    let conj = Conjugator::new(psi.grid(), times, i0, i1);
    let g0 = psi.to_frequency().into_values();
    let mut g = vec![g0; conj.len()];
    for pot in pots.iter().rev() {
        g = conj.sweep(pot, &g);
    }
    let snaps = g
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let vals = row.iter().zip(conj.phase(j)).map(|(a, p)| *a * *p).collect();
            restore_space(psi.grid(), vals, Space::Physical)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(psi.grid().clone(), times.slice(i0, i1)?, snaps)
}

/// `W^{(n)}_V(t, s) psi` by `n` cumulative sweeps.
pub fn dyson_term_apply<T: Real>(
    v: &Trajectory<T>,
    n: usize,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    check_order(n)?;
    let pots = vec![v; n];
    dyson_multilinear_apply(&pots, s, t, psi)
}

/// Unordered term `W^{(n),+}_{V_1..V_n}(t, s) psi`: the hypercube integral
/// factorises, so this is `(-i A_1) ... (-i A_n) psi`.
pub fn dyson_multilinear_plus_apply<T: Real>(
    pots: &[&Trajectory<T>],
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    check_order(pots.len())?;
    let Some(first) = pots.first() else {
        return Ok(psi.clone());
    };
    check_potential(first, psi)?;
    let (i0, i1) = resolve_span(first.times(), s, t)?;
    let conj = Conjugator::new(psi.grid(), first.times(), i0, i1);
    let mut g = psi.to_frequency().into_values();
    for pot in pots.iter().rev() {
        pot.check_matching(first)?;
        g = conj.integral(pot, &g).into_iter().map(mul_neg_i).collect();
    }
    restore_space(psi.grid(), g, psi.space())
}

pub fn dyson_term_plus_apply<T: Real>(
    v: &Trajectory<T>,
    n: usize,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    check_order(n)?;
    let pots = vec![v; n];
    dyson_multilinear_plus_apply(&pots, s, t, psi)
}

/// Summed Dyson series on a node range, all nodes retained.
pub(crate) struct SeriesSweep<T: Real> {
    /// `sum_n g_n(t_j)` per local node, frequency coefficients.
    pub sum: Vec<Vec<Complex<T>>>,
    /// `||g_n(t_end)||` for `n = 0..=orders`.
    pub term_norms: Vec<f64>,
    /// `max_j ||g_n(t_j)||` for the same orders.
    pub term_sup_norms: Vec<f64>,
}

/// Runs the recursion from `g_0 = psi0` up to order `k_max`, stopping
/// early once an order's sup norm drops below `tail_abs`.
pub(crate) fn series_sweep<T: Real>(
    conj: &Conjugator<T>,
    v: &Trajectory<T>,
    psi0: &[Complex<T>],
    k_max: usize,
    tail_abs: f64,
) -> SeriesSweep<T> {
    let grid = conj.grid().clone();
    let mut g = vec![psi0.to_vec(); conj.len()];
    let mut sum = g.clone();
    let n0 = freq_norm(&grid, psi0);
    let mut term_norms = vec![n0];
    let mut term_sup_norms = vec![n0];
    for _ in 1..=k_max.min(MAX_ORDER) {
        g = conj.sweep(v, &g);
        let end = freq_norm(&grid, g.last().expect("nodes"));
        let sup = g.iter().map(|r| freq_norm(&grid, r)).fold(0.0, f64::max);
        for (acc, row) in sum.iter_mut().zip(&g) {
            acc.iter_mut().zip(row).for_each(|(a, b)| *a = *a + *b);
        }
        term_norms.push(end);
        term_sup_norms.push(sup);
        if sup < tail_abs {
            break;
        }
    }
    SeriesSweep {
        sum,
        term_norms,
        term_sup_norms,
    }
}
