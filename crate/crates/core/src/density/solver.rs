//! The density map `Phi[rho] = |S_{a(D) rho}(t) phi|^2`, the local time
//! gate, and the contraction iteration on one window.

use log::{debug, warn};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use crate::error::{Error, Result};
use crate::propagators::{free_propagate, propagate_trajectory, smallness_product};
use crate::scalar::Real;
use crate::spectral::{
    bochner_norm, make_symbol_weights, SobolevIndex, SpectralField, SymbolSpec, SymbolWeights,
    TimeGrid, Trajectory,
};

/// Realness slack for densities (relative to the largest value).
const IMAG_DUST: f64 = 1e-12;

/// Starting point of the fixed-point iteration.
#[derive(Clone, Debug)]
pub enum InitialIterate<T: Real> {
    /// `|S(t) phi|^2`
    Free,
    Zero,
    Given(Trajectory<T>),
}

/// One converged window.
#[derive(Clone, Debug)]
pub struct WindowSolution<T: Real> {
    pub density: Trajectory<T>,
    pub field: Trajectory<T>,
    pub ratios: Vec<f64>,
    pub changes: Vec<f64>,
    pub iterations: usize,
    pub radius: f64,
    /// `||rho||_{L^2_t H^{1/2}}` of the converged density.
    pub density_norm: f64,
    pub initial_mass: f64,
    /// Iterates that left the ball `||rho|| <= R`.
    pub ball_violations: usize,
}

impl<T: Real> WindowSolution<T> {
    pub fn a_priori_ok(&self) -> bool {
        self.density_norm <= 4.0 * self.initial_mass + 1e-8
    }
}

pub(crate) fn h_half() -> SobolevIndex {
    SobolevIndex::inhomogeneous(0.5)
}

/// `rho` with imaginary dust removed; errors if the dust is not dust.
pub fn enforce_real<T: Real>(rho: &Trajectory<T>) -> Result<Trajectory<T>> {
    let peak = rho
        .snapshots()
        .iter()
        .map(|s| s.to_physical().max_abs().as_f64())
        .fold(0.0, f64::max);
    let worst = rho
        .snapshots()
        .iter()
        .flat_map(|s| s.to_physical().into_values())
        .map(|z| z.im.abs().as_f64())
        .fold(0.0, f64::max);
    let out = rho.map(|s| {
        let vals = s
            .to_physical()
            .into_values()
            .into_iter()
            .map(|z| Complex::new(z.re, T::zero()))
            .collect();
        SpectralField::new(s.grid().clone(), vals, crate::Space::Physical).expect("grid-sized")
    });
    if worst > IMAG_DUST * peak.max(f64::MIN_POSITIVE) && worst > 0.0 {
        return Err(Error::InvalidInput(format!(
            "density has imaginary part {worst:.3e} (peak {peak:.3e})"
        )));
    }
    Ok(out)
}

fn modulus_traj<T: Real>(u: &Trajectory<T>) -> Trajectory<T> {
    u.map(|s| s.to_physical().modulus_sq())
}

/// `Phi[rho](t_m)` at every node of `rho`'s time grid, for data `phi`
/// given at the first node.
pub fn phi_map<T: Real>(
    rho: &Trajectory<T>,
    phi: &SpectralField<T>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
) -> Result<Trajectory<T>> {
    let w = make_symbol_weights(sym, phi.grid())?;
    phi_map_with(rho, phi, &w, cfg)
}

/// [`phi_map`] with precomputed symbol weights.
pub fn phi_map_with<T: Real>(
    rho: &Trajectory<T>,
    phi: &SpectralField<T>,
    weights: &SymbolWeights<T>,
    cfg: &SolverConfig,
) -> Result<Trajectory<T>> {
    phi_map_field(rho, phi, weights, cfg).map(|u| modulus_traj(&u))
}

/// `S_{a(D) rho}(t_m, t_0) phi` at every node.
pub(crate) fn phi_map_field<T: Real>(
    rho: &Trajectory<T>,
    phi: &SpectralField<T>,
    weights: &SymbolWeights<T>,
    cfg: &SolverConfig,
) -> Result<Trajectory<T>> {
    let times = *rho.times();
    if weights.is_zero() {
        return Ok(free_trajectory(phi, times));
    }
    let v = rho.multiplied(&weights.values)?;
    let gate = smallness_product(&v, times.t_start, times.t_end, &cfg.propagator)?;
    if gate > cfg.propagator.smallness_target {
        return Err(Error::SmallnessViolation {
            measured: gate,
            target: cfg.propagator.smallness_target,
        });
    }
    let (u, _) = propagate_trajectory(&v, times.t_start, times.t_end, phi, &cfg.propagator)?;
    Ok(u)
}

/// `S(t_m - t_0) phi` on `times`.
pub(crate) fn free_trajectory<T: Real>(phi: &SpectralField<T>, times: TimeGrid) -> Trajectory<T> {
    let snaps = (0..times.n_nodes())
        .map(|m| free_propagate(phi, times.node(m) - times.t_start).to_physical())
        .collect();
    Trajectory::new(phi.grid().clone(), times, snaps).expect("one snapshot per node")
}

/// Largest node count `m` with `c (m dt)^theta R sup|a|/<xi>^{1-delta} <= 1/2`
/// and `m dt <= min(max_local_time, remaining)`.
pub fn select_local_steps(
    mass: f64,
    symbol_bound: f64,
    remaining: f64,
    cfg: &SolverConfig,
) -> Result<usize> {
    let dt = cfg.dt();
    let cap_time = cfg.max_local_time.min(remaining);
    let cap = ((cap_time / dt) * (1.0 + 1e-12)).floor() as usize;
    if cap == 0 {
        return Err(Error::Configuration(format!(
            "remaining time {remaining} shorter than one step {dt}"
        )));
    }
    let r = cfg.radius_for(mass)?;
    let p = &cfg.propagator;
    let gate = |m: usize| p.gate_product(m as f64 * dt, r * symbol_bound);
    let target = p.smallness_target;
    if gate(cap) <= target {
        return Ok(cap);
    }
    if gate(1) > target {
        return Err(Error::Configuration(format!(
            "a single step of {dt} already violates the gate ({:.3e} > {target}); \
             use a finer time grid or a smaller c_delta",
            gate(1)
        )));
    }
    let (mut lo, mut hi) = (1usize, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if gate(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Local existence time for `phi` under `sym` (grid-aligned).
pub fn select_local_time<T: Real>(
    phi: &SpectralField<T>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
) -> Result<f64> {
    let w = make_symbol_weights(sym, phi.grid())?;
    let m = select_local_steps(phi.l2_norm_sq().as_f64(), w.bound, cfg.global_horizon, cfg)?;
    Ok(m as f64 * cfg.dt())
}

/// Contraction iteration on `times` (data `phi` at `times.t_start`).
pub fn solve_window<T: Real>(
    phi: &SpectralField<T>,
    times: TimeGrid,
    weights: &SymbolWeights<T>,
    cfg: &SolverConfig,
    start: InitialIterate<T>,
) -> Result<WindowSolution<T>> {
    cfg.validate()?;
    let mass = phi.l2_norm_sq().as_f64();
    let radius = cfg.radius_for(mass)?;
    let norm = |r: &Trajectory<T>| -> Result<f64> { Ok(bochner_norm(r, 2.0, h_half())?.as_f64()) };
    let mut rho = match start {
        InitialIterate::Free => modulus_traj(&free_trajectory(phi, times)),
        InitialIterate::Zero => Trajectory::zeros(phi.grid(), times),
        InitialIterate::Given(r) => {
            if *r.times() != times || r.grid() != phi.grid() {
                return Err(Error::contract("initial iterate does not match the window"));
            }
            enforce_real(&r)?
        }
    };
    let mut ratios = Vec::new();
    let mut changes = Vec::new();
    let mut ball_violations = 0;
    let mut prev_change: Option<f64> = None;
    for it in 1..=cfg.max_iterations {
        let next = phi_map_with(&rho, phi, weights, cfg)?;
        let diff = norm(&next.sub(&rho)?)?;
        let size = norm(&next)?;
        if size > radius * (1.0 + 1e-12) + 1e-300 {
            ball_violations += 1;
            warn!("iterate {it} left the ball: {size:.6e} > R = {radius:.6e}");
        }
        if let Some(p) = prev_change {
            if p > 0.0 {
                let q = diff / p;
                ratios.push(q);
                if q > 1.0 {
                    return Err(Error::ContractionFailure { iteration: it, ratio: q });
                }
                if q > cfg.contraction_limit {
                    warn!("contraction ratio {q:.4} above {} at iteration {it}", cfg.contraction_limit);
                }
            }
        }
        let rel = if size > 0.0 { diff / size } else { diff };
        changes.push(rel);
        debug!("iteration {it}: relative change {rel:.3e}");
        prev_change = Some(diff);
        rho = next;
        if rel < cfg.fp_tolerance {
            let field = phi_map_field(&rho, phi, weights, cfg)?;
            let density_norm = norm(&rho)?;
            return Ok(WindowSolution {
                density: rho,
                field,
                ratios,
                changes,
                iterations: it,
                radius,
                density_norm,
                initial_mass: mass,
                ball_violations,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        change: *changes.last().unwrap_or(&f64::NAN),
    })
}

/// Diagnostics for one window kept in a [`super::SolutionRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub t_start: f64,
    pub t_end: f64,
    pub iterations: usize,
    pub radius: f64,
    pub density_norm: f64,
    pub initial_mass: f64,
    pub ratios: Vec<f64>,
    pub changes: Vec<f64>,
    pub ball_violations: usize,
    /// `||u_prev(t_start) - u(t_start)||` (zero for the first window).
    pub seam_jump: f64,
}

impl<T: Real> WindowSolution<T> {
    pub(crate) fn info(&self, seam_jump: f64) -> WindowInfo {
        let t = self.density.times();
        WindowInfo {
            t_start: t.t_start,
            t_end: t.t_end,
            iterations: self.iterations,
            radius: self.radius,
            density_norm: self.density_norm,
            initial_mass: self.initial_mass,
            ratios: self.ratios.clone(),
            changes: self.changes.clone(),
            ball_violations: self.ball_violations,
            seam_jump,
        }
    }
}
