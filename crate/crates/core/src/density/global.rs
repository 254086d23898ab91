//! Local solve and window-by-window extension.

use log::info;

use super::config::SolverConfig;
use super::record::SolutionRecord;
use super::solver::{select_local_steps, solve_window, InitialIterate};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{make_symbol_weights, SpectralField, SymbolSpec, TimeGrid, Trajectory};

fn check_delta(sym: &SymbolSpec, cfg: &SolverConfig) -> Result<()> {
    if (sym.delta - cfg.propagator.delta).abs() > 1e-12 {
        return Err(Error::Configuration(format!(
            "symbol delta {} differs from propagator delta {}",
            sym.delta, cfg.propagator.delta
        )));
    }
    Ok(())
}

fn total_steps(cfg: &SolverConfig) -> Result<usize> {
    let steps = (cfg.global_horizon * cfg.steps_per_unit).round();
    if steps < 1.0 || (steps * cfg.dt() - cfg.global_horizon).abs() > 1e-9 {
        return Err(Error::Configuration(format!(
            "horizon {} is not a whole number of steps of {}",
            cfg.global_horizon,
            cfg.dt()
        )));
    }
    Ok(steps as usize)
}

/// One window `[0, T]` with `T` from the gate.
pub fn solve_local<T: Real>(
    phi: &SpectralField<T>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
) -> Result<SolutionRecord<T>> {
    solve_local_from(phi, sym, cfg, InitialIterate::Free)
}

pub fn solve_local_from<T: Real>(
    phi: &SpectralField<T>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
    start: InitialIterate<T>,
) -> Result<SolutionRecord<T>> {
    cfg.validate()?;
    check_delta(sym, cfg)?;
    let n_total = total_steps(cfg)?;
    let w = make_symbol_weights(sym, phi.grid())?;
    let mass = phi.l2_norm_sq().as_f64();
    let m = select_local_steps(mass, w.bound, n_total as f64 * cfg.dt(), cfg)?;
    let times = TimeGrid::new(0.0, m as f64 * cfg.dt(), m)?;
    let sol = solve_window(phi, times, &w, cfg, start)?;
    let info = sol.info(0.0);
    SolutionRecord::assemble(
        phi.to_physical(),
        sol.density,
        sol.field,
        sym.clone(),
        cfg.clone(),
        vec![info],
    )
}

/// March windows over `[0, global_horizon]`, restarting from the terminal
/// field of each window.
///
/// Real symbols keep the first window's length throughout. Complex
/// symbols recompute `R` and `T` from the current mass per window.
pub fn extend_global<T: Real>(
    phi: &SpectralField<T>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
) -> Result<SolutionRecord<T>> {
    cfg.validate()?;
    check_delta(sym, cfg)?;
    let n_total = total_steps(cfg)?;
    let dt = cfg.dt();
    let w = make_symbol_weights(sym, phi.grid())?;
    let fixed = if w.real_valued {
        Some(select_local_steps(phi.l2_norm_sq().as_f64(), w.bound, n_total as f64 * dt, cfg)?)
    } else {
        None
    };

    let mut start = 0usize;
    let mut data = phi.to_physical();
    let mut windows = Vec::new();
    let mut density: Option<Trajectory<T>> = None;
    let mut field: Option<Trajectory<T>> = None;
    while start < n_total {
        let left = n_total - start;
        let m = match fixed {
            Some(m) => m.min(left),
            None => select_local_steps(data.l2_norm_sq().as_f64(), w.bound, left as f64 * dt, cfg)?,
        };
        let t0 = start as f64 * dt;
        let times = TimeGrid::new(t0, (start + m) as f64 * dt, m)?;
        info!("window [{t0:.6}, {:.6}] ({m} steps)", times.t_end);
        let sol = solve_window(&data, times, &w, cfg, InitialIterate::Free)?;
        let jump = sol.field.snapshot(0).to_physical().distance(&data)?.as_f64();
        if jump > cfg.seam_tolerance {
            return Err(Error::GluingFailure { time: t0, jump });
        }
        windows.push(sol.info(jump));
        data = sol.field.last().to_physical();
        density = Some(match density {
            None => sol.density,
            Some(d) => d.concat(&sol.density)?,
        });
        field = Some(match field {
            None => sol.field,
            Some(f) => f.concat(&sol.field)?,
        });
        start += m;
    }
    SolutionRecord::assemble(
        phi.to_physical(),
        density.expect("at least one window"),
        field.expect("at least one window"),
        sym.clone(),
        cfg.clone(),
        windows,
    )
}
