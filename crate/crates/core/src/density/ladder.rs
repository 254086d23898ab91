//! Refinement ladders for one scenario: time steps, Dyson truncation order
//! and grid size. Errors are successive differences (time), distances to
//! a high-order reference (truncation) or to the finest grid (space).

use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::global::extend_global;
use super::solver::select_local_steps;
use crate::error::{Error, Result};
use crate::propagators::{propagate_small, smallness_product};
use crate::spectral::{make_symbol_weights, Grid, GridSpec, InitialData, SpectralField, SymbolSpec};

/// Errors below this multiple of `||phi||` count as roundoff.
pub const LADDER_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    TimeSteps,
    TruncationOrder,
    GridPoints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub level: f64,
    pub error: f64,
    /// `error / previous error`.
    pub ratio: Option<f64>,
    /// `-log(ratio) / log(level / previous level)`.
    pub order: Option<f64>,
    pub at_floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub kind: LadderKind,
    pub rows: Vec<LadderRow>,
    pub floor: f64,
    /// Errors shrink down the ladder until they reach the floor.
    pub monotone: bool,
    /// Least-squares slope of `-log error` against `log level`, rows above
    /// the floor only.
    pub fitted_order: Option<f64>,
}

impl Ladder {
    fn build(kind: LadderKind, levels: &[f64], errors: &[f64], floor: f64) -> Self {
        let mut rows: Vec<LadderRow> = Vec::with_capacity(errors.len());
        for (i, (&level, &error)) in levels.iter().zip(errors).enumerate() {
            let at_floor = error <= floor;
            let (ratio, order) = match i.checked_sub(1).map(|j| (levels[j], errors[j])) {
                Some((pl, pe)) if pe > floor && !at_floor => {
                    let r = error / pe;
                    (Some(r), Some(-r.ln() / (level / pl).ln()))
                }
                _ => (None, None),
            };
            rows.push(LadderRow { level, error, ratio, order, at_floor });
        }
        let monotone = rows
            .windows(2)
            .all(|w| w[1].at_floor || (!w[0].at_floor && w[1].error < w[0].error));
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| !r.at_floor)
            .map(|r| (r.level.ln(), -r.error.ln()))
            .collect();
        let fitted_order = (pts.len() >= 2).then(|| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });
        Ladder { kind, rows, floor, monotone, fitted_order }
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }
}

/// Window cap that every level of a time or space ladder can honour: the
/// coarsest level's gate-limited window length.
fn aligned_config(phi: &SpectralField<f64>, sym: &SymbolSpec, cfg: &SolverConfig) -> Result<SolverConfig> {
    let w = make_symbol_weights(sym, phi.grid())?;
    let m = select_local_steps(phi.l2_norm_sq(), w.bound, cfg.global_horizon, cfg)?;
    let mut out = cfg.clone();
    out.max_local_time = m as f64 * cfg.dt();
    Ok(out)
}

/// Final states at `rates[i]` steps per unit; row `i` holds
/// `||u_i(T) - u_{i+1}(T)||`, so a ladder of `k` rates has `k - 1` rows.
pub fn time_ladder(phi: &SpectralField<f64>, sym: &SymbolSpec, cfg: &SolverConfig, rates: &[f64]) -> Result<Ladder> {
    if rates.len() < 2 || rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Configuration("time ladder needs at least two increasing rates".into()));
    }
    let mut coarse = cfg.clone();
    coarse.steps_per_unit = rates[0];
    let aligned = aligned_config(phi, sym, &coarse)?;
    let finals = rates
        .iter()
        .map(|&r| {
            let mut c = aligned.clone();
            c.steps_per_unit = r;
            Ok(extend_global(phi, sym, &c)?.field.last().to_physical())
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = finals
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ladder::build(
        LadderKind::TimeSteps,
        &rates[..rates.len() - 1],
        &errors,
        LADDER_FLOOR * phi.l2_norm(),
    ))
}

/// Truncation orders on the scenario's first-window potential `a(D) rho`,
/// rescaled so its gate product is exactly the threshold. Errors are
/// against `reference` orders with no tail cutoff.
pub fn truncation_ladder(
    phi: &SpectralField<f64>,
    sym: &SymbolSpec,
    cfg: &SolverConfig,
    orders: &[usize],
    reference: usize,
) -> Result<Ladder> {
    if orders.is_empty() || orders.iter().any(|&k| k >= reference) {
        return Err(Error::Configuration("truncation orders must lie below the reference order".into()));
    }
    let w = make_symbol_weights(sym, phi.grid())?;
    if w.is_zero() {
        return Err(Error::Configuration("truncation ladder needs a nonzero symbol".into()));
    }
    let mut first = cfg.clone();
    first.global_horizon = select_local_steps(phi.l2_norm_sq(), w.bound, cfg.global_horizon, cfg)? as f64 * cfg.dt();
    let rec = extend_global(phi, sym, &first)?;
    let v = rec.density.multiplied(&w.values)?;
    let (s, t) = (v.times().t_start, v.times().t_end);
    let mut p = cfg.propagator.clone();
    let gate = smallness_product(&v, s, t, &p)?;
    let v = v.scaled(num_complex::Complex::new(p.smallness_target / gate, 0.0));
    p.tail_tolerance = 0.0;
    let run = |k: usize| {
        let mut q = p.clone();
        q.truncation_order = k;
        propagate_small(&v, s, t, phi, &q)
    };
    let exact = run(reference)?;
    let errors = orders
        .iter()
        .map(|&k| run(k)?.distance(&exact))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<f64> = orders.iter().map(|&k| k as f64).collect();
    let mut lad = Ladder::build(LadderKind::TruncationOrder, &levels, &errors, LADDER_FLOOR * phi.l2_norm());
    // geometric, not algebraic
    lad.fitted_order = None;
    lad.rows.iter_mut().for_each(|r| r.order = None);
    Ok(lad)
}

/// `||u_n(T) - u_ref(T)||` on grids of `sizes[i]` points over a common
/// length, with the last size as reference; distances are taken mode by
/// mode on the whole-line transform samples.
pub fn spectral_ladder(
    data: &InitialData,
    length: f64,
    sizes: &[usize],
    sym: &SymbolSpec,
    cfg: &SolverConfig,
) -> Result<Ladder> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Configuration("grid ladder needs at least two increasing sizes".into()));
    }
    let grids = sizes
        .iter()
        .map(|&n| Grid::<f64>::new(GridSpec::new(n, length)?))
        .collect::<Result<Vec<_>>>()?;
    let aligned = aligned_config(&data.sample(&grids[0])?, sym, cfg)?;
    let finals = grids
        .iter()
        .map(|g| Ok(extend_global(&data.sample(g)?, sym, &aligned)?.field.last().to_physical()))
        .collect::<Result<Vec<_>>>()?;
    let reference = finals.last().expect("nonempty");
    let errors: Vec<f64> = finals[..finals.len() - 1]
        .iter()
        .map(|u| mode_distance(u, reference))
        .collect();
    let levels: Vec<f64> = sizes[..sizes.len() - 1].iter().map(|&n| n as f64).collect();
    let floor = LADDER_FLOOR * reference.l2_norm();
    Ok(Ladder::build(LadderKind::GridPoints, &levels, &errors, floor))
}

/// L2 distance between fields on grids of equal length, computed from
/// shared Fourier modes plus the modes only the finer grid carries.
fn mode_distance(coarse: &SpectralField<f64>, fine: &SpectralField<f64>) -> f64 {
    let (gc, gf) = (coarse.grid(), fine.grid());
    let dxi = 2.0 * std::f64::consts::PI / gf.length();
    let ch = coarse.continuum_transform();
    let fh = fine.continuum_transform();
    let lookup: std::collections::HashMap<i64, usize> =
        (0..gc.n()).map(|k| (gc.spec().mode_number(k), k)).collect();
    let sum: f64 = (0..gf.n())
        .map(|k| {
            let z = fh[k];
            match lookup.get(&gf.spec().mode_number(k)) {
                Some(&j) => (z - ch[j]).norm_sqr(),
                None => z.norm_sqr(),
            }
        })
        .sum();
    (dxi * sum).sqrt()
}
