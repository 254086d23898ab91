//! The Dyson-series propagator on a single gated interval.

use serde::{Deserialize, Serialize};

use super::config::PropagatorConfig;
use super::dyson::{phase_row, resolve_span, series_sweep, Conjugator};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{NormProfile, Space, SpectralField, Trajectory};

/// Per-interval series diagnostics.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SeriesReport {
    pub t_start: f64,
    pub t_end: f64,
    /// Gate product `c |t-s|^theta ||V||`.
    pub smallness: f64,
    /// `||W^{(n)} S(s)^* psi||` at the interval end, `n = 0, 1, ...`.
    pub term_norms: Vec<f64>,
    /// Same terms, sup over the interval's nodes.
    pub term_sup_norms: Vec<f64>,
    /// Geometric estimate of the neglected terms.
    pub tail_bound: f64,
}

impl SeriesReport {
    pub fn orders_used(&self) -> usize {
        self.term_norms.len().saturating_sub(1)
    }

    /// `tau_{n+1} / tau_n` for `n >= 1`, skipping zero terms.
    pub fn term_ratios(&self) -> Vec<f64> {
        self.term_norms
            .windows(2)
            .skip(1)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Spatial gate norms of `V` at every node, for fast interval queries.
pub fn gate_profile<T: Real>(v: &Trajectory<T>, cfg: &PropagatorConfig) -> Result<NormProfile> {
    NormProfile::new(v, 2.0, cfg.gate_index())
}

/// `c_delta |t-s|^theta ||V||_{L^2_t([s,t]; H^{-1/2+delta})}`.
pub fn smallness_product<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<f64> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let prof = gate_profile(v, cfg)?;
    Ok(gate_on(&prof, i0, i1, cfg))
}

pub(crate) fn gate_on(prof: &NormProfile, i0: usize, i1: usize, cfg: &PropagatorConfig) -> f64 {
    let len = prof.times().node(i1) - prof.times().node(i0);
    cfg.gate_product(len, prof.range(i0, i1))
}

/// `S_V(t, s) psi` under the smallness gate.
pub fn propagate_small<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<SpectralField<T>> {
    propagate_small_report(v, s, t, psi, cfg).map(|(f, _)| f)
}

pub fn propagate_small_report<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<(SpectralField<T>, SeriesReport)> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let prof = gate_profile(v, cfg)?;
    let (mut nodes, rep) = small_nodes(v, &prof, i0, i1, psi, cfg, false)?;
    let out = nodes.pop().expect("end node");
    Ok((
        match psi.space() {
            Space::Physical => out,
            Space::Frequency => out.into_frequency(),
        },
        rep,
    ))
}

/// Gate-checked series on nodes `i0..=i1`; returns physical states at
/// every node (or only the last one when `all_nodes` is false).
pub(crate) fn small_nodes<T: Real>(
    v: &Trajectory<T>,
    prof: &NormProfile,
    i0: usize,
    i1: usize,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
    all_nodes: bool,
) -> Result<(Vec<SpectralField<T>>, SeriesReport)> {
    cfg.validate()?;
    if v.grid() != psi.grid() {
        return Err(Error::contract("potential and state live on different grids"));
    }
    let times = v.times();
    let (ts, te) = (times.node(i0), times.node(i1));
    let psi_phys = psi.to_physical();
    if i0 == i1 {
        let rep = SeriesReport {
            t_start: ts,
            t_end: te,
            term_norms: vec![psi.l2_norm().as_f64()],
            term_sup_norms: vec![psi.l2_norm().as_f64()],
            ..Default::default()
        };
        return Ok((vec![psi_phys], rep));
    }
    let smallness = gate_on(prof, i0, i1, cfg);
    if !smallness.is_finite() {
        return Err(Error::InvalidInput("potential norm is not finite".into()));
    }
    if te - ts > 1.0 + 1e-12 || smallness > cfg.smallness_target {
        return Err(Error::SmallnessViolation {
            measured: if te - ts > 1.0 + 1e-12 { f64::INFINITY } else { smallness },
            target: cfg.smallness_target,
        });
    }
    let grid = psi.grid();
    let conj = Conjugator::new(grid, times, i0, i1);
    // interaction picture start: S(s)^* psi
    let back = phase_row::<T>(grid, -ts);
    let g0: Vec<_> = psi
        .to_frequency()
        .values()
        .iter()
        .zip(&back)
        .map(|(a, b)| *a * *b)
        .collect();
    let psi_norm = psi.l2_norm().as_f64();
    let sweep = series_sweep(&conj, v, &g0, cfg.truncation_order, cfg.tail_tolerance * psi_norm);
    let last_term = *sweep.term_norms.last().expect("order 0");
    let q = smallness.min(0.999);
    let rep = SeriesReport {
        t_start: ts,
        t_end: te,
        smallness,
        tail_bound: last_term * q / (1.0 - q),
        term_norms: sweep.term_norms,
        term_sup_norms: sweep.term_sup_norms,
    };
    let to_field = |j: usize, row: &[num_complex::Complex<T>]| {
        let vals = row.iter().zip(conj.phase(j)).map(|(a, b)| *a * *b).collect();
        SpectralField::new(grid.clone(), vals, Space::Frequency)
            .expect("grid-sized")
            .into_physical()
    };
    let nodes = if all_nodes {
        sweep
            .sum
            .iter()
            .enumerate()
            .map(|(j, row)| to_field(j, row))
            .collect()
    } else {
        let j = sweep.sum.len() - 1;
        vec![to_field(j, &sweep.sum[j])]
    };
    Ok((nodes, rep))
}
