//! Products of ordered Dyson terms in `L^2_t H^{1/2}`.

use std::collections::BTreeMap;

use super::ceilings::MULTILINEAR_CEILING;
use super::ensemble::{gated_potential, random_state, EnsembleSpec};
use super::report::{SampleRow, VerificationReport};
use crate::error::{Error, Result};
use crate::propagators::{dyson_multilinear_nodes, PropagatorConfig};
use crate::spectral::{bochner_norm, Grid, Space, SobolevIndex, SpectralField, TimeGrid, Trajectory};

pub const MULTILINEAR_STRICHARTZ_ID: &str = "multilinear_strichartz";
pub const MAX_MULTILINEAR_ORDER: usize = 4;

/// `S(t) W^{(n)}_{V_1..V_n}(t) f` for `n = 0..=pots.len()` on `pots`' grid.
fn term_trajectories(
    pots: &[Trajectory<f64>],
    f: &SpectralField<f64>,
    times: &TimeGrid,
) -> Result<Vec<Trajectory<f64>>> {
    (0..=pots.len())
        .map(|n| {
            let refs: Vec<&Trajectory<f64>> = pots[..n].iter().collect();
            dyson_multilinear_nodes(&refs, times, times.t_start, times.t_end, f)
        })
        .collect()
}

fn product_norm(a: &Trajectory<f64>, b: &Trajectory<f64>) -> Result<f64> {
    let snaps = a
        .snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(x, y)| {
            let vals = x.values().iter().zip(y.values()).map(|(p, q)| p * q.conj()).collect();
            SpectralField::new(x.grid().clone(), vals, Space::Physical)
        })
        .collect::<Result<Vec<_>>>()?;
    let prod = Trajectory::new(a.grid().clone(), *a.times(), snaps)?;
    bochner_norm(&prod, 2.0, SobolevIndex::inhomogeneous(0.5))
}

/// `(lhs, rhs)` for every `(n, m)` with `n <= vs.len()`, `m <= ws.len()`,
/// all on `times`:
/// lhs is `||S W^{(n)}_{V} f . conj(S W^{(m)}_{V'} g)||_{L^2_t H^{1/2}}`,
/// rhs is `prod_j (c T^theta ||V_j||) prod_k (c T^theta ||V'_k||) ||f|| ||g||`.
pub fn multilinear_table(
    vs: &[Trajectory<f64>],
    ws: &[Trajectory<f64>],
    f: &SpectralField<f64>,
    g: &SpectralField<f64>,
    times: &TimeGrid,
    cfg: &PropagatorConfig,
) -> Result<BTreeMap<(usize, usize), (f64, f64)>> {
    if vs.len() > MAX_MULTILINEAR_ORDER || ws.len() > MAX_MULTILINEAR_ORDER {
        return Err(Error::contract(format!("orders above {MAX_MULTILINEAR_ORDER} are not tabulated")));
    }
    let len = times.t_end - times.t_start;
    let factor = |v: &Trajectory<f64>| -> Result<f64> {
        Ok(cfg.gate_product(len, bochner_norm(v, 2.0, cfg.gate_index())?))
    };
    let fv: Vec<f64> = vs.iter().map(factor).collect::<Result<_>>()?;
    let fw: Vec<f64> = ws.iter().map(factor).collect::<Result<_>>()?;
    let tf = term_trajectories(vs, f, times)?;
    let tg = term_trajectories(ws, g, times)?;
    let base = f.l2_norm() * g.l2_norm();
    let mut out = BTreeMap::new();
    for (n, a) in tf.iter().enumerate() {
        for (m, b) in tg.iter().enumerate() {
            let lhs = product_norm(a, b)?;
            let rhs = fv[..n].iter().product::<f64>() * fw[..m].iter().product::<f64>() * base;
            out.insert((n, m), (lhs, rhs));
        }
    }
    Ok(out)
}

/// Per-`(n, m)` ratios up to `max_order` over random potential lists.
///
/// `growth_base` is `max_k (R_k / R_0)^{1/k}` where `R_k` is the largest
/// ratio with `n + m = k`; a value at most 1 means the calibrated base
/// `c_delta` absorbs the growth in the order.
pub fn verify_multilinear_strichartz(
    spec: &EnsembleSpec,
    cfg: &PropagatorConfig,
    max_order: usize,
) -> Result<VerificationReport> {
    if max_order > MAX_MULTILINEAR_ORDER {
        return Err(Error::contract(format!("max_order above {MAX_MULTILINEAR_ORDER}")));
    }
    let grid = Grid::<f64>::new(spec.grid)?;
    let results = spec.collect(|i| -> Result<Vec<SampleRow>> {
        let mut rng = spec.rng(i);
        let len = spec.draw_length(&mut rng);
        let times = spec.times(len)?;
        let mut draw = |k: usize| -> Result<Vec<Trajectory<f64>>> {
            (0..k)
                .map(|_| gated_potential(&mut rng, &spec.potentials, &grid, times, cfg, 0.5))
                .collect()
        };
        let vs = draw(max_order)?;
        let ws = draw(max_order)?;
        let f = random_state(&mut rng, &grid);
        let g = random_state(&mut rng, &grid);
        let table = multilinear_table(&vs, &ws, &f, &g, &times, cfg)?;
        Ok(table
            .into_iter()
            .map(|((n, m), (l, r))| SampleRow::measured(i, format!("n={n} m={m}"), l, r))
            .collect())
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let mut rep = VerificationReport::new(
        MULTILINEAR_STRICHARTZ_ID,
        spec.seed,
        spec.size,
        Some(cfg.delta),
        MULTILINEAR_CEILING,
        rows,
    );
    let mut by_order = vec![0.0f64; 2 * max_order + 1];
    for n in 0..=max_order {
        for m in 0..=max_order {
            let label = format!("n={n} m={m}");
            let r = rep
                .samples
                .iter()
                .filter(|s| s.label == label)
                .filter_map(|s| s.ratio)
                .fold(0.0, f64::max);
            rep.metrics.insert(format!("max_ratio_{n}_{m}"), r);
            by_order[n + m] = by_order[n + m].max(r);
        }
    }
    let growth = (1..by_order.len())
        .filter(|_| by_order[0] > 0.0)
        .map(|k| (by_order[k] / by_order[0]).powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    rep.metrics.insert("growth_base".into(), growth);
    rep.metrics.insert("growth_ok".into(), f64::from(growth <= 1.0));
    rep.metrics.insert("c_delta".into(), cfg.c_delta);
    rep.notes.push("ceiling is a frozen regression baseline".into());
    Ok(rep)
}
