//! Bilinear estimates: the free-flow equivalence on the whole line and the
//! perturbed bounds on `[0, T]`.

use rand::Rng;

use super::ceilings::{OT_CEILING, OT_FLOOR, PERTURBED_BILINEAR_CEILING};
use super::ensemble::{gated_potential, random_state, EnsembleSpec};
use super::report::{SampleRow, VerificationReport};
use crate::error::{Error, Result};
use crate::propagators::{free_propagate, propagate_trajectory, smallness_product, PropagatorConfig};
use crate::spectral::{
    bochner_norm, boundary_mass_fraction, sobolev_norm, Grid, GridSpec, Space, SobolevIndex,
    SpectralField, Trajectory,
};

pub const OZAWA_TSUTSUMI_ID: &str = "ozawa_tsutsumi";
pub const PERTURBED_BILINEAR_ID: &str = "perturbed_bilinear";

/// Share of the squared norm beyond `T*` above which a sample is flagged.
/// The share decays only like `1/T*`, so on feasible windows every sample
/// carries the flag; the measurement adds the asymptotic tail back.
pub const OT_TAIL_TOLERANCE: f64 = 1e-6;
/// Mass fraction allowed in the outer 5% of the torus at `|t| = T*`.
pub const OT_WRAP_TOLERANCE: f64 = 1e-6;

/// Grid and window for the whole-line estimate: the torus must be wide
/// enough that nothing wraps around before `|t| = T*`.
pub fn ozawa_tsutsumi_ensemble(size: usize, seed: u64) -> EnsembleSpec {
    let mut s = EnsembleSpec::new(size, seed);
    s.grid = GridSpec { n_points: 2048, length: 256.0 * std::f64::consts::PI };
    s.steps_per_unit = 16.0;
    s.length = (40.0, 40.0);
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtMeasurement {
    /// `int_{-T*}^{T*} ||S f conj(S g)||^2_{Hdot^{1/2}} dt` (Simpson).
    pub window_sq: f64,
    /// Same on `[-T*/2, T*/2]`.
    pub half_window_sq: f64,
    /// Stationary-phase value of the two tails beyond `T*`.
    pub tail_sq: f64,
    pub half_tail_sq: f64,
    /// Largest outer-edge mass fraction of `S(+-T*) f`, `S(+-T*) g`.
    pub wrap: f64,
}

impl OtMeasurement {
    /// `||S f conj(S g)||_{L^2_t(R; Hdot^{1/2})}` with the tails restored.
    pub fn value(&self) -> f64 {
        (self.window_sq + self.tail_sq).sqrt()
    }

    /// Share of the squared norm that lies beyond `T*`.
    pub fn tail_fraction(&self) -> f64 {
        let t = self.window_sq + self.tail_sq;
        if t > 0.0 { self.tail_sq / t } else { 0.0 }
    }

    /// Relative disagreement of the corrected value between `T*/2` and `T*`.
    pub fn tail_residual(&self) -> f64 {
        let full = self.window_sq + self.tail_sq;
        if full > 0.0 {
            ((self.half_window_sq + self.half_tail_sq) - full).abs() / full
        } else {
            0.0
        }
    }
}

/// `||H||^2_{Hdot^{1/2}}` for `H(xi) = f_hat(xi) conj(g_hat(xi))`, with `H`
/// laid out on the dual grid of spacing `2 pi / L`.
fn product_transform_seminorm_sq(f: &SpectralField<f64>, g: &SpectralField<f64>) -> Result<f64> {
    let grid = f.grid();
    let n = grid.n();
    let spec = grid.spec();
    let fh = f.continuum_transform();
    let gh = g.continuum_transform();
    let dual = Grid::<f64>::new(GridSpec {
        n_points: n,
        length: 2.0 * std::f64::consts::PI / spec.dx(),
    })?;
    // dual point j sits at xi = (j - n/2) 2 pi / L, i.e. FFT slot (j + n/2) mod n
    let vals = (0..n)
        .map(|j| {
            let k = (j + n / 2) % n;
            fh[k] * gh[k].conj()
        })
        .collect();
    let h = SpectralField::new(dual, vals, Space::Physical)?;
    Ok(sobolev_norm(&h, SobolevIndex::homogeneous(0.5)).powi(2))
}

fn simpson_weights(nodes: usize, h: f64) -> Result<Vec<f64>> {
    if nodes < 3 || nodes % 2 == 0 {
        return Err(Error::contract("Simpson needs an even number of steps"));
    }
    Ok((0..nodes)
        .map(|j| {
            let c = if j == 0 || j == nodes - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect())
}

/// Windowed value plus asymptotic tails. The window `[-t_max, t_max]` is
/// sampled at `steps_per_unit`; `2 t_max steps_per_unit` must be a
/// multiple of 4.
pub fn ozawa_tsutsumi_measure(
    f: &SpectralField<f64>,
    g: &SpectralField<f64>,
    t_max: f64,
    steps_per_unit: f64,
) -> Result<OtMeasurement> {
    f.check_compatible(g)?;
    let steps = (2.0 * t_max * steps_per_unit).round() as usize;
    if steps % 4 != 0 || steps == 0 {
        return Err(Error::Configuration(format!(
            "window of {steps} steps is not a positive multiple of 4"
        )));
    }
    let h = 2.0 * t_max / steps as f64;
    let idx = SobolevIndex::homogeneous(0.5);
    let dens = |t: f64| -> f64 {
        let a = free_propagate(f, t).into_physical();
        let b = free_propagate(g, t).into_physical();
        let vals = a.values().iter().zip(b.values()).map(|(x, y)| x * y.conj()).collect();
        let rho = SpectralField::new(a.grid().clone(), vals, Space::Physical).expect("grid-sized");
        sobolev_norm(&rho, idx).powi(2)
    };
    let vals: Vec<f64> = (0..=steps).map(|j| dens(-t_max + j as f64 * h)).collect();
    let w = simpson_weights(steps + 1, h)?;
    let window_sq: f64 = vals.iter().zip(&w).map(|(v, w)| v * w).sum();
    let q = steps / 4;
    let wh = simpson_weights(2 * q + 1, h)?;
    let half_window_sq: f64 = vals[q..=3 * q].iter().zip(&wh).map(|(v, w)| v * w).sum();
    // per side: int_{T}^{inf} ||H||^2 / (4 t^2) dt
    let hs = product_transform_seminorm_sq(f, g)?;
    let tail_sq = hs / (2.0 * t_max);
    let half_tail_sq = hs / t_max;
    let mut wrap = 0.0f64;
    for t in [-t_max, t_max] {
        wrap = wrap
            .max(boundary_mass_fraction(&free_propagate(f, t), 0.05))
            .max(boundary_mass_fraction(&free_propagate(g, t), 0.05));
    }
    Ok(OtMeasurement { window_sq, half_window_sq, tail_sq, half_tail_sq, wrap })
}

/// Ratio `||S f conj(S g)||_{L^2_t Hdot^{1/2}} / (||f|| ||g||)` over random
/// pairs, checked against a two-sided band. The window is `spec.length.1`.
pub fn verify_ozawa_tsutsumi(spec: &EnsembleSpec) -> Result<VerificationReport> {
    let grid = Grid::<f64>::new(spec.grid)?;
    let t_max = spec.length.1;
    let results = spec.collect(|i| -> Result<(SampleRow, OtMeasurement)> {
        let mut rng = spec.rng(i);
        let f = random_state(&mut rng, &grid);
        let g = random_state(&mut rng, &grid);
        let m = ozawa_tsutsumi_measure(&f, &g, t_max, spec.steps_per_unit)?;
        let mut row = SampleRow::measured(i, "pair", m.value(), f.l2_norm() * g.l2_norm());
        if m.wrap > OT_WRAP_TOLERANCE {
            row = row.flagged("wraps_around");
        } else if m.tail_fraction() > OT_TAIL_TOLERANCE {
            row = row.flagged("tail_mass");
        }
        Ok((row, m))
    });
    let mut rows = Vec::new();
    let (mut tail_frac, mut tail_res, mut wrap) = (0.0f64, 0.0f64, 0.0f64);
    for r in results {
        let (row, m) = r?;
        tail_frac = tail_frac.max(m.tail_fraction());
        tail_res = tail_res.max(m.tail_residual());
        wrap = wrap.max(m.wrap);
        rows.push(row);
    }
    let mut rep = VerificationReport::new(OZAWA_TSUTSUMI_ID, spec.seed, spec.size, None, OT_CEILING, rows)
        .with_floor(OT_FLOOR);
    let kappa = if rep.min_ratio > 0.0 { rep.max_ratio.max(1.0 / rep.min_ratio) } else { f64::INFINITY };
    rep.metrics.insert("kappa".into(), kappa);
    rep.metrics.insert("band_ok".into(), f64::from(rep.min_ratio >= rep.max_ratio / 25.0));
    rep.metrics.insert("max_tail_fraction".into(), tail_frac);
    rep.metrics.insert("max_tail_residual".into(), tail_res);
    rep.metrics.insert("max_wrap_fraction".into(), wrap);
    rep.metrics.insert("window".into(), t_max);
    rep.notes.push("the equivalence band is a regression baseline, not a sharp constant".into());
    Ok(rep)
}

/// `|S_V(t) phi|^2` on every node of `v`'s grid, in physical space.
pub fn perturbed_density(
    v: &Trajectory<f64>,
    phi: &SpectralField<f64>,
    cfg: &PropagatorConfig,
) -> Result<Trajectory<f64>> {
    let t = v.times();
    let (u, _) = propagate_trajectory(v, t.t_start, t.t_end, phi, cfg)?;
    Ok(u.map(|s| s.to_physical().modulus_sq()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedSample {
    /// `|| |S_V phi|^2 ||_{L^2_t H^{1/2}}`
    pub a_priori_lhs: f64,
    /// `4 ||phi||^2`
    pub a_priori_rhs: f64,
    pub gate: f64,
    /// `(lhs, rhs, gate of V')` of the difference estimate, if a partner was given.
    pub difference: Option<(f64, f64, f64)>,
}

/// Both bounds for one `(V, phi)` and an optional partner `V'`. Errors
/// with `SmallnessViolation` when either potential misses the 1/2 gate.
pub fn perturbed_bilinear_sample(
    v: &Trajectory<f64>,
    v_prime: Option<&Trajectory<f64>>,
    phi: &SpectralField<f64>,
    cfg: &PropagatorConfig,
) -> Result<PerturbedSample> {
    let t = *v.times();
    let len = t.t_end - t.t_start;
    let target = 0.5;
    let check = |w: &Trajectory<f64>| -> Result<f64> {
        let g = smallness_product(w, t.t_start, t.t_end, cfg)?;
        if g > target {
            return Err(Error::SmallnessViolation { measured: g, target });
        }
        Ok(g)
    };
    let gate = check(v)?;
    let idx = SobolevIndex::inhomogeneous(0.5);
    let mass = phi.l2_norm_sq();
    let rho = perturbed_density(v, phi, cfg)?;
    let a_priori_lhs = bochner_norm(&rho, 2.0, idx)?;
    let difference = match v_prime {
        None => None,
        Some(w) => {
            let gate2 = check(w)?;
            let rho2 = perturbed_density(w, phi, cfg)?;
            let lhs = bochner_norm(&rho.sub(&rho2)?, 2.0, idx)?;
            let dv = bochner_norm(&v.sub(w)?, 2.0, cfg.gate_index())?;
            let rhs = 16.0 * cfg.gate_product(len, dv) * mass;
            Some((lhs, rhs, gate2))
        }
    };
    Ok(PerturbedSample { a_priori_lhs, a_priori_rhs: 4.0 * mass, gate, difference })
}

/// Checks `4 ||phi||^2` for gated `V` and `16 c T^theta ||V - V'|| ||phi||^2`
/// for gated pairs. Each sample contributes an `a_priori` and a
/// `difference` row; both ratios carry the paper constant, so the ceiling
/// is 1.
pub fn verify_perturbed_bilinear(
    spec: &EnsembleSpec,
    cfg: &PropagatorConfig,
) -> Result<VerificationReport> {
    let grid = Grid::<f64>::new(spec.grid)?;
    let results = spec.collect(|i| -> Result<Vec<SampleRow>> {
        let mut rng = spec.rng(i);
        let len = spec.draw_length(&mut rng);
        let times = spec.times(len)?;
        let g1 = 0.1 + 0.3 * rng.gen::<f64>();
        let g2 = 0.005 + 0.095 * rng.gen::<f64>();
        let v = gated_potential(&mut rng, &spec.potentials, &grid, times, cfg, g1)?;
        let w = gated_potential(&mut rng, &spec.potentials, &grid, times, cfg, g2)?;
        let phi = random_state(&mut rng, &grid);
        let v2 = v.sub(&w)?;
        let label = format!("len={len:.4}");
        Ok(match perturbed_bilinear_sample(&v, Some(&v2), &phi, cfg) {
            Ok(s) => {
                let mut rows = vec![SampleRow::measured(i, format!("a_priori {label}"), s.a_priori_lhs, s.a_priori_rhs)];
                if let Some((l, r, _)) = s.difference {
                    rows.push(SampleRow::measured(i, format!("difference {label}"), l, r));
                }
                rows
            }
            Err(Error::SmallnessViolation { .. }) => {
                vec![SampleRow::skipped(i, label, "gate_failed")]
            }
            Err(e) => return Err(e),
        })
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let mut rep = VerificationReport::new(
        PERTURBED_BILINEAR_ID,
        spec.seed,
        spec.size,
        Some(cfg.delta),
        PERTURBED_BILINEAR_CEILING,
        rows,
    );
    for part in ["a_priori", "difference"] {
        let m = rep
            .samples
            .iter()
            .filter(|s| s.label.starts_with(part))
            .filter_map(|s| s.ratio)
            .fold(0.0, f64::max);
        rep.metrics.insert(format!("max_ratio_{part}"), m);
    }
    rep.metrics.insert("c_delta".into(), cfg.c_delta);
    Ok(rep)
}
