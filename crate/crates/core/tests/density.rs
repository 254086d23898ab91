mod common;

use std::f64::consts::PI;

use common::{grid, split_step_cubic, C};
use nlnls::density::*;
use nlnls::propagators::{free_propagate, smallness_product, PropagatorConfig};
use nlnls::spectral::*;
use nlnls::Error;

fn small_grid() -> Grid<f64> {
    grid(256, 32.0 * PI)
}

fn sech_data(g: &Grid<f64>, norm: f64) -> SpectralField<f64> {
    normalize(&InitialData::sech(1.0, 2.0).sample(g).unwrap(), norm)
}

fn config(delta: f64, horizon: f64) -> SolverConfig {
    let mut cfg = SolverConfig::new(delta).unwrap();
    cfg.global_horizon = horizon;
    cfg
}

fn complex_symbol(g: &Grid<f64>, delta: f64) -> SymbolSpec {
    let values = g
        .frequencies()
        .iter()
        .map(|x| (0.0, (1.0 + x * x).powf(0.125)))
        .collect();
    SymbolSpec::new(SymbolKind::Tabulated { values }, delta).unwrap()
}

fn sup_l2_distance(a: &Trajectory<f64>, b: &Trajectory<f64>) -> f64 {
    a.snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(x, y)| x.distance(y).unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn decoupled_symbol_gives_free_density() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.5);
    let sym = SymbolSpec::zero(0.5).unwrap();
    let times = TimeGrid::with_rate(0.0, 0.5, cfg.steps_per_unit).unwrap();
    let free = Trajectory::from_fn(&g, times, |_, _| C::new(0.0, 0.0))
        .map(|_| SpectralField::zeros(&g, Space::Physical));
    let junk = Trajectory::from_fn(&g, times, |t, x| C::new((x * t).cos().abs(), 0.0));
    let a = phi_map(&free, &phi, &sym, &cfg).unwrap();
    let b = phi_map(&junk, &phi, &sym, &cfg).unwrap();
    assert_eq!(sup_l2_distance(&a, &b), 0.0);

    let rec = solve_local(&phi, &sym, &cfg).unwrap();
    assert_eq!(rec.windows.len(), 1);
    assert_eq!(rec.total_iterations(), 1);
    for (m, r) in rec.density.snapshots().iter().enumerate() {
        let f = free_propagate(&phi, rec.times().node(m)).to_physical().modulus_sq();
        assert!(r.distance(&f).unwrap() < 1e-14);
    }
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let g = small_grid();
    let phi = SpectralField::zeros(&g, Space::Physical);
    let cfg = config(0.5, 0.25);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let times = TimeGrid::with_rate(0.0, 0.25, cfg.steps_per_unit).unwrap();
    let rho = Trajectory::zeros(&g, times);
    let out = phi_map(&rho, &phi, &sym, &cfg).unwrap();
    assert!(out.snapshots().iter().all(|s| s.max_abs() == 0.0));
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let audit = mass_audit(&rec).unwrap();
    assert!(audit.lhs.iter().chain(&audit.rhs).all(|m| *m == 0.0));
}

#[test]
fn phi_map_refuses_a_large_density() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.25);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let times = TimeGrid::with_rate(0.0, 0.25, cfg.steps_per_unit).unwrap();
    let huge = Trajectory::from_fn(&g, times, |_, x| C::new(1e3 * (-x * x).exp(), 0.0));
    assert!(matches!(
        phi_map(&huge, &phi, &sym, &cfg),
        Err(Error::SmallnessViolation { .. })
    ));
}

#[test]
fn local_time_selection() {
    let g = small_grid();
    let cfg = config(0.5, 3.0);
    let zero = SymbolSpec::zero(0.5).unwrap();
    assert_eq!(select_local_time(&sech_data(&g, 1.0), &zero, &cfg).unwrap(), 1.0);
    let mut short = cfg.clone();
    short.global_horizon = 0.375;
    assert_eq!(select_local_time(&sech_data(&g, 1.0), &zero, &short).unwrap(), 0.375);

    // ||phi|| = 1 puts T near 2e-4, well below the default step
    let mut cfg = cfg;
    cfg.steps_per_unit = 65536.0;
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let t1 = select_local_time(&sech_data(&g, 0.5), &sym, &cfg).unwrap();
    let t2 = select_local_time(&sech_data(&g, 1.0), &sym, &cfg).unwrap();
    assert!(t2 <= t1);

    // bisection postcondition at delta = 1/2, ||phi|| = 1
    let w = make_symbol_weights::<f64>(&sym, &g).unwrap();
    let r = 4.0;
    let p = &cfg.propagator;
    let dt = cfg.dt();
    assert!(p.gate_product(t2, r * w.bound) <= 0.5);
    assert!(p.gate_product(t2 + dt, r * w.bound) > 0.5);
}

#[test]
fn one_step_gate_failure_is_a_configuration_error() {
    let g = small_grid();
    let cfg = config(0.5, 1.0);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let err = select_local_time(&sech_data(&g, 100.0), &sym, &cfg).unwrap_err();
    assert!(matches!(err, Error::Configuration(_)), "{err}");
}

#[test]
fn radius_override_below_four_mass_is_rejected() {
    let g = small_grid();
    let mut cfg = config(0.5, 0.25);
    cfg.radius = Some(0.5);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    assert!(solve_local(&sech_data(&g, 0.5), &sym, &cfg).is_err());
    cfg.radius = Some(1.25);
    assert!(solve_local(&sech_data(&g, 0.5), &sym, &cfg).is_ok());
}

#[test]
fn cubic_matches_split_step_reference() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.99, 0.25);
    let sym = SymbolSpec::constant(-1.0, 0.99).unwrap();
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let reference = split_step_cubic(&phi, -1.0, 0.25, 20000);
    let err = rec.field.last().distance(&reference).unwrap();
    assert!(err < 1e-6, "split-step gap {err:.3e}");
}

#[test]
fn converged_solution_is_self_consistent() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 1.0);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let rec = solve_local(&phi, &sym, &cfg).unwrap();
    let w = &rec.windows[0];
    assert!(rec.a_priori_ok());
    assert_eq!(w.ball_violations, 0);
    assert!(rec.ratios().iter().all(|q| *q <= DEFAULT_CONTRACTION_LIMIT));
    assert!(rec.min_density() >= -1e-9);
    assert!(rec.modulus_mismatch() < 1e-12);

    let again = phi_map(&rec.density, &phi, &sym, &cfg).unwrap();
    let res = bochner_norm(&again.sub(&rec.density).unwrap(), 2.0, SobolevIndex::inhomogeneous(0.5)).unwrap();
    assert!(res < cfg.fp_tolerance * w.radius, "fixed-point residual {res:.3e}");
}

#[test]
fn free_and_zero_iterates_reach_the_same_fixed_point() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.75, 1.0);
    let sym = SymbolSpec::fractional_bracket(-1.0, 0.75).unwrap();
    let a = solve_local_from(&phi, &sym, &cfg, InitialIterate::Free).unwrap();
    let b = solve_local_from(&phi, &sym, &cfg, InitialIterate::Zero).unwrap();
    assert!(b.total_iterations() >= a.total_iterations());
    let idx = SobolevIndex::inhomogeneous(0.5);
    let d = bochner_norm(&a.density.sub(&b.density).unwrap(), 2.0, idx).unwrap();
    let n = bochner_norm(&a.density, 2.0, idx).unwrap();
    assert!(d <= 10.0 * cfg.fp_tolerance * n, "{d:.3e} vs {n:.3e}");
}

#[test]
fn given_iterate_must_match_the_window() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 1.0);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let wrong = Trajectory::zeros(&g, TimeGrid::new(0.0, 0.5, 3).unwrap());
    assert!(solve_local_from(&phi, &sym, &cfg, InitialIterate::Given(wrong)).is_err());
}

#[test]
fn iteration_budget_is_enforced() {
    let g = small_grid();
    let mut cfg = config(0.5, 1.0);
    cfg.max_iterations = 1;
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    assert!(matches!(
        solve_local(&sech_data(&g, 0.5), &sym, &cfg),
        Err(Error::NonConvergence { iterations: 1, .. })
    ));
}

#[test]
fn complex_dust_is_dropped_and_real_parts_kept() {
    let g = small_grid();
    let times = TimeGrid::new(0.0, 0.1, 2).unwrap();
    let dusty = Trajectory::from_fn(&g, times, |_, x| C::new((-x * x).exp(), 1e-15));
    let clean = enforce_real(&dusty).unwrap();
    assert!(clean
        .snapshots()
        .iter()
        .all(|s| s.values().iter().all(|z| z.im == 0.0)));
    let bad = Trajectory::from_fn(&g, times, |_, x| C::new((-x * x).exp(), 1e-3));
    assert!(matches!(enforce_real(&bad), Err(Error::InvalidInput(_))));
}

#[test]
fn decoupled_global_extension_is_free_evolution() {
    let g = small_grid();
    let phi = sech_data(&g, 1.0);
    let cfg = config(0.5, 3.0);
    let rec = extend_global(&phi, &SymbolSpec::zero(0.5).unwrap(), &cfg).unwrap();
    assert_eq!(rec.windows.len(), 3);
    assert_eq!(rec.boundaries(), vec![0.0, 1.0, 2.0, 3.0]);
    assert!(rec.windows.iter().all(|w| w.seam_jump < 1e-14));
    for m in (0..rec.times().n_nodes()).step_by(64) {
        let f = free_propagate(&phi, rec.times().node(m));
        assert!(rec.field.snapshot(m).distance(&f).unwrap() < 1e-12);
    }
}

#[test]
fn short_horizon_is_one_local_window() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.03125);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let a = extend_global(&phi, &sym, &cfg).unwrap();
    let b = solve_local(&phi, &sym, &cfg).unwrap();
    assert_eq!(a.windows.len(), 1);
    assert_eq!(a.windows, b.windows);
    assert_eq!(sup_l2_distance(&a.field, &b.field), 0.0);
}

#[test]
fn real_symbol_conserves_mass_and_solves_the_full_interval() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 2.0);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    assert!(rec.windows.len() > 1);
    let len0 = rec.windows[0].t_end - rec.windows[0].t_start;
    for w in &rec.windows[..rec.windows.len() - 1] {
        assert!((w.t_end - w.t_start - len0).abs() < 1e-12);
    }
    let audit = mass_audit(&rec).unwrap();
    assert!(audit.max_relative_drift < 1e-7, "drift {:.3e}", audit.max_relative_drift);
    assert!(audit.max_imag_integrand.unwrap() < 1e-12);
    let res = density_residual(&rec).unwrap();
    assert!(res < 1e-7, "full-interval residual {res:.3e}");
}

#[test]
fn complex_symbol_mass_identity_holds_while_mass_drifts() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 1.0);
    let sym = complex_symbol(&g, 0.5);
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let audit = mass_audit(&rec).unwrap();
    assert!(audit.max_imag_integrand.is_none());
    assert!(audit.max_relative_drift > 1e-3);
    assert!(audit.max_identity_gap < 1e-6, "identity gap {:.3e}", audit.max_identity_gap);
    // ledger (spectral pairing) and audit (physical pairing) agree
    let last = rec.mass.correction.len() - 1;
    let ledger = rec.mass.mass[0] + rec.mass.correction[last];
    assert!((ledger - audit.rhs[last]).abs() < 1e-12);
}

#[test]
fn duhamel_formulation_is_satisfied() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.75, 0.5);
    let sym = SymbolSpec::fractional_bracket(-1.0, 0.75).unwrap();
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let res = duhamel_residual(&rec, Quadrature::Simpson).unwrap();
    assert!(res < 1e-6, "Duhamel residual {res:.3e}");
    assert!(duhamel_residual(&rec, Quadrature::Trapezoid).unwrap() < res);
}

#[test]
fn data_to_solution_map_is_lipschitz() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.5);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let base = extend_global(&phi, &sym, &cfg).unwrap();
    let bump = normalize(&InitialData::gaussian(1.0, 3.0).sample(&g).unwrap(), 1.0);
    let ratio = |eps: f64| {
        let p = phi.axpy(C::new(eps, 0.0), &bump).unwrap();
        let rec = extend_global(&p, &sym, &cfg).unwrap();
        sup_l2_distance(&rec.field, &base.field) / eps
    };
    let (a, b) = (ratio(1e-3), ratio(5e-4));
    assert!(a < 10.0);
    assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
}

#[test]
fn delta_mismatch_is_a_configuration_error() {
    let g = small_grid();
    let cfg = config(0.5, 0.25);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.75).unwrap();
    assert!(matches!(
        solve_local(&sech_data(&g, 0.5), &sym, &cfg),
        Err(Error::Configuration(_))
    ));
}

#[test]
fn record_roundtrips_through_a_directory() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.25);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    rec.save(dir.path()).unwrap();
    for f in ["metadata.json", "density.bin", "field.bin", "initial.bin", "mass.csv", "contraction.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let bytes = std::fs::read(dir.path().join("field.bin")).unwrap();
    assert_eq!(&bytes[..8], SNAPSHOT_MAGIC);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 256);
    let count = rec.times().n_nodes();
    assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), count as u64);
    assert_eq!(bytes.len(), 32 + 8 * 256 * count);

    let back: SolutionRecord<f64> = SolutionRecord::load(dir.path()).unwrap();
    assert_eq!(back.windows, rec.windows);
    assert_eq!(back.mass, rec.mass);
    assert_eq!(back.symbol, rec.symbol);
    assert_eq!(back.config, rec.config);
    assert_eq!(back.times(), rec.times());
    assert!(sup_l2_distance(&back.field, &rec.field) < 1e-6);

    let mass = std::fs::read_to_string(dir.path().join("mass.csv")).unwrap();
    assert!(mass.starts_with("t,mass,pairing,correction"));
    assert_eq!(mass.lines().count(), count + 1);
}

#[test]
fn truncated_snapshot_file_is_rejected() {
    let g = small_grid();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bin");
    let f = sech_data(&g, 1.0);
    write_snapshots(&path, &[f.clone(), f]).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 4);
    std::fs::write(&path, &bytes).unwrap();
    assert!(read_snapshots(&path, &g).is_err());
}

#[test]
fn single_precision_solve_tracks_double() {
    let g64 = small_grid();
    let g32: Grid<f32> = Grid::new(g64.spec()).unwrap();
    let phi64 = sech_data(&g64, 0.5);
    let phi32 = normalize(&InitialData::sech(1.0, 2.0).sample(&g32).unwrap(), 0.5);
    let mut cfg = config(0.5, 0.125);
    cfg.fp_tolerance = 1e-5;
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let a = extend_global(&phi64, &sym, &cfg).unwrap();
    let b = extend_global(&phi32, &sym, &cfg).unwrap();
    let last = b.field.last().to_physical();
    let ref64 = a.field.last().to_physical();
    let err: f64 = last
        .values()
        .iter()
        .zip(ref64.values())
        .map(|(x, y)| (C::new(x.re as f64, x.im as f64) - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err * g64.dx().sqrt() < 1e-4);
}

#[test]
fn gate_holds_on_converged_windows() {
    let g = small_grid();
    let phi = sech_data(&g, 0.5);
    let cfg = config(0.5, 0.5);
    let sym = SymbolSpec::fractional_bracket(1.0, 0.5).unwrap();
    let rec = extend_global(&phi, &sym, &cfg).unwrap();
    let w = make_symbol_weights::<f64>(&sym, &g).unwrap();
    let v = rec.density.multiplied(&w.values).unwrap();
    let p: &PropagatorConfig = &cfg.propagator;
    for win in &rec.windows {
        assert!(smallness_product(&v, win.t_start, win.t_end, p).unwrap() <= p.smallness_target);
    }
}
