//! The four subcommands. Each returns an exit code plus a JSON summary
//! and leaves its artifacts and a manifest in the output directory.

use std::fs;
use std::path::Path;

use log::{info, warn};
use nlnls::density::{
    density_residual, extend_global, mass_audit, spectral_ladder, time_ladder, truncation_ladder, Ladder,
    SolutionRecord,
};
use nlnls::estimates::*;
use nlnls::propagators::calibrate_c_delta;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::exit::{CliError, ExitCode};
use crate::manifest::{prepare_output, Manifest};

pub const MASS_DRIFT_LIMIT: f64 = 1e-7;
pub const MASS_IDENTITY_LIMIT: f64 = 1e-6;
pub const DENSITY_RESIDUAL_LIMIT: f64 = 1e-7;
pub const MODULUS_LIMIT: f64 = 1e-8;
pub const TIME_ORDER: f64 = 2.0;
pub const TIME_ORDER_BAND: f64 = 0.3;
/// Error ratio allowed per two extra series orders.
pub const TRUNCATION_RATIO_LIMIT: f64 = 0.36;
/// Ladders stop the fixed point well below the discretisation errors.
pub const LADDER_FP_TOLERANCE: f64 = 1e-13;

pub struct Outcome {
    pub code: ExitCode,
    pub summary: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value <= limit }
    }
}

fn finish(dir: &Path, mut manifest: Manifest, code: ExitCode, mut summary: Value) -> Result<Outcome, CliError> {
    manifest.status = match code {
        ExitCode::Success => "ok",
        ExitCode::Convergence => "soft_fail",
        _ => "invariant_regression",
    }
    .into();
    manifest.write(dir)?;
    summary["status"] = json!(manifest.status);
    summary["output_dir"] = json!(dir.display().to_string());
    summary["config_hash"] = json!(manifest.config_hash);
    Ok(Outcome { code, summary })
}

pub fn simulation_checks(rec: &SolutionRecord<f64>) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let excess = rec
        .windows
        .iter()
        .map(|w| w.density_norm - 4.0 * w.initial_mass)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("a_priori_excess", excess, 1e-8));
    checks.push(Check::at_most("max_contraction_ratio", rec.max_ratio(), rec.config.contraction_limit));
    let audit = mass_audit(rec)?;
    if audit.max_imag_integrand.is_some() {
        checks.push(Check::at_most("mass_relative_drift", audit.max_relative_drift, MASS_DRIFT_LIMIT));
    } else {
        checks.push(Check::at_most("mass_identity_gap", audit.max_identity_gap, MASS_IDENTITY_LIMIT));
    }
    checks.push(Check::at_most("density_residual", density_residual(rec)?, DENSITY_RESIDUAL_LIMIT));
    checks.push(Check::at_most("modulus_mismatch", rec.modulus_mismatch(), MODULUS_LIMIT));
    Ok(checks)
}

pub fn simulate(cfg: &ScenarioConfig, force: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let dir = prepare_output(cfg, force)?;
    let grid = cfg.grid()?;
    let phi = cfg.initial(&grid)?;
    let sym = cfg.symbol()?;
    let solver = cfg.solver()?;
    let mut manifest = Manifest::new("simulate", cfg);
    manifest.c_delta = Some(solver.propagator.c_delta);
    let rec = extend_global(&phi, &sym, &solver)?;
    rec.save(&dir)?;
    let checks = simulation_checks(&rec)?;
    fs::write(dir.join("invariants.json"), serde_json::to_string_pretty(&checks)?)?;
    manifest.artifacts = [
        "metadata.json",
        "initial.bin",
        "density.bin",
        "field.bin",
        "mass.csv",
        "contraction.csv",
        "invariants.json",
    ]
    .map(String::from)
    .to_vec();
    for c in checks.iter().filter(|c| !c.pass) {
        warn!("invariant {} = {:.3e} above {:.3e}", c.name, c.value, c.limit);
    }
    let code = if checks.iter().all(|c| c.pass) { ExitCode::Success } else { ExitCode::Invariant };
    let summary = json!({
        "command": "simulate",
        "linear": cfg.is_linear(),
        "windows": rec.windows.len(),
        "iterations": rec.total_iterations(),
        "max_contraction_ratio": rec.max_ratio(),
        "final_mass": rec.mass.mass.last(),
        "checks": checks,
    });
    finish(&dir, manifest, code, summary)
}

pub const ESTIMATE_IDS: [&str; 4] =
    [SMOOTHING_GAIN_ID, OZAWA_TSUTSUMI_ID, PERTURBED_BILINEAR_ID, MULTILINEAR_STRICHARTZ_ID];

pub fn resolve_estimates(requested: &[String]) -> Result<Vec<&'static str>, CliError> {
    if requested.iter().any(|s| s == "all") {
        return Ok(ESTIMATE_IDS.to_vec());
    }
    let mut out = Vec::new();
    for r in requested {
        let id = ESTIMATE_IDS.iter().copied().find(|id| id == r).ok_or_else(|| {
            CliError::new(
                ExitCode::Config,
                "configuration",
                format!("unknown estimate {r:?}; known: {}, all", ESTIMATE_IDS.join(", ")),
            )
        })?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

pub fn verify(cfg: &ScenarioConfig, force: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let ids = resolve_estimates(&cfg.verify.estimates)?;
    let dir = prepare_output(cfg, force)?;
    let mut manifest = Manifest::new("verify", cfg);
    let v = &cfg.verify;
    let spec = EnsembleSpec::new(v.ensemble_size, cfg.seed);
    let delta = cfg.symbol.delta;
    let mut reports = Vec::new();
    for id in &ids {
        info!("verifying {id} on {} samples", v.ensemble_size);
        let rep = match *id {
            SMOOTHING_GAIN_ID => verify_smoothing_gain(&spec, delta)?,
            OZAWA_TSUTSUMI_ID => verify_ozawa_tsutsumi(&ozawa_tsutsumi_ensemble(v.ensemble_size, cfg.seed))?,
            PERTURBED_BILINEAR_ID => verify_perturbed_bilinear(&spec, &cfg.propagator()?)?,
            _ => verify_multilinear_strichartz(&spec, &cfg.propagator()?, v.max_order)?,
        };
        rep.write_to(&dir)?;
        manifest.artifacts.push(format!("{id}.csv"));
        manifest.artifacts.push(format!("{id}.json"));
        reports.push(json!({
            "estimate": rep.estimate,
            "max_ratio": rep.max_ratio,
            "ceiling": rep.ceiling,
            "pass": rep.pass,
        }));
    }
    let all_pass = reports.iter().all(|r| r["pass"] == json!(true));
    let code = if all_pass { ExitCode::Success } else { ExitCode::Invariant };
    finish(&dir, manifest, code, json!({ "command": "verify", "reports": reports }))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub time: Ladder,
    pub truncation: Option<Ladder>,
    pub spectral: Option<Ladder>,
    pub checks: Vec<Check>,
}

/// Worst error ratio rescaled to two orders per rung.
fn per_two_orders(lad: &Ladder) -> Option<f64> {
    lad.rows
        .windows(2)
        .filter_map(|w| w[1].ratio.map(|r| r.powf(2.0 / (w[1].level - w[0].level))))
        .reduce(f64::max)
}

pub fn convergence(cfg: &ScenarioConfig, force: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let dir = prepare_output(cfg, force)?;
    let grid = cfg.grid()?;
    let phi = cfg.initial(&grid)?;
    let sym = cfg.symbol()?;
    let mut solver = cfg.solver()?;
    solver.fp_tolerance = solver.fp_tolerance.min(LADDER_FP_TOLERANCE);
    let c = &cfg.convergence;
    let mut manifest = Manifest::new("convergence", cfg);
    manifest.c_delta = Some(solver.propagator.c_delta);

    let time = time_ladder(&phi, &sym, &solver, &c.time_rates)?;
    let truncation = if cfg.is_linear() {
        None
    } else {
        Some(truncation_ladder(&phi, &sym, &solver, &c.orders, c.reference_order)?)
    };
    let spectral = match cfg.initial_family() {
        Some(d) => Some(spectral_ladder(&d, cfg.grid.length, &c.sizes, &sym, &solver)?),
        None => None,
    };

    let flag = |name: &str, pass: bool, value: f64, limit: f64| Check { name: name.into(), value, limit, pass };
    let mut checks = vec![flag("time_monotone", time.monotone, 0.0, 0.0)];
    if let Some(p) = time.fitted_order {
        checks.push(flag("time_order", (p - TIME_ORDER).abs() <= TIME_ORDER_BAND, p, TIME_ORDER));
    }
    if let Some(t) = &truncation {
        checks.push(flag("truncation_monotone", t.monotone, 0.0, 0.0));
        if let Some(r) = per_two_orders(t) {
            checks.push(Check::at_most("truncation_ratio", r, TRUNCATION_RATIO_LIMIT));
        }
    }
    if let Some(s) = &spectral {
        checks.push(flag("spectral_monotone", s.monotone, 0.0, 0.0));
    }
    let table = ConvergenceTable { time, truncation, spectral, checks };

    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record(["ladder", "level", "error", "ratio", "order", "at_floor"])?;
    for lad in [Some(&table.time), table.truncation.as_ref(), table.spectral.as_ref()].into_iter().flatten() {
        let kind = serde_json::to_value(lad.kind)?;
        for r in &lad.rows {
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
            w.write_record([
                kind.as_str().unwrap_or_default().to_string(),
                format!("{}", r.level),
                format!("{:e}", r.error),
                opt(r.ratio),
                opt(r.order),
                r.at_floor.to_string(),
            ])?;
        }
    }
    w.flush()?;
    fs::write(dir.join("convergence.json"), serde_json::to_string_pretty(&table)?)?;
    manifest.artifacts = vec!["convergence.csv".into(), "convergence.json".into()];
    let code = if table.checks.iter().all(|c| c.pass) { ExitCode::Success } else { ExitCode::Convergence };
    let summary = json!({ "command": "convergence", "checks": table.checks });
    finish(&dir, manifest, code, summary)
}

pub fn calibrate(cfg: &ScenarioConfig, ensemble: usize, force: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let dir = prepare_output(cfg, force)?;
    let mut manifest = Manifest::new("calibrate", cfg);
    let cal = calibrate_c_delta(cfg.symbol.delta, ensemble)?;
    cal.save(&dir.join("calibration.json"))?;
    manifest.c_delta = Some(cal.c_delta);
    manifest.artifacts = vec!["calibration.json".into()];
    let summary = json!({
        "command": "calibrate",
        "delta": cal.delta,
        "c_delta": cal.c_delta,
        "max_ratio": cal.max_ratio,
        "ensemble_size": cal.ensemble_size,
    });
    finish(&dir, manifest, ExitCode::Success, summary)
}
