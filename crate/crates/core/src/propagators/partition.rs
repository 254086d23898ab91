//! Greedy partitions into gated intervals and the composed propagator.

use serde::{Deserialize, Serialize};

use super::config::PropagatorConfig;
use super::dyson::resolve_span;
use super::small::{gate_on, gate_profile, small_nodes, SeriesReport};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{NormProfile, Space, SpectralField, Trajectory};

/// Node-aligned breakpoints `r_0 < ... < r_{N+1}` with per-interval gate
/// products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub breakpoints: Vec<usize>,
    pub times: Vec<f64>,
    pub smallness: Vec<f64>,
}

impl PartitionPlan {
    pub fn intervals(&self) -> usize {
        self.breakpoints.len().saturating_sub(1)
    }

    /// Splits every interval spanning at least two steps at its middle node.
    pub fn refined(&self, prof: &NormProfile, cfg: &PropagatorConfig) -> Self {
        let mut bps = vec![self.breakpoints[0]];
        for w in self.breakpoints.windows(2) {
            if w[1] - w[0] >= 2 {
                bps.push(w[0] + (w[1] - w[0]) / 2);
            }
            bps.push(w[1]);
        }
        Self::from_breakpoints(bps, prof, cfg)
    }

    fn from_breakpoints(bps: Vec<usize>, prof: &NormProfile, cfg: &PropagatorConfig) -> Self {
        let times = bps.iter().map(|&m| prof.times().node(m)).collect();
        let smallness = bps.windows(2).map(|w| gate_on(prof, w[0], w[1], cfg)).collect();
        Self {
            breakpoints: bps,
            times,
            smallness,
        }
    }
}

/// Composition diagnostics: plan, per-interval series, and growth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropagationReport {
    pub plan: PartitionPlan,
    pub series: Vec<SeriesReport>,
    /// `||S_V(t,s) psi|| / ||psi||` (0 for zero data).
    pub growth: f64,
    /// `2^{intervals}`, the composed a priori bound.
    pub growth_bound: f64,
}

/// Longest admissible steps from the left, found by bisection on node count.
pub fn plan_partition<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<PartitionPlan> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    let prof = gate_profile(v, cfg)?;
    plan_on(&prof, i0, i1, cfg)
}

pub(crate) fn plan_on(
    prof: &NormProfile,
    i0: usize,
    i1: usize,
    cfg: &PropagatorConfig,
) -> Result<PartitionPlan> {
    cfg.validate()?;
    let times = prof.times();
    let ok = |a: usize, b: usize| {
        times.node(b) - times.node(a) <= 1.0 + 1e-12 && gate_on(prof, a, b, cfg) <= cfg.smallness_target
    };
    let mut bps = vec![i0];
    let mut a = i0;
    while a < i1 {
        if !ok(a, a + 1) {
            return Err(Error::SmallnessViolation {
                measured: gate_on(prof, a, a + 1, cfg),
                target: cfg.smallness_target,
            });
        }
        let b = if ok(a, i1) {
            i1
        } else {
            // ok(a, lo) holds, ok(a, hi) fails
            let (mut lo, mut hi) = (a + 1, i1);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(a, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        bps.push(b);
        a = b;
    }
    Ok(PartitionPlan::from_breakpoints(bps, prof, cfg))
}

/// `S_V(t, s) psi` for general `V`: greedy partition, then composition.
pub fn propagate<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<SpectralField<T>> {
    propagate_report(v, s, t, psi, cfg).map(|(f, _)| f)
}

pub fn propagate_report<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<(SpectralField<T>, PropagationReport)> {
    let plan = plan_partition(v, s, t, cfg)?;
    propagate_with_plan(v, &plan, psi, cfg)
}

/// Composes the gated pieces of an explicit plan.
pub fn propagate_with_plan<T: Real>(
    v: &Trajectory<T>,
    plan: &PartitionPlan,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<(SpectralField<T>, PropagationReport)> {
    let prof = gate_profile(v, cfg)?;
    let (mut nodes, rep) = compose(v, &prof, plan, psi, cfg, false)?;
    let out = nodes.pop().expect("end node");
    let out = match psi.space() {
        Space::Physical => out,
        Space::Frequency => out.into_frequency(),
    };
    Ok((out, rep))
}

/// States at every node of `[s, t]` (physical space), composed over the
/// greedy plan.
pub fn propagate_trajectory<T: Real>(
    v: &Trajectory<T>,
    s: f64,
    t: f64,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
) -> Result<(Trajectory<T>, PropagationReport)> {
    let (i0, i1) = resolve_span(v.times(), s, t)?;
    if i0 == i1 {
        return Err(Error::contract("trajectory needs at least one step"));
    }
    let prof = gate_profile(v, cfg)?;
    let plan = plan_on(&prof, i0, i1, cfg)?;
    let (nodes, rep) = compose(v, &prof, &plan, psi, cfg, true)?;
    let traj = Trajectory::new(v.grid().clone(), v.times().slice(i0, i1)?, nodes)?;
    Ok((traj, rep))
}

pub(crate) fn compose<T: Real>(
    v: &Trajectory<T>,
    prof: &NormProfile,
    plan: &PartitionPlan,
    psi: &SpectralField<T>,
    cfg: &PropagatorConfig,
    all_nodes: bool,
) -> Result<(Vec<SpectralField<T>>, PropagationReport)> {
    let mut state = psi.to_physical();
    let mut out = vec![state.clone()];
    let mut series = Vec::with_capacity(plan.intervals());
    for w in plan.breakpoints.windows(2) {
        let (nodes, rep) = small_nodes(v, prof, w[0], w[1], &state, cfg, all_nodes)?;
        state = nodes.last().expect("end node").clone();
        if all_nodes {
            out.extend(nodes.into_iter().skip(1));
        }
        series.push(rep);
    }
    if !all_nodes {
        out = vec![state];
    }
    let n0 = psi.l2_norm().as_f64();
    let growth = if n0 > 0.0 {
        out.last().expect("state").l2_norm().as_f64() / n0
    } else {
        0.0
    };
    let rep = PropagationReport {
        plan: plan.clone(),
        series,
        growth,
        growth_bound: 2f64.powi(plan.intervals() as i32),
    };
    Ok((out, rep))
}
