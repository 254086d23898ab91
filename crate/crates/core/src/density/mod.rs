//! Contraction solver for the closed density equation
//! `rho = |S_{a(D) rho}(t) phi|^2` and recovery of `u`.

mod audit;
mod config;
mod global;
mod ladder;
mod record;
mod solver;

pub use audit::{density_residual, duhamel_residual, mass_audit, MassAudit, Quadrature};
pub use config::{
    SolverConfig, DEFAULT_CONTRACTION_LIMIT, DEFAULT_FP_TOLERANCE, DEFAULT_MAX_ITERATIONS,
    DEFAULT_SEAM_TOLERANCE, DEFAULT_STEPS_PER_UNIT, SOLVER_TAIL_TOLERANCE, SOLVER_TRUNCATION_ORDER,
};
pub use global::{extend_global, solve_local, solve_local_from};
pub use ladder::{spectral_ladder, time_ladder, truncation_ladder, Ladder, LadderKind, LadderRow, LADDER_FLOOR};
pub use record::{read_snapshots, write_snapshots, MassLedger, SolutionRecord, SNAPSHOT_MAGIC};
pub use solver::{
    enforce_real, phi_map, phi_map_with, select_local_steps, select_local_time, solve_window,
    InitialIterate, WindowInfo, WindowSolution,
};
