//! Propagators for `i u_t + u_xx - V u = 0`: the free flow, the Dyson
//! series under a smallness gate, partition-composition for general `V`,
//! and a dense ODE oracle to check them against.

pub mod calibrate;
pub mod config;
pub mod dyson;
pub mod free;
pub mod kernel;
pub mod oracle;
pub mod partition;
pub mod probe;
pub mod samples;
pub mod small;

pub use calibrate::{cached_c_delta, calibrate_c_delta, calibrate_with, Calibration};
pub use config::PropagatorConfig;
pub use dyson::{
    conjugated_potential_integral, dyson_multilinear_apply, dyson_multilinear_nodes, dyson_multilinear_plus_apply,
    dyson_term_apply, dyson_term_plus_apply, MAX_ORDER,
};
pub use free::free_propagate;
pub use kernel::{hs_kernel_norm, HsKernelNorms};
pub use oracle::{oracle_propagate, oracle_propagate_report, OracleReport};
pub use partition::{
    plan_partition, propagate, propagate_report, propagate_trajectory, propagate_with_plan,
    PartitionPlan, PropagationReport,
};
pub use probe::{operator_norm_estimate, LinearOperatorProbe};
pub use samples::{remove_mean, PotentialFamily};
pub use small::{gate_profile, propagate_small, propagate_small_report, smallness_product, SeriesReport};
