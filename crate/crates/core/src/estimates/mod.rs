//! Ensemble checks of the quantitative estimates behind the construction.
//! Everything here runs in `f64`.

mod bilinear;
pub mod ceilings;
mod ensemble;
mod multilinear;
mod report;
mod smoothing;

pub use bilinear::{
    ozawa_tsutsumi_ensemble, ozawa_tsutsumi_measure, perturbed_bilinear_sample, perturbed_density,
    verify_ozawa_tsutsumi, verify_perturbed_bilinear, OtMeasurement, PerturbedSample,
    OT_TAIL_TOLERANCE, OT_WRAP_TOLERANCE, OZAWA_TSUTSUMI_ID, PERTURBED_BILINEAR_ID,
};
pub use ensemble::{gated_potential, random_state, EnsembleSpec, DEFAULT_SEED};
pub use multilinear::{
    multilinear_table, verify_multilinear_strichartz, MAX_MULTILINEAR_ORDER,
    MULTILINEAR_STRICHARTZ_ID,
};
pub use report::{SampleRow, VerificationReport};
pub use smoothing::{smoothing_sample, verify_smoothing_gain, SmoothingSample, SMOOTHING_GAIN_ID};
