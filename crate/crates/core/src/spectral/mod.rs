//! Periodic spectral discretisation: grids, fields, norms, symbols.

pub mod data;
pub mod field;
pub mod grid;
pub mod norms;
pub mod symbol;
pub mod time;

pub use data::{boundary_mass_fraction, normalize, InitialData};
pub use field::{apply_multiplier, transform, Direction, Space, SpectralField};
pub use grid::{Grid, GridSpec, DEFAULT_LENGTH, DEFAULT_POINTS};
pub use norms::{
    bochner_norm, bochner_sum_space_norm, sobolev_norm, sum_space_norm, BochnerSpace,
    Homogeneity, NormProfile, SobolevIndex,
};
pub use symbol::{make_symbol_weights, SymbolKind, SymbolSpec, SymbolWeights};
pub use time::{TimeGrid, Trajectory};
