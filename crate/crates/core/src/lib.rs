//! Spectral simulation of the nonlocal Schrödinger equation
//! `i u_t + u_xx = (a(D)|u|^2) u` on a periodic surrogate of the line.
//!
//! The pieces mirror the well-posedness construction: Dyson-series
//! propagators for rough potentials ([`propagators`]), a contraction solver
//! for the closed density equation ([`density`]), and ensemble checks of the
//! quantitative estimates ([`estimates`]).

pub mod density;
pub mod error;
pub mod estimates;
pub mod scalar;
pub mod propagators;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spectral::{
    apply_multiplier, bochner_norm, sobolev_norm, transform, Direction, GridSpec, Homogeneity,
    InitialData, SobolevIndex, Space, SymbolKind, SymbolSpec, TimeGrid,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Grid = spectral::Grid<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Traj = spectral::Trajectory<f64>;
pub type Grid32 = spectral::Grid<f32>;
pub type Field32 = spectral::SpectralField<f32>;
pub type Traj32 = spectral::Trajectory<f32>;
