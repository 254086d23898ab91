//! Standard initial-data families.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    /// `amplitude exp(-(x-center)^2 / (2 width^2)) e^{i velocity x}`
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
        velocity: f64,
    },
    /// `amplitude sech((x-center)/width) e^{i velocity x}`
    Sech {
        amplitude: f64,
        width: f64,
        center: f64,
        velocity: f64,
    },
    /// Gaussian envelope times `cos(wavenumber x)`.
    PlaneModulated {
        amplitude: f64,
        width: f64,
        wavenumber: f64,
    },
}

impl InitialData {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        InitialData::Gaussian {
            amplitude,
            width,
            center: 0.0,
            velocity: 0.0,
        }
    }

    pub fn sech(amplitude: f64, width: f64) -> Self {
        InitialData::Sech {
            amplitude,
            width,
            center: 0.0,
            velocity: 0.0,
        }
    }

    pub fn sample<T: Real>(&self, grid: &Grid<T>) -> Result<SpectralField<T>> {
        let width = match self {
            InitialData::Gaussian { width, .. }
            | InitialData::Sech { width, .. }
            | InitialData::PlaneModulated { width, .. } => *width,
        };
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::contract(format!("width must be positive, got {width}")));
        }
        let f = |x: f64| -> Complex<f64> {
            match *self {
                InitialData::Gaussian {
                    amplitude,
                    width,
                    center,
                    velocity,
                } => {
                    let y = (x - center) / width;
                    Complex::from_polar(amplitude * (-0.5 * y * y).exp(), velocity * x)
                }
                InitialData::Sech {
                    amplitude,
                    width,
                    center,
                    velocity,
                } => Complex::from_polar(amplitude / ((x - center) / width).cosh(), velocity * x),
                InitialData::PlaneModulated {
                    amplitude,
                    width,
                    wavenumber,
                } => {
                    let y = x / width;
                    Complex::new(amplitude * (-0.5 * y * y).exp() * (wavenumber * x).cos(), 0.0)
                }
            }
        };
        Ok(SpectralField::from_fn(grid, |x| {
            let z = f(x.as_f64());
            Complex::new(T::lit(z.re), T::lit(z.im))
        }))
    }
}

/// Rescales `f` to L2 norm `target`; the zero field is returned unchanged.
pub fn normalize<T: Real>(f: &SpectralField<T>, target: T) -> SpectralField<T> {
    let n = f.l2_norm();
    if n == T::zero() {
        return f.clone();
    }
    f.scaled(Complex::new(target / n, T::zero()))
}

/// Fraction of `|f|^2` carried by the outer `fraction` of the domain on
/// each side; a wrap-around audit for the periodic surrogate.
pub fn boundary_mass_fraction<T: Real>(f: &SpectralField<T>, fraction: f64) -> f64 {
    let phys = f.to_physical();
    let l = phys.grid().length().as_f64();
    let edge = 0.5 * l * (1.0 - 2.0 * fraction);
    let mut outer = 0.0;
    let mut total = 0.0;
    for (x, z) in phys.grid().points().iter().zip(phys.values()) {
        let m = z.norm_sqr().as_f64();
        total += m;
        if x.as_f64().abs() >= edge {
            outer += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}
