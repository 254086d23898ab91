//! The free Schrödinger flow `S(t) = F^{-1} e^{-i t xi^2} F`.

use crate::scalar::Real;
use crate::spectral::{apply_multiplier, SpectralField};

use super::dyson::phase_row;

/// `S(t) phi`, returned in the same space as `phi`.
pub fn free_propagate<T: Real>(phi: &SpectralField<T>, t: f64) -> SpectralField<T> {
    if t == 0.0 {
        return phi.clone();
    }
    let w = phase_row(phi.grid(), t);
    apply_multiplier(phi, &w).expect("phase row matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, GridSpec};
    use num_complex::Complex;

    #[test]
    fn plane_wave_picks_up_phase() {
        let g: Grid<f64> = Grid::new(GridSpec::new(64, 20.0).unwrap()).unwrap();
        let xi = g.frequencies()[3];
        let f = SpectralField::from_fn(&g, |x| Complex::from_polar(1.0, xi * x));
        let out = free_propagate(&f, 0.7);
        let expect = f.scaled(Complex::from_polar(1.0, -0.7 * xi * xi));
        assert!(out.distance(&expect).unwrap() < 1e-12);
        assert_eq!(free_propagate(&f, 0.0).values(), f.values());
    }

    #[test]
    fn group_law() {
        let g: Grid<f64> = Grid::new(GridSpec::default()).unwrap();
        let f = SpectralField::from_real_fn(&g, |x| (-x * x / 8.0).exp());
        let a = free_propagate(&free_propagate(&f, 0.3), 0.45);
        let b = free_propagate(&f, 0.75);
        assert!(a.distance(&b).unwrap() < 1e-12);
    }
}
