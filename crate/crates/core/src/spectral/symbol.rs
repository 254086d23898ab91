//! Multiplier symbols `a(xi)` and their subcriticality index.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    /// `a(xi) = c`; `c = -1` is the focusing cubic equation.
    Constant { re: f64, im: f64 },
    /// `a(xi) = sign (|xi| + xi) / <xi>^delta`
    CmDnlsRegularized { sign: f64 },
    /// `a(xi) = sign <xi>^{1 - delta}`
    FractionalBracket { sign: f64 },
    /// Complex values on the grid frequencies, FFT slot order.
    Tabulated { values: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub kind: SymbolKind,
    pub delta: f64,
}

impl SymbolSpec {
    pub fn new(kind: SymbolKind, delta: f64) -> Result<Self> {
        let s = Self { kind, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(c: f64, delta: f64) -> Result<Self> {
        Self::new(SymbolKind::Constant { re: c, im: 0.0 }, delta)
    }

    pub fn zero(delta: f64) -> Result<Self> {
        Self::constant(0.0, delta)
    }

    pub fn fractional_bracket(sign: f64, delta: f64) -> Result<Self> {
        Self::new(SymbolKind::FractionalBracket { sign }, delta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::contract(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        match &self.kind {
            SymbolKind::CmDnlsRegularized { sign } | SymbolKind::FractionalBracket { sign }
                if !sign.is_finite() =>
            {
                Err(Error::contract("symbol sign must be finite"))
            }
            SymbolKind::Constant { re, im } if !(re.is_finite() && im.is_finite()) => {
                Err(Error::contract("constant symbol must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn theta_delta(&self) -> f64 {
        (self.delta / 2.0).min(0.25)
    }

    pub fn p_delta(&self) -> f64 {
        2.0 / (1.0 + self.delta)
    }

    /// Value at a single frequency; `Tabulated` needs the slot index.
    fn eval(&self, xi: f64, slot: usize) -> Complex<f64> {
        let bracket = (1.0 + xi * xi).sqrt();
        match &self.kind {
            SymbolKind::Constant { re, im } => Complex::new(*re, *im),
            SymbolKind::CmDnlsRegularized { sign } => {
                Complex::new(sign * (xi.abs() + xi) / bracket.powf(self.delta), 0.0)
            }
            SymbolKind::FractionalBracket { sign } => {
                Complex::new(sign * bracket.powf(1.0 - self.delta), 0.0)
            }
            SymbolKind::Tabulated { values } => Complex::new(values[slot].0, values[slot].1),
        }
    }
}

/// Symbol values on a grid together with `sup |a| / <xi>^{1-delta}`.
#[derive(Clone, Debug)]
pub struct SymbolWeights<T: Real> {
    pub values: Vec<Complex<T>>,
    pub bound: f64,
    pub real_valued: bool,
    pub delta: f64,
}

impl<T: Real> SymbolWeights<T> {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }
}

pub fn make_symbol_weights<T: Real>(sym: &SymbolSpec, grid: &Grid<T>) -> Result<SymbolWeights<T>> {
    sym.validate()?;
    if let SymbolKind::Tabulated { values } = &sym.kind {
        if values.len() != grid.n() {
            return Err(Error::contract(format!(
                "tabulated symbol has {} values, grid has {}",
                values.len(),
                grid.n()
            )));
        }
    }
    let mut bound = 0.0f64;
    let mut real_valued = true;
    let values = grid
        .frequencies()
        .iter()
        .enumerate()
        .map(|(k, xi)| {
            let xi = xi.as_f64();
            let a = sym.eval(xi, k);
            if a.im != 0.0 {
                real_valued = false;
            }
            bound = bound.max(a.norm() / (1.0 + xi * xi).powf((1.0 - sym.delta) / 2.0));
            Complex::new(T::lit(a.re), T::lit(a.im))
        })
        .collect();
    if !bound.is_finite() {
        return Err(Error::InvalidInput("symbol bound is not finite".into()));
    }
    Ok(SymbolWeights {
        values,
        bound,
        real_valued,
        delta: sym.delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;

    fn grid() -> Grid<f64> {
        Grid::new(GridSpec::default()).unwrap()
    }

    #[test]
    fn constant_one() {
        let w = make_symbol_weights(&SymbolSpec::constant(1.0, 0.5).unwrap(), &grid()).unwrap();
        assert!(w.values.iter().all(|z| *z == Complex::new(1.0, 0.0)));
        assert_eq!(w.bound, 1.0);
        assert!(w.real_valued);
    }

    #[test]
    fn fractional_bracket_half() {
        let g = grid();
        let w = make_symbol_weights(&SymbolSpec::fractional_bracket(1.0, 0.5).unwrap(), &g).unwrap();
        assert_eq!(w.values[0], Complex::new(1.0, 0.0));
        assert!((w.bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derived_indices() {
        let s = SymbolSpec::constant(1.0, 0.3).unwrap();
        assert!((s.theta_delta() - 0.15).abs() < 1e-15);
        assert!((s.p_delta() - 2.0 / 1.3).abs() < 1e-15);
        assert_eq!(SymbolSpec::constant(1.0, 0.9).unwrap().theta_delta(), 0.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymbolSpec::constant(1.0, 1.0).is_err());
        assert!(SymbolSpec::constant(1.0, 0.0).is_err());
        let bad = SymbolSpec::new(SymbolKind::Tabulated { values: vec![(1.0, 0.0); 3] }, 0.5).unwrap();
        assert!(make_symbol_weights(&bad, &grid()).is_err());
    }

    #[test]
    fn cm_dnls_vanishes_on_negative_frequencies() {
        let g = grid();
        let s = SymbolSpec::new(SymbolKind::CmDnlsRegularized { sign: 1.0 }, 0.25).unwrap();
        let w = make_symbol_weights(&s, &g).unwrap();
        for (xi, a) in g.frequencies().iter().zip(&w.values) {
            if *xi <= 0.0 {
                assert_eq!(a.re, 0.0);
            } else {
                assert!(a.re > 0.0);
            }
        }
        assert!(w.bound <= 2.0 + 1e-12);
    }
}
