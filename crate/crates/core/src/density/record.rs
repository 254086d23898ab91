//! Converged solutions and their on-disk form.
//!
//! A record directory holds `metadata.json`, the snapshot arrays
//! `density.bin`, `field.bin` and `initial.bin`, and the ledgers
//! `mass.csv` and `contraction.csv`. Snapshot arrays are little-endian
//! `complex64` (two `f32` per value) behind a 32-byte header: the magic
//! [`SNAPSHOT_MAGIC`], the point count and the snapshot count as `u64`,
//! and eight reserved zero bytes.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::solver::WindowInfo;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{
    make_symbol_weights, Grid, GridSpec, Space, SpectralField, SymbolSpec, TimeGrid, Trajectory,
};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"NLNLSC64";
const HEADER_LEN: usize = 32;

/// Mass bookkeeping per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    pub times: Vec<f64>,
    /// `||u(t_m)||^2`
    pub mass: Vec<f64>,
    /// `Im int (a(D) rho) rho dx` at each node.
    pub pairing: Vec<f64>,
    /// `2 int_0^{t_m} pairing dt` (trapezoid).
    pub correction: Vec<f64>,
}

impl MassLedger {
    pub(crate) fn build<T: Real>(
        field: &Trajectory<T>,
        density: &Trajectory<T>,
        sym: &SymbolSpec,
    ) -> Result<Self> {
        let w = make_symbol_weights(sym, field.grid())?;
        let times = field.times().nodes();
        let mass: Vec<f64> = field
            .snapshots()
            .iter()
            .map(|s| s.l2_norm_sq().as_f64())
            .collect();
        let pairing = density
            .snapshots()
            .iter()
            .map(|r| spectral_pairing(r, &w.values).im)
            .collect::<Vec<_>>();
        let mut correction = vec![0.0; times.len()];
        for m in 1..times.len() {
            let h = times[m] - times[m - 1];
            correction[m] = correction[m - 1] + h * (pairing[m - 1] + pairing[m]);
        }
        Ok(Self {
            times,
            mass,
            pairing,
            correction,
        })
    }
}

/// `int (a(D) rho) rho dx` evaluated as `dx sum a(xi) |rho_hat(xi)|^2`.
pub(crate) fn spectral_pairing<T: Real>(rho: &SpectralField<T>, a: &[Complex<T>]) -> Complex<f64> {
    let f = rho.to_frequency();
    let dx = rho.grid().dx().as_f64();
    let mut acc = Complex::new(0.0, 0.0);
    for (z, w) in f.values().iter().zip(a) {
        let m = z.norm_sqr().as_f64();
        acc += Complex::new(w.re.as_f64() * m, w.im.as_f64() * m);
    }
    acc * dx
}

/// A converged density together with the recovered field.
#[derive(Clone, Debug)]
pub struct SolutionRecord<T: Real> {
    pub initial: SpectralField<T>,
    pub density: Trajectory<T>,
    pub field: Trajectory<T>,
    pub symbol: SymbolSpec,
    pub config: SolverConfig,
    pub windows: Vec<WindowInfo>,
    pub mass: MassLedger,
}

#[derive(Serialize, Deserialize)]
struct Metadata {
    grid: GridSpec,
    times: TimeGrid,
    symbol: SymbolSpec,
    config: SolverConfig,
    windows: Vec<WindowInfo>,
    mass: MassLedger,
}

#[derive(Serialize, Deserialize)]
struct MassRow {
    t: f64,
    mass: f64,
    pairing: f64,
    correction: f64,
}

#[derive(Serialize, Deserialize)]
struct ContractionRow {
    window: usize,
    iteration: usize,
    change: f64,
    ratio: Option<f64>,
}

impl<T: Real> SolutionRecord<T> {
    pub(crate) fn assemble(
        initial: SpectralField<T>,
        density: Trajectory<T>,
        field: Trajectory<T>,
        symbol: SymbolSpec,
        config: SolverConfig,
        windows: Vec<WindowInfo>,
    ) -> Result<Self> {
        density.check_matching(&field)?;
        let mass = MassLedger::build(&field, &density, &symbol)?;
        Ok(Self {
            initial,
            density,
            field,
            symbol,
            config,
            windows,
            mass,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.density.grid()
    }

    pub fn times(&self) -> &TimeGrid {
        self.density.times()
    }

    /// Contraction ratios of every window, in order.
    pub fn ratios(&self) -> Vec<f64> {
        self.windows.iter().flat_map(|w| w.ratios.iter().copied()).collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.windows.iter().map(|w| w.iterations).sum()
    }

    /// Window endpoints `t_0 < t_1 < ... < t_K`.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.windows.iter().map(|w| w.t_start).collect();
        if let Some(w) = self.windows.last() {
            b.push(w.t_end);
        }
        b
    }

    /// Every window met `||rho|| <= 4 ||phi_window||^2`.
    pub fn a_priori_ok(&self) -> bool {
        self.windows
            .iter()
            .all(|w| w.density_norm <= 4.0 * w.initial_mass + 1e-8)
    }

    /// Most negative density value (spectral ringing shows up here).
    pub fn min_density(&self) -> f64 {
        self.density
            .snapshots()
            .iter()
            .flat_map(|s| s.to_physical().into_values())
            .map(|z| z.re.as_f64())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_m max_x | |u(t_m, x)|^2 - rho(t_m, x) |`.
    pub fn modulus_mismatch(&self) -> f64 {
        let mut worst = 0.0f64;
        for (u, r) in self.field.snapshots().iter().zip(self.density.snapshots()) {
            let (u, r) = (u.to_physical(), r.to_physical());
            for (a, b) in u.values().iter().zip(r.values()) {
                worst = worst.max((a.norm_sqr() - b.re).abs().as_f64());
            }
        }
        worst
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let meta = Metadata {
            grid: self.grid().spec(),
            times: *self.times(),
            symbol: self.symbol.clone(),
            config: self.config.clone(),
            windows: self.windows.clone(),
            mass: self.mass.clone(),
        };
        let f = BufWriter::new(fs::File::create(dir.join("metadata.json"))?);
        serde_json::to_writer_pretty(f, &meta)?;
        write_snapshots(&dir.join("density.bin"), self.density.snapshots())?;
        write_snapshots(&dir.join("field.bin"), self.field.snapshots())?;
        write_snapshots(&dir.join("initial.bin"), std::slice::from_ref(&self.initial))?;

        let mut w = csv::Writer::from_path(dir.join("mass.csv"))?;
        for m in 0..self.mass.times.len() {
            w.serialize(MassRow {
                t: self.mass.times[m],
                mass: self.mass.mass[m],
                pairing: self.mass.pairing[m],
                correction: self.mass.correction[m],
            })?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("contraction.csv"))?;
        for (k, win) in self.windows.iter().enumerate() {
            // ratios start at the second iteration
            for (i, change) in win.changes.iter().enumerate() {
                w.serialize(ContractionRow {
                    window: k,
                    iteration: i + 1,
                    change: *change,
                    ratio: i.checked_sub(1).and_then(|j| win.ratios.get(j).copied()),
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read a record written by [`SolutionRecord::save`] (snapshots come
    /// back at `f32` precision).
    pub fn load(dir: &Path) -> Result<Self> {
        let f = BufReader::new(fs::File::open(dir.join("metadata.json"))?);
        let meta: Metadata = serde_json::from_reader(f)?;
        let grid = Grid::<T>::new(meta.grid)?;
        let read = |name: &str| read_snapshots::<T>(&dir.join(name), &grid);
        let density = Trajectory::new(grid.clone(), meta.times, read("density.bin")?)?;
        let field = Trajectory::new(grid.clone(), meta.times, read("field.bin")?)?;
        let initial = read("initial.bin")?
            .pop()
            .ok_or_else(|| Error::InvalidInput("initial.bin holds no snapshot".into()))?;
        Ok(Self {
            initial,
            density,
            field,
            symbol: meta.symbol,
            config: meta.config,
            windows: meta.windows,
            mass: meta.mass,
        })
    }
}

pub fn write_snapshots<T: Real>(path: &Path, snaps: &[SpectralField<T>]) -> Result<()> {
    let n = snaps.first().map_or(0, |s| s.grid().n());
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(snaps.len() as u64).to_le_bytes())?;
    out.write_all(&[0u8; 8])?;
    for s in snaps {
        for z in s.to_physical().values() {
            out.write_all(&(z.re.as_f64() as f32).to_le_bytes())?;
            out.write_all(&(z.im.as_f64() as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots<T: Real>(path: &Path, grid: &Grid<T>) -> Result<Vec<SpectralField<T>>> {
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(path)?).read_to_end(&mut bytes)?;
    let bad = |m: String| Error::InvalidInput(format!("{}: {m}", path.display()));
    if bytes.len() < HEADER_LEN || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes")) as usize;
    let (n, count) = (word(8), word(16));
    if n != grid.n() {
        return Err(bad(format!("{n} points, grid has {}", grid.n())));
    }
    if bytes.len() != HEADER_LEN + 8 * n * count {
        return Err(bad(format!("length {} does not match header", bytes.len())));
    }
    let f = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as f64;
    (0..count)
        .map(|c| {
            let base = HEADER_LEN + 8 * n * c;
            let vals = (0..n)
                .map(|j| Complex::new(T::lit(f(base + 8 * j)), T::lit(f(base + 8 * j + 4))))
                .collect();
            SpectralField::new(grid.clone(), vals, Space::Physical)
        })
        .collect()
}
