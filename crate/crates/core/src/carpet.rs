//! Quantum carpets: `ρ(x, t)` rasters over the space-time plane, with PGM and
//! CSV emitters.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::{evolve_coefficients, ModeTable, SpatialGrid};
use crate::spectral_basis::EigenBasis;
use crate::time::TimePoint;
use crate::wavepacket::CoefficientSet;

pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Raw `ρ`.
    None,
    /// Each time row scaled to a maximum of 1.
    PerFrame,
    /// Whole raster scaled to a maximum of 1.
    #[default]
    Global,
}

/// `ρ(xᵢ, tⱼ)` stored row-major, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct CarpetRaster {
    pub x_axis: SpatialGrid,
    pub t_axis: Vec<TimePoint>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

fn scale_to_unit(values: &mut [f64]) {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
}

/// Render `ρ` for every time in `t_axis`; rows are computed in parallel.
pub fn render_carpet(
    c: &CoefficientSet,
    basis: &EigenBasis,
    x_grid: &SpatialGrid,
    t_axis: &[TimePoint],
    normalization: Normalization,
) -> Result<CarpetRaster> {
    if t_axis.is_empty() {
        return Err(Error::Empty("carpet needs at least one time"));
    }
    c.check_basis(basis)?;
    let table = ModeTable::new(basis, x_grid)?;
    let rows = t_axis
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let ct = evolve_coefficients(c, basis, t)?;
            Ok(table.synthesize(ct.amplitudes())?.iter().map(|z| z.norm_sqr()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<f64> = rows.into_iter().flatten().collect();
    match normalization {
        Normalization::None => {}
        Normalization::PerFrame => values.chunks_mut(x_grid.n_points).for_each(scale_to_unit),
        Normalization::Global => scale_to_unit(&mut values),
    }
    Ok(CarpetRaster { x_axis: x_grid.clone(), t_axis: t_axis.to_vec(), values, normalization })
}

impl CarpetRaster {
    pub fn width(&self) -> usize {
        self.x_axis.n_points
    }

    pub fn height(&self) -> usize {
        self.t_axis.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.width()..(j + 1) * self.width()]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width() + i]
    }

    fn check_shape(&self) -> Result<()> {
        if self.width() == 0 || self.height() == 0 {
            return Err(Error::Empty("raster has no pixels"));
        }
        if self.values.len() != self.width() * self.height() {
            return Err(Error::param("values", "raster size does not match its axes"));
        }
        Ok(())
    }

    /// Binary 16-bit PGM; `x` runs left to right, the first time is the top row.
    pub fn to_pgm(&self, gamma: f64) -> Result<Vec<u8>> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        self.check_shape()?;
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let mut out = format!("P5 {} {} 65535\n", self.width(), self.height()).into_bytes();
        out.reserve(2 * self.values.len());
        for &v in &self.values {
            let level = if max > 0.0 {
                (65535.0 * (v.max(0.0) / max).powf(gamma)).round().min(65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
        Ok(out)
    }

    pub fn write_pgm(&self, gamma: f64, path: &Path) -> Result<()> {
        let bytes = self.to_pgm(gamma)?;
        let mut f = std::fs::File::create(path)?;
        f.write_all(&bytes)?;
        Ok(())
    }

    /// Header row of `t/t_R` values, then one row per `x` with `ρ` at every time.
    pub fn to_csv(&self) -> Result<String> {
        self.check_shape()?;
        let mut out = String::from("x");
        for t in &self.t_axis {
            let _ = write!(out, ",{:.16e}", t.fraction());
        }
        out.push('\n');
        for i in 0..self.width() {
            let _ = write!(out, "{:.16e}", self.x_axis.point(i));
            for j in 0..self.height() {
                let _ = write!(out, ",{:.16e}", self.get(i, j));
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    /// Parse the output of [`CarpetRaster::to_csv`]. Times come back as reals.
    pub fn from_csv(text: &str, normalization: Normalization) -> Result<Self> {
        let bad = |why: &str| Error::param("csv", why.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let t_axis = header
            .split(',')
            .skip(1)
            .map(|s| s.parse::<f64>().map(TimePoint::Real).map_err(|_| bad("bad time value")))
            .collect::<Result<Vec<_>>>()?;
        let mut xs = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for line in lines {
            let mut cells = line.split(',').map(|s| s.parse::<f64>().map_err(|_| bad("bad number")));
            xs.push(cells.next().ok_or_else(|| bad("empty row"))??);
            let row = cells.collect::<Result<Vec<_>>>()?;
            if row.len() != t_axis.len() {
                return Err(bad("ragged row"));
            }
            columns.push(row);
        }
        if xs.len() < 2 || t_axis.is_empty() {
            return Err(Error::Empty("csv raster has no pixels"));
        }
        let x_axis = SpatialGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let mut values = vec![0.0; xs.len() * t_axis.len()];
        for (i, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                values[j * xs.len() + i] = *v;
            }
        }
        Ok(CarpetRaster { x_axis, t_axis, values, normalization })
    }
}

/// Bhattacharyya overlap `Σ √(aᵢ bᵢ) / √(Σ aᵢ · Σ bᵢ)` of two densities on a
/// shared grid; 1 for identical shapes, 0 for disjoint supports.
pub fn density_overlap(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param("density", "densities live on different grids"));
    }
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    if !(sa > 0.0 && sb > 0.0) {
        return Err(Error::Empty("density has no weight"));
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x.max(0.0) * y.max(0.0)).sqrt()).sum();
    Ok(s / (sa * sb).sqrt())
}

/// Free-function form of [`CarpetRaster::write_pgm`].
pub fn write_pgm(raster: &CarpetRaster, gamma: f64, path: &Path) -> Result<()> {
    raster.write_pgm(gamma, path)
}

/// Free-function form of [`CarpetRaster::write_csv`].
pub fn write_csv(raster: &CarpetRaster, path: &Path) -> Result<()> {
    raster.write_csv(path)
}
