//! Exact time evolution in the eigenbasis and synthesis of ψ on grids.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral_basis::{EigenBasis, Family};
use crate::time::TimePoint;
use crate::wavepacket::CoefficientSet;

/// Pöschl–Teller grids stop this far (in `αx`) short of the walls.
pub const PT_WALL_CLEARANCE: f64 = 1e-9;

/// Uniform grid `x_min = x₀ < … < x_{n−1} = x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::param("n_points", "a grid needs at least 2 points"));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::param("x_range", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        Ok(SpatialGrid { x_min, x_max, n_points })
    }

    /// Grid over the basis domain; Pöschl–Teller endpoints are pulled inside the walls.
    pub fn covering(basis: &EigenBasis, n_points: usize) -> Result<Self> {
        let (a, b) = clamp_to_basis(basis, basis.domain().0, basis.domain().1);
        SpatialGrid::new(a, b, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// `xᵢ`, computed so that a grid symmetric about 0 has `x_{n−1−i} = −xᵢ` exactly.
    pub fn point(&self, i: usize) -> f64 {
        let m = (self.n_points - 1) as f64;
        let i = i as f64;
        (self.x_min * (m - i) + self.x_max * i) / m
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    pub fn check_within(&self, basis: &EigenBasis) -> Result<()> {
        for x in [self.x_min, self.x_max] {
            if !basis.contains(x) {
                let (x_min, x_max) = basis.domain();
                return Err(Error::OutsideDomain { x, x_min, x_max });
            }
        }
        Ok(())
    }
}

/// Pull `[a, b]` inside the basis domain (PT keeps `|αx| ≤ π/2 − 1e−9`).
pub fn clamp_to_basis(basis: &EigenBasis, a: f64, b: f64) -> (f64, f64) {
    let (lo, hi) = basis.domain();
    match basis.spec().family {
        Family::PoschlTeller => {
            let alpha = basis.alpha();
            let edge = (std::f64::consts::FRAC_PI_2 - PT_WALL_CLEARANCE) / alpha;
            (a.max(-edge), b.min(edge))
        }
        Family::InfiniteSquareWell => (a.max(lo), b.min(hi)),
        Family::RosenMorse => (a, b),
    }
}

/// ψ sampled on a grid at one time.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub time: TimePoint,
}

impl WaveField {
    pub fn density(&self) -> Vec<f64> {
        probability_density(self)
    }

    /// `∫|ψ|²` by the trapezoidal rule.
    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.density(), self.grid.spacing())
    }

    /// `⟨self|other⟩` by the trapezoidal rule on the shared grid.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        let h = self.grid.spacing();
        let n = self.values.len();
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| {
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                a.conj() * b * w
            })
            .sum()
    }

    /// CSV with columns `x,re,im,rho`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im,rho\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.point(i),
                v.re,
                v.im,
                v.norm_sqr()
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// `cₙ(t) = cₙ e^{−iEₙt}` with `t` a fraction of `t_R`.
pub fn evolve_coefficients(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint) -> Result<CoefficientSet> {
    c.check_basis(basis)?;
    let amps = c
        .amplitudes()
        .iter()
        .zip(basis.reduced_energies())
        .map(|(&a, &eps)| a * Complex64::from_polar(1.0, -t.phase(eps)))
        .collect();
    Ok(c.with_amplitudes(amps))
}

/// Eigenfunction samples `φₙ(xᵢ)` for a fixed grid, reused across times.
#[derive(Debug, Clone)]
pub struct ModeTable {
    grid: SpatialGrid,
    n_modes: usize,
    // point-major: values[i * n_modes + n]
    values: Vec<f64>,
}

impl ModeTable {
    pub fn new(basis: &EigenBasis, grid: &SpatialGrid) -> Result<Self> {
        grid.check_within(basis)?;
        let n_modes = basis.n_modes();
        let values = (0..grid.n_points)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.point(i);
                (0..n_modes).map(move |n| basis.eval_unchecked(n, x))
            })
            .collect();
        Ok(ModeTable { grid: grid.clone(), n_modes, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// `ψ(xᵢ) = Σₙ cₙ φₙ(xᵢ)`.
    pub fn synthesize(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.n_modes {
            return Err(Error::BasisMismatch { expected: self.n_modes, got: amplitudes.len() });
        }
        Ok(self
            .values
            .par_chunks(self.n_modes)
            .map(|row| row.iter().zip(amplitudes).map(|(&p, &c)| c * p).sum())
            .collect())
    }

    pub fn field(&self, c: &CoefficientSet, time: TimePoint) -> Result<WaveField> {
        Ok(WaveField { grid: self.grid.clone(), values: self.synthesize(c.amplitudes())?, time })
    }
}

/// ψ on `grid` for a state given by its (already evolved) coefficients.
pub fn sample_wavefunction(c: &CoefficientSet, basis: &EigenBasis, grid: &SpatialGrid) -> Result<WaveField> {
    c.check_basis(basis)?;
    ModeTable::new(basis, grid)?.field(c, TimePoint::ZERO)
}

/// ψ(x, t) on `grid`.
pub fn wavefunction_at(c: &CoefficientSet, basis: &EigenBasis, grid: &SpatialGrid, t: TimePoint) -> Result<WaveField> {
    let ct = evolve_coefficients(c, basis, t)?;
    let mut f = sample_wavefunction(&ct, basis, grid)?;
    f.time = t;
    Ok(f)
}

/// `ρᵢ = |ψ(xᵢ)|²`.
pub fn probability_density(f: &WaveField) -> Vec<f64> {
    f.values.iter().map(|v| v.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_basis::{build_basis, PotentialSpec};
    use crate::wavepacket::{gaussian_coefficients, parity_transform, PhaseScheme};
    use std::f64::consts::PI;

    fn pt() -> (EigenBasis, CoefficientSet) {
        let b = build_basis(&PotentialSpec::poschl_teller(PI, 2, 30)).unwrap();
        let c = gaussian_coefficients(30, 15.0, 3.0, PhaseScheme::Equal, 0).unwrap();
        (b, c)
    }

    #[test]
    fn evolution_at_revival_points() {
        let (b, c) = pt();
        assert_eq!(evolve_coefficients(&c, &b, TimePoint::ZERO).unwrap(), c);
        let full = evolve_coefficients(&c, &b, TimePoint::FULL).unwrap();
        for (x, y) in full.amplitudes().iter().zip(c.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
        let half = evolve_coefficients(&c, &b, TimePoint::HALF).unwrap();
        for (n, (x, y)) in half.amplitudes().iter().zip(c.amplitudes()).enumerate() {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x - y * s).norm() < 1e-15);
        }
    }

    #[test]
    fn evolution_rejects_wrong_length() {
        let (b, _) = pt();
        let c = CoefficientSet::single_mode(5, 0);
        assert!(matches!(evolve_coefficients(&c, &b, TimePoint::HALF), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn symmetric_grid_points_mirror_exactly() {
        let g = SpatialGrid::new(-0.49999, 0.49999, 2000).unwrap();
        for i in 0..g.n_points {
            assert_eq!(g.point(i), -g.point(g.n_points - 1 - i));
        }
        assert_eq!(g.point(0), g.x_min);
        assert_eq!(g.point(1999), g.x_max);
    }

    #[test]
    fn single_mode_samples_eigenfunction() {
        let (b, _) = pt();
        let g = SpatialGrid::covering(&b, 101).unwrap();
        let f = sample_wavefunction(&CoefficientSet::single_mode(30, 0), &b, &g).unwrap();
        for (i, v) in f.values.iter().enumerate() {
            assert_eq!(v.re, b.eval(0, g.point(i)).unwrap());
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn parity_transform_mirrors_samples() {
        let (b, c) = pt();
        let g = SpatialGrid::covering(&b, 401).unwrap();
        let f = sample_wavefunction(&c, &b, &g).unwrap();
        let p = sample_wavefunction(&parity_transform(&c), &b, &g).unwrap();
        for i in 0..g.n_points {
            assert!((p.values[i] - f.values[g.n_points - 1 - i]).norm() < 1e-12);
        }
    }

    #[test]
    fn packet_is_normalized_one_sided_lump() {
        let (b, c) = pt();
        let g = SpatialGrid::covering(&b, 2000).unwrap();
        let f = sample_wavefunction(&c, &b, &g).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-6);
        let rho = f.density();
        let right: f64 = rho[1000..].iter().sum();
        let left: f64 = rho[..1000].iter().sum();
        assert!(right > 20.0 * left, "packet should sit on one side: {left} vs {right}");
    }

    #[test]
    fn zero_field_has_zero_density() {
        let g = SpatialGrid::new(0.0, 1.0, 5).unwrap();
        let f = WaveField { grid: g, values: vec![Complex64::new(0.0, 0.0); 5], time: TimePoint::ZERO };
        assert!(probability_density(&f).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn grid_outside_domain_is_rejected() {
        let (b, c) = pt();
        let g = SpatialGrid::new(-0.6, 0.4, 10).unwrap();
        assert!(matches!(sample_wavefunction(&c, &b, &g), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (b, c) = pt();
        let g = SpatialGrid::covering(&b, 11).unwrap();
        let s = sample_wavefunction(&c, &b, &g).unwrap().to_csv();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,re,im,rho");
        assert_eq!(lines.len(), 12);
        let x0: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(x0, g.x_min);
    }
}
