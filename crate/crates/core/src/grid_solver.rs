//! Grid-based time-dependent Schrödinger integrators, checked against the
//! exact quarterly revival targets.
//!
//! Two schemes: Crank–Nicolson (Cayley form, three-point Laplacian, Dirichlet
//! walls) and Strang split-step Fourier on a periodic grid. The split-step
//! drift can use the exact `k²` dispersion or the lattice dispersion
//! `2(1 − cos k·dx)/dx²` of the three-point Laplacian.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::{evolve_coefficients, sample_wavefunction, ModeTable, SpatialGrid, WaveField};
use crate::revival_metrics::{cat_target, matching_pairing, CatKind};
use crate::spectral_basis::{build_basis, potential_value, EigenBasis, Family, PotentialSpec};
use crate::time::{revival_time, TimePoint};
use crate::wavepacket::{parity_transform, CoefficientSet, PacketRecipe};

/// Potential samples are clipped at `V_CLIP_FACTOR · α²`.
pub const V_CLIP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    CrankNicolson,
    SplitStepFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Kinetic energy used by the split-step drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// `ω(k) = k²`
    Exact,
    /// `ω(k) = 2(1 − cos k·dx)/dx²`
    Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Absolute time step.
    pub dt: f64,
    pub grid: SpatialGrid,
    pub boundary: Boundary,
    pub dispersion: Dispersion,
    /// Revival time used to express field times as fractions of `t_R`.
    pub revival_time: f64,
}

impl SolverConfig {
    pub fn crank_nicolson(grid: SpatialGrid, dt: f64, revival_time: f64) -> Self {
        SolverConfig {
            scheme: Scheme::CrankNicolson,
            dt,
            grid,
            boundary: Boundary::Dirichlet,
            dispersion: Dispersion::Exact,
            revival_time,
        }
    }

    pub fn split_step(grid: SpatialGrid, dt: f64, dispersion: Dispersion, revival_time: f64) -> Self {
        SolverConfig {
            scheme: Scheme::SplitStepFourier,
            dt,
            grid,
            boundary: Boundary::Periodic,
            dispersion,
            revival_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !(self.revival_time.is_finite() && self.revival_time > 0.0) {
            return Err(Error::param("revival_time", "must be positive"));
        }
        match (self.scheme, self.boundary) {
            (Scheme::CrankNicolson, Boundary::Dirichlet) => {
                if self.grid.n_points < 3 {
                    return Err(Error::param("n_points", "Crank–Nicolson needs an interior point"));
                }
                Ok(())
            }
            (Scheme::SplitStepFourier, Boundary::Periodic) => Ok(()),
            (Scheme::CrankNicolson, _) => Err(Error::param("boundary", "crank_nicolson requires dirichlet")),
            (Scheme::SplitStepFourier, _) => Err(Error::param("boundary", "split_step_fourier requires periodic")),
        }
    }

    /// Number of steps covering `duration`, which must be a multiple of `dt`.
    pub fn steps_for(&self, duration: f64) -> Result<usize> {
        if duration < 0.0 || !duration.is_finite() {
            return Err(Error::param("t_final", "must be a non-negative finite time"));
        }
        let n = (duration / self.dt).round();
        if (n * self.dt - duration).abs() > 1e-9 * duration.max(self.dt) {
            return Err(Error::param("dt", format!("dt = {} does not divide t = {}", self.dt, duration)));
        }
        Ok(n as usize)
    }
}

/// `2(1 − cos(k·dx))/dx²`, the three-point Laplacian eigenvalue for wavenumber `k`.
pub fn lattice_dispersion(k: f64, dx: f64) -> f64 {
    2.0 * (1.0 - (k * dx).cos()) / (dx * dx)
}

/// Solve a tridiagonal system by elimination without pivoting.
///
/// `sub[i]` couples row `i+1` to column `i`, `sup[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        return Err(Error::param("tridiagonal", "inconsistent band lengths"));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let denom = if i == 0 { diag[0] } else { diag[i] - sub[i - 1] * c[i - 1] };
        if denom.norm() == 0.0 {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        y[i] = if i == 0 { rhs[0] / denom } else { (rhs[i] - sub[i - 1] * y[i - 1]) / denom };
    }
    for i in (0..n - 1).rev() {
        let next = y[i + 1];
        y[i] -= c[i] * next;
    }
    Ok(y)
}

/// Crank–Nicolson stepper with the left-hand matrix factored once.
struct CrankNicolson {
    // (1 − i dt/2 H) diagonal on interior points
    rhs_diag: Vec<Complex64>,
    // off-diagonal of (1 + i dt/2 H); the right-hand side uses its negative
    off: Complex64,
    c_prime: Vec<Complex64>,
    inv_denom: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(v: &[f64], dx: f64, dt: f64) -> Self {
        let interior = &v[1..v.len() - 1];
        let m = interior.len();
        let half = 0.5 * dt;
        let lhs_diag: Vec<Complex64> = interior
            .iter()
            .map(|&vi| Complex64::new(1.0, half * (2.0 / (dx * dx) + vi)))
            .collect();
        let off = Complex64::new(0.0, -half / (dx * dx));
        let mut c_prime = vec![Complex64::new(0.0, 0.0); m];
        let mut inv_denom = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let denom = if i == 0 { lhs_diag[0] } else { lhs_diag[i] - off * c_prime[i - 1] };
            inv_denom[i] = denom.inv();
            c_prime[i] = off * inv_denom[i];
        }
        CrankNicolson {
            rhs_diag: lhs_diag.iter().map(|z| z.conj()).collect(),
            off,
            c_prime,
            inv_denom,
            work: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    /// One step on the full field; endpoints stay zero.
    fn step(&mut self, psi: &mut [Complex64]) {
        let m = self.rhs_diag.len();
        let b = self.off;
        let y = &mut self.work;
        for i in 0..m {
            // psi index of interior point i is i + 1
            let rhs = self.rhs_diag[i] * psi[i + 1] - b * (psi[i] + psi[i + 2]);
            y[i] = if i == 0 { rhs * self.inv_denom[0] } else { (rhs - b * y[i - 1]) * self.inv_denom[i] };
        }
        for i in (0..m - 1).rev() {
            let next = y[i + 1];
            y[i] -= self.c_prime[i] * next;
        }
        psi[1..=m].copy_from_slice(y);
        psi[0] = Complex64::new(0.0, 0.0);
        psi[m + 1] = Complex64::new(0.0, 0.0);
    }
}

struct SplitStep {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    half_kick: Vec<Complex64>,
    drift: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    fn new(v: &[f64], dx: f64, dt: f64, dispersion: Dispersion) -> Self {
        let n = v.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let half_kick = v.iter().map(|&vi| Complex64::from_polar(1.0, -0.5 * dt * vi)).collect();
        let scale = 1.0 / n as f64;
        let drift = (0..n)
            .map(|j| {
                let k = fft_wavenumber(j, n, dx);
                let w = match dispersion {
                    Dispersion::Exact => k * k,
                    Dispersion::Lattice => lattice_dispersion(k, dx),
                };
                Complex64::from_polar(scale, -w * dt)
            })
            .collect();
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        SplitStep {
            forward,
            inverse,
            half_kick,
            drift,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn kick(&self, psi: &mut [Complex64], twice: bool) {
        for (p, k) in psi.iter_mut().zip(&self.half_kick) {
            *p *= if twice { k * k } else { *k };
        }
    }

    fn drift(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (p, d) in psi.iter_mut().zip(&self.drift) {
            *p *= d;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    /// `n` Strang steps with adjacent half-kicks merged.
    fn run(&mut self, psi: &mut [Complex64], n: usize) {
        if n == 0 {
            return;
        }
        self.kick(psi, false);
        for s in 0..n {
            self.drift(psi);
            self.kick(psi, s + 1 < n);
        }
    }
}

/// Angular wavenumber of FFT bin `j` on an `n`-point periodic grid.
fn fft_wavenumber(j: usize, n: usize, dx: f64) -> f64 {
    let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
    TAU * signed / (n as f64 * dx)
}

fn check_finite(psi: &[Complex64]) -> Result<()> {
    if psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("integrator produced non-finite values".into()))
    }
}

/// Advance `initial` by the absolute time `t_final`.
pub fn integrate(initial: &WaveField, v: &[f64], cfg: &SolverConfig, t_final: f64) -> Result<WaveField> {
    cfg.validate()?;
    if initial.values.len() != cfg.grid.n_points || v.len() != cfg.grid.n_points {
        return Err(Error::param("grid", "field, potential and config grids differ in size"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("potential", "samples must be finite"));
    }
    let steps = cfg.steps_for(t_final)?;
    let dx = cfg.grid.spacing();
    let mut psi = initial.values.clone();
    const CHUNK: usize = 4096;
    match cfg.scheme {
        Scheme::CrankNicolson => {
            let last = psi.len() - 1;
            psi[0] = Complex64::new(0.0, 0.0);
            psi[last] = Complex64::new(0.0, 0.0);
            let mut cn = CrankNicolson::new(v, dx, cfg.dt);
            for s in 0..steps {
                cn.step(&mut psi);
                if (s + 1) % CHUNK == 0 {
                    check_finite(&psi)?;
                }
            }
        }
        Scheme::SplitStepFourier => {
            let mut ss = SplitStep::new(v, dx, cfg.dt, cfg.dispersion);
            let mut left = steps;
            while left > 0 {
                let n = left.min(CHUNK);
                ss.run(&mut psi, n);
                check_finite(&psi)?;
                left -= n;
            }
        }
    }
    check_finite(&psi)?;
    Ok(WaveField {
        grid: cfg.grid.clone(),
        values: psi,
        time: TimePoint::Real(initial.time.fraction() + t_final / cfg.revival_time),
    })
}

/// Potential on `grid`, clipped at `V_CLIP_FACTOR·α²`; points on or beyond a
/// hard wall take the clip value.
pub fn potential_samples(spec: &PotentialSpec, grid: &SpatialGrid) -> Vec<f64> {
    let a = spec.effective_alpha();
    let v_max = V_CLIP_FACTOR * a * a;
    grid.points()
        .into_iter()
        .map(|x| potential_value(spec, x).map(|v| v.min(v_max)).unwrap_or(v_max))
        .collect()
}

/// `|⟨a|b⟩| / (‖a‖‖b‖)` on a shared grid.
pub fn grid_fidelity(a: &WaveField, b: &WaveField) -> f64 {
    let ab = a.inner(b).norm();
    let aa = a.inner(a).re;
    let bb = b.inner(b).re;
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    ab / (aa * bb).sqrt()
}

/// Coefficients of the exact state at a quarterly checkpoint, built from the
/// revival identities rather than from time evolution.
pub fn quarterly_target(c: &CoefficientSet, basis: &EigenBasis, checkpoint: TimePoint) -> Result<CoefficientSet> {
    let f = checkpoint.fraction();
    let frac = f - f.floor();
    let pairing = matching_pairing(basis.spec().family);
    let theta = basis.spec().theta();
    if frac == 0.0 {
        Ok(c.clone())
    } else if frac == 0.5 {
        Ok(parity_transform(c))
    } else if frac == 0.25 {
        Ok(cat_target(c, theta, CatKind::Quarter, pairing))
    } else if frac == 0.75 {
        Ok(cat_target(c, theta, CatKind::ThreeQuarter, pairing))
    } else {
        Err(Error::param("checkpoints", format!("{checkpoint} is not a quarter of t_R")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    /// Fraction of `t_R`.
    pub checkpoint: TimePoint,
    pub fidelity: f64,
    /// `‖ψ‖² − ‖ψ(0)‖²` on the grid.
    pub norm_drift: f64,
}

/// Integrate a packet through the quarterly checkpoints and score each
/// against its exact target.
pub fn revival_benchmark(
    spec: &PotentialSpec,
    recipe: &PacketRecipe,
    cfg: &SolverConfig,
    checkpoints: &[TimePoint],
) -> Result<Vec<BenchmarkRow>> {
    let basis = build_basis(spec)?;
    let c = recipe.build_for(&basis)?;
    let table = ModeTable::new(&basis, &cfg.grid)?;
    let v = potential_samples(spec, &cfg.grid);
    let t_r = revival_time(basis.alpha());
    let mut marks: Vec<TimePoint> = checkpoints.to_vec();
    marks.sort_by(|a, b| a.fraction().total_cmp(&b.fraction()));
    for m in &marks {
        let f = m.fraction();
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::param("checkpoints", "checkpoints must lie in [0, t_R]"));
        }
        quarterly_target(&c, &basis, *m)?;
    }

    let mut psi = table.field(&c, TimePoint::ZERO)?;
    let norm0 = psi.norm_sqr();
    let mut now = 0.0;
    let mut rows = Vec::with_capacity(marks.len());
    for mark in marks {
        let f = mark.fraction();
        if f > now {
            psi = integrate(&psi, &v, cfg, (f - now) * t_r)?;
            now = f;
        }
        let target = table.field(&quarterly_target(&c, &basis, mark)?, mark)?;
        rows.push(BenchmarkRow { checkpoint: mark, fidelity: grid_fidelity(&target, &psi), norm_drift: psi.norm_sqr() - norm0 });
    }
    Ok(rows)
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("checkpoint_over_tR,fidelity,norm_drift\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.16e},{:.16e}", r.checkpoint, r.fidelity, r.norm_drift);
    }
    out
}

/// Self-convergence of Crank–Nicolson in `dt` at fixed `dx`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub dts: [f64; 3],
    /// `‖ψ_dt − ψ_{dt/2}‖` and `‖ψ_{dt/2} − ψ_{dt/4}‖`.
    pub differences: [f64; 2],
    pub order: f64,
}

/// Run Crank–Nicolson with `dt`, `dt/2` and `dt/4` to `t_final` and measure
/// the observed order from successive differences.
pub fn crank_nicolson_order(
    spec: &PotentialSpec,
    recipe: &PacketRecipe,
    grid: &SpatialGrid,
    dt: f64,
    t_final: TimePoint,
) -> Result<ConvergenceStudy> {
    let basis = build_basis(spec)?;
    let c = recipe.build_for(&basis)?;
    let initial = sample_wavefunction(&c, &basis, grid)?;
    let v = potential_samples(spec, grid);
    let t_r = revival_time(basis.alpha());
    let dts = [dt, dt / 2.0, dt / 4.0];
    let runs = dts
        .par_iter()
        .map(|&h| integrate(&initial, &v, &SolverConfig::crank_nicolson(grid.clone(), h, t_r), t_final.fraction() * t_r))
        .collect::<Result<Vec<_>>>()?;
    let diff = |a: &WaveField, b: &WaveField| {
        let d = WaveField {
            grid: a.grid.clone(),
            values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
            time: a.time,
        };
        d.norm_sqr().sqrt()
    };
    let e1 = diff(&runs[0], &runs[1]);
    let e2 = diff(&runs[1], &runs[2]);
    Ok(ConvergenceStudy { dts, differences: [e1, e2], order: (e1 / e2).log2() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCountRow {
    /// Grid points (= Fourier modes) on the periodic embedding; `None` for the
    /// exact eigenbasis control.
    pub modes: Option<usize>,
    pub fidelity: f64,
    /// The packet's highest wavenumber lies beyond the grid's Nyquist limit.
    pub under_resolved: bool,
}

/// Half-width of a hard-walled domain.
fn wall_half_width(spec: &PotentialSpec) -> Result<f64> {
    match spec.family {
        Family::InfiniteSquareWell => Ok(0.5 * spec.isw_width),
        Family::PoschlTeller => Ok(FRAC_PI_2 / spec.alpha),
        Family::RosenMorse => Err(Error::param("family", "mode-count study needs hard walls (ISW or PT)")),
    }
}

/// Odd reflection of a wall-bounded state onto the periodic cell `[−w, 3w)`.
fn periodic_embedding(table_values: &[Complex64], n: usize) -> Vec<Complex64> {
    // table_values holds ψ at the n/2 + 1 points x_j = −w + j·(2w)/(n/2), j = 0..=n/2
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&table_values[..=half]);
    for j in half + 1..n {
        out.push(-table_values[n - j]);
    }
    out
}

/// Split-step revival fidelity at `t_R` as the number of Fourier modes grows.
///
/// The walled domain `[−w, w]` is embedded oddly into a periodic cell of
/// length `4w`, so the walls become nodes of the periodic problem.
pub fn mode_count_study(
    spec: &PotentialSpec,
    recipe: &PacketRecipe,
    mode_counts: &[usize],
    steps_per_revival: usize,
    dispersion: Dispersion,
) -> Result<Vec<ModeCountRow>> {
    if steps_per_revival == 0 {
        return Err(Error::param("steps_per_revival", "must be at least 1"));
    }
    let w = wall_half_width(spec)?;
    let basis = build_basis(spec)?;
    let c = recipe.build_for(&basis)?;
    let t_r = revival_time(basis.alpha());
    let c_final = evolve_coefficients(&c, &basis, TimePoint::FULL)?;
    let k_packet = if spec.family == Family::InfiniteSquareWell {
        basis.n_modes() as f64 * PI / spec.isw_width
    } else {
        (basis.energies()[basis.n_modes() - 1] + spec.strength().powi(2)).sqrt()
    };

    let mut rows = Vec::with_capacity(mode_counts.len() + 1);
    for &n in mode_counts {
        if n < 4 || n % 2 != 0 {
            return Err(Error::param("mode_counts", "mode counts must be even and at least 4"));
        }
        let half = n / 2;
        let wall_grid = SpatialGrid::new(-w, w, half + 1)?;
        let table = ModeTable::new(&basis, &wall_grid)?;
        let psi0 = periodic_embedding(&table.synthesize(c.amplitudes())?, n);
        let target = periodic_embedding(&table.synthesize(c_final.amplitudes())?, n);
        let dx = 2.0 * w / half as f64;
        let grid = SpatialGrid::new(-w, 3.0 * w - dx, n)?;
        let v_half = potential_samples(spec, &wall_grid);
        let v: Vec<f64> = (0..n).map(|j| if j <= half { v_half[j] } else { v_half[n - j] }).collect();
        let cfg = SolverConfig::split_step(grid.clone(), t_r / steps_per_revival as f64, dispersion, t_r);
        let initial = WaveField { grid: grid.clone(), values: psi0, time: TimePoint::ZERO };
        let out = integrate(&initial, &v, &cfg, t_r)?;
        let dot: Complex64 = target.iter().zip(&out.values).map(|(a, b)| a.conj() * b).sum();
        let na: f64 = target.iter().map(|z| z.norm_sqr()).sum();
        let nb: f64 = out.values.iter().map(|z| z.norm_sqr()).sum();
        let fidelity = if na == 0.0 || nb == 0.0 { 0.0 } else { dot.norm() / (na * nb).sqrt() };
        rows.push(ModeCountRow { modes: Some(n), fidelity, under_resolved: k_packet > PI / dx });
    }
    let control = c.inner(&c_final).norm() / c.norm_sqr();
    rows.push(ModeCountRow { modes: None, fidelity: control, under_resolved: false });
    Ok(rows)
}

pub fn mode_count_csv(rows: &[ModeCountRow]) -> String {
    let mut out = String::from("fourier_modes,fidelity_at_tR,under_resolved\n");
    for r in rows {
        let modes = r.modes.map(|m| m.to_string()).unwrap_or_else(|| "exact".into());
        let _ = writeln!(out, "{},{:.16e},{}", modes, r.fidelity, r.under_resolved);
    }
    out
}
