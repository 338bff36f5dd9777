//! Closed-form spectra and normalized eigenfunctions for the infinite square
//! well, the trigonometric Pöschl–Teller well and the Rosen–Morse (sech²) well.
//!
//! Units are `ħ = 1` with the stationary equation `−φ'' + Vφ = Eφ`. Every
//! spectrum is shifted so that `E₀ = 0`, and energies are written as
//! `Eₙ = α²·εₙ` where the reduced energy `εₙ` is an integer whenever `A/α` is.

use std::f64::consts::{FRAC_PI_2, LN_10, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

/// Minimum half-width of the truncated Rosen–Morse domain, in units of `1/α`.
pub const RM_MIN_CUTOFF: f64 = 25.0;
/// Relative size of the slowest-decaying bound state at the truncation point.
pub const RM_TAIL_TOLERANCE: f64 = 1e-16;
/// Stop refining the normalization quadrature once every norm changes by less than this.
pub const NORM_TOLERANCE: f64 = 1e-13;

const GL_ORDER: usize = 20;
const MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    #[serde(rename = "ISW")]
    InfiniteSquareWell,
    #[serde(rename = "PT")]
    PoschlTeller,
    #[serde(rename = "RM")]
    RosenMorse,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::InfiniteSquareWell => "ISW",
            Family::PoschlTeller => "PT",
            Family::RosenMorse => "RM",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ISW" => Ok(Family::InfiniteSquareWell),
            "PT" => Ok(Family::PoschlTeller),
            "RM" => Ok(Family::RosenMorse),
            other => Err(Error::config(
                "potential.family",
                format!("unknown family `{other}` (expected ISW, PT or RM)"),
            )),
        }
    }
}

/// A potential together with the number of retained bound states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub family: Family,
    /// Inverse length scale α. Ignored for the square well, which uses `π/L`.
    pub alpha: f64,
    /// `M = A/α` (integer part for detuned Rosen–Morse).
    pub m_param: u32,
    /// Detuning `r` in `A/α = M + r`; Rosen–Morse only.
    pub detune_r: f64,
    /// Well width `L`; square well only.
    pub isw_width: f64,
    pub n_modes: usize,
}

impl PotentialSpec {
    pub fn infinite_square_well(width: f64, n_modes: usize) -> Self {
        PotentialSpec {
            family: Family::InfiniteSquareWell,
            alpha: PI / width,
            m_param: 1,
            detune_r: 0.0,
            isw_width: width,
            n_modes,
        }
    }

    pub fn poschl_teller(alpha: f64, m: u32, n_modes: usize) -> Self {
        PotentialSpec {
            family: Family::PoschlTeller,
            alpha,
            m_param: m,
            detune_r: 0.0,
            isw_width: 1.0,
            n_modes,
        }
    }

    pub fn rosen_morse(alpha: f64, m: u32, detune_r: f64, n_modes: usize) -> Self {
        PotentialSpec {
            family: Family::RosenMorse,
            alpha,
            m_param: m,
            detune_r,
            isw_width: 1.0,
            n_modes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::param("n_modes", "must be at least 1"));
        }
        match self.family {
            Family::InfiniteSquareWell => {
                if !(self.isw_width.is_finite() && self.isw_width > 0.0) {
                    return Err(Error::param("isw_width", "must be a positive finite number"));
                }
            }
            Family::PoschlTeller | Family::RosenMorse => {
                if !(self.alpha.is_finite() && self.alpha > 0.0) {
                    return Err(Error::param("alpha", "must be a positive finite number"));
                }
                if self.m_param == 0 {
                    return Err(Error::param("m_param", "must be a positive integer"));
                }
            }
        }
        if self.family == Family::RosenMorse {
            if !(0.0..=0.5).contains(&self.detune_r) {
                return Err(Error::param("detune_r", "must lie in [0, 0.5]"));
            }
            let available = self.m_param as usize;
            if self.n_modes > available {
                return Err(Error::TooManyModes { requested: self.n_modes, available });
            }
        } else if self.detune_r != 0.0 {
            return Err(Error::param("detune_r", "detuning applies to the Rosen–Morse family only"));
        }
        Ok(())
    }

    /// The α that sets `t_R = 2π/α²`.
    pub fn effective_alpha(&self) -> f64 {
        match self.family {
            Family::InfiniteSquareWell => PI / self.isw_width,
            _ => self.alpha,
        }
    }

    /// `λ = A/α = M + r`.
    pub fn lambda(&self) -> f64 {
        self.m_param as f64 + self.detune_r
    }

    /// `A = λα`.
    pub fn strength(&self) -> f64 {
        self.lambda() * self.effective_alpha()
    }

    /// Number of retained bound states allowed by the potential, if finite.
    pub fn bound_state_count(&self) -> Option<usize> {
        match self.family {
            Family::RosenMorse => Some(self.m_param as usize),
            _ => None,
        }
    }

    /// `Eₙ/α²`.
    pub fn reduced_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.family {
            Family::InfiniteSquareWell => n * n + 2.0 * n,
            Family::PoschlTeller => n * n + 2.0 * self.lambda() * n,
            Family::RosenMorse => 2.0 * self.lambda() * n - n * n,
        }
    }

    /// Parity sign θ = (−1)^M appearing in the quarter-revival identities.
    pub fn theta(&self) -> f64 {
        match self.family {
            Family::InfiniteSquareWell => -1.0,
            _ if self.m_param % 2 == 0 => 1.0,
            _ => -1.0,
        }
    }

    /// Domain used for evaluation and grids.
    pub fn domain(&self) -> (f64, f64) {
        match self.family {
            Family::InfiniteSquareWell => (-0.5 * self.isw_width, 0.5 * self.isw_width),
            Family::PoschlTeller => (-FRAC_PI_2 / self.alpha, FRAC_PI_2 / self.alpha),
            Family::RosenMorse => {
                let c = self.rm_cutoff();
                (-c, c)
            }
        }
    }

    /// Half-width where `sech^p(α x) < RM_TAIL_TOLERANCE` for the slowest
    /// decaying retained state, never less than `RM_MIN_CUTOFF / α`.
    fn rm_cutoff(&self) -> f64 {
        let p = (self.lambda() - (self.n_modes as f64 - 1.0)).max(1e-3);
        // sech y ≤ 2 e^{−y}
        let y = LN_2 - RM_TAIL_TOLERANCE.log10() * LN_10 / p;
        y.max(RM_MIN_CUTOFF) / self.alpha
    }
}

/// Energy of level `n`, closed form.
pub fn energy(spec: &PotentialSpec, n: usize) -> Result<f64> {
    if let Some(count) = spec.bound_state_count() {
        if n >= count {
            return Err(Error::TooManyModes { requested: n + 1, available: count });
        }
    }
    if n >= spec.n_modes {
        return Err(Error::IndexOutOfRange { index: n, n_modes: spec.n_modes });
    }
    let a = spec.effective_alpha();
    Ok(a * a * spec.reduced_energy(n))
}

/// Potential energy at `x`, shifted so the ground state sits at zero.
///
/// The square well returns `−(π/L)²` inside and an `OutsideDomain` error at or
/// beyond the walls; Pöschl–Teller rejects `|αx| ≥ π/2`.
pub fn potential_value(spec: &PotentialSpec, x: f64) -> Result<f64> {
    let outside = || {
        let (x_min, x_max) = spec.domain();
        Error::OutsideDomain { x, x_min, x_max }
    };
    if !x.is_finite() {
        return Err(outside());
    }
    let alpha = spec.effective_alpha();
    let a = spec.strength();
    match spec.family {
        Family::InfiniteSquareWell => {
            if x.abs() >= 0.5 * spec.isw_width {
                Err(outside())
            } else {
                Ok(-alpha * alpha)
            }
        }
        Family::PoschlTeller => {
            if (alpha * x).abs() >= FRAC_PI_2 {
                return Err(outside());
            }
            let c = (alpha * x).cos();
            Ok(-a * a + a * (a - alpha) / (c * c))
        }
        Family::RosenMorse => {
            let s = 1.0 / (alpha * x).cosh();
            Ok(a * a - a * (a + alpha) * s * s)
        }
    }
}

/// Gegenbauer polynomial `Cₙ^(λ)(u)` by the three-term recurrence.
pub fn gegenbauer(n: usize, lambda: f64, u: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * u;
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * (k + lambda - 1.0) * u * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln cosh y` without overflow.
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Unnormalized eigenfunction; `x` must already be inside the domain.
fn raw_eigenfunction(spec: &PotentialSpec, n: usize, x: f64) -> f64 {
    let alpha = spec.effective_alpha();
    match spec.family {
        Family::InfiniteSquareWell => {
            let k = (n + 1) as f64 * PI / spec.isw_width;
            if n % 2 == 0 {
                (k * x).cos()
            } else {
                (k * x).sin()
            }
        }
        Family::PoschlTeller => {
            let y = alpha * x;
            let m = spec.m_param as i32;
            let envelope = y.cos().max(0.0).powi(m);
            let poly = gegenbauer(n, spec.lambda(), y.sin());
            envelope * poly
        }
        Family::RosenMorse => {
            let y = alpha * x;
            let p = spec.lambda() - n as f64;
            let envelope = (-p * ln_cosh(y)).exp();
            let poly = gegenbauer(n, p + 0.5, y.tanh());
            envelope * poly
        }
    }
}

/// Energies and normalized eigenfunctions for a [`PotentialSpec`].
#[derive(Debug, Clone)]
pub struct EigenBasis {
    spec: PotentialSpec,
    energies: Vec<f64>,
    reduced: Vec<f64>,
    norm_constants: Vec<f64>,
    domain: (f64, f64),
    rule: CompositeRule,
}

/// Build the basis, normalizing each state by panel-refined quadrature.
pub fn build_basis(spec: &PotentialSpec) -> Result<EigenBasis> {
    spec.validate()?;
    let n = spec.n_modes;
    let energies = (0..n).map(|k| energy(spec, k)).collect::<Result<Vec<_>>>()?;
    let reduced = (0..n).map(|k| spec.reduced_energy(k)).collect();
    let domain = spec.domain();

    let norms_for = |rule: &CompositeRule| -> Vec<f64> {
        (0..n)
            .map(|k| rule.integrate(|x| raw_eigenfunction(spec, k, x).powi(2)))
            .collect()
    };

    let mut panels = 8;
    let mut rule = CompositeRule::new(domain.0, domain.1, panels, GL_ORDER);
    let mut norms = norms_for(&rule);
    loop {
        panels *= 2;
        if panels > MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "norms of {} {} states still changing at {} panels",
                n, spec.family, MAX_PANELS
            )));
        }
        let finer = CompositeRule::new(domain.0, domain.1, panels, GL_ORDER);
        let finer_norms = norms_for(&finer);
        let converged = norms
            .iter()
            .zip(&finer_norms)
            .all(|(a, b)| (a - b).abs() <= NORM_TOLERANCE * b.abs());
        rule = finer;
        norms = finer_norms;
        if converged {
            break;
        }
    }
    if let Some(bad) = norms.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Quadrature(format!("state {bad} has non-positive norm")));
    }
    let norm_constants = norms.iter().map(|v| 1.0 / v.sqrt()).collect();

    Ok(EigenBasis { spec: spec.clone(), energies, reduced, norm_constants, domain, rule })
}

impl EigenBasis {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `Eₙ/α²`, integral for integer `A/α`.
    pub fn reduced_energies(&self) -> &[f64] {
        &self.reduced
    }

    pub fn norm_constants(&self) -> &[f64] {
        &self.norm_constants
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn alpha(&self) -> f64 {
        self.spec.effective_alpha()
    }

    /// The quadrature the normalization converged on.
    pub fn reference_rule(&self) -> &CompositeRule {
        &self.rule
    }

    /// True when `x` may be passed to [`EigenBasis::eval`].
    pub fn contains(&self, x: f64) -> bool {
        match self.spec.family {
            Family::RosenMorse => x.is_finite(),
            _ => x >= self.domain.0 && x <= self.domain.1,
        }
    }

    /// Normalized `φₙ(x)`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        if n >= self.n_modes() {
            return Err(Error::IndexOutOfRange { index: n, n_modes: self.n_modes() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain { x, x_min: self.domain.0, x_max: self.domain.1 });
        }
        Ok(self.eval_unchecked(n, x))
    }

    /// Relative residual of `−φₙ'' + Vφₙ = Eₙφₙ` from a five-point second
    /// difference at `samples` interior points (the outer 5% of a walled
    /// domain is skipped).
    ///
    /// Returns `max |−φ'' + Vφ − Eφ| / max (|φ''| + |Vφ| + |Eφ|)`; the sum in
    /// the denominator keeps the ratio meaningful for the `E₀ = 0` ground state.
    pub fn eigen_residual(&self, n: usize, samples: usize) -> Result<f64> {
        if n >= self.n_modes() {
            return Err(Error::IndexOutOfRange { index: n, n_modes: self.n_modes() });
        }
        if samples < 2 {
            return Err(Error::param("samples", "need at least two points"));
        }
        let (lo, hi) = self.domain;
        let margin = match self.spec.family {
            Family::RosenMorse => 0.0,
            _ => 0.05 * (hi - lo),
        };
        let (a, b) = (lo + margin, hi - margin);
        let h = 1e-4 / self.alpha();
        let e = self.energies[n];
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for j in 0..samples {
            let x = (a * (samples - 1 - j) as f64 + b * j as f64) / (samples - 1) as f64;
            let f = |d: f64| self.eval_unchecked(n, x + d * h);
            let d2 = (-f(-2.0) + 16.0 * f(-1.0) - 30.0 * f(0.0) + 16.0 * f(1.0) - f(2.0)) / (12.0 * h * h);
            let phi = f(0.0);
            let v = potential_value(&self.spec, x)?;
            num = num.max((-d2 + v * phi - e * phi).abs());
            den = den.max(d2.abs() + (v * phi).abs() + (e * phi).abs());
        }
        Ok(if den == 0.0 { 0.0 } else { num / den })
    }

    pub(crate) fn eval_unchecked(&self, n: usize, x: f64) -> f64 {
        self.norm_constants[n] * raw_eigenfunction(&self.spec, n, x)
    }

    /// `max |⟨φₘ|φₙ⟩ − δₘₙ|` under the reference quadrature.
    pub fn orthonormality_deficit(&self) -> f64 {
        let n = self.n_modes();
        let table: Vec<Vec<f64>> = (0..n)
            .map(|k| self.rule.nodes.iter().map(|&x| self.eval_unchecked(k, x)).collect())
            .collect();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let s: f64 = table[a]
                    .iter()
                    .zip(&table[b])
                    .zip(&self.rule.weights)
                    .map(|((u, v), w)| u * v * w)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// Free-function form of [`EigenBasis::eval`].
pub fn eval_eigenfunction(basis: &EigenBasis, n: usize, x: f64) -> Result<f64> {
    basis.eval(n, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig1() -> PotentialSpec {
        PotentialSpec::poschl_teller(PI, 2, 30)
    }

    fn fig2() -> PotentialSpec {
        PotentialSpec::rosen_morse(1.0, 20, 0.0, 20)
    }

    #[test]
    fn energies_closed_form() {
        assert_eq!(energy(&fig1(), 0).unwrap(), 0.0);
        assert_relative_eq!(energy(&fig1(), 1).unwrap(), 5.0 * PI * PI, max_relative = 1e-15);
        assert_eq!(energy(&fig2(), 1).unwrap(), 39.0);
        assert_eq!(energy(&fig2(), 19).unwrap(), 399.0);
        let isw = PotentialSpec::infinite_square_well(2.0, 5);
        assert_eq!(energy(&isw, 0).unwrap(), 0.0);
        assert_relative_eq!(energy(&isw, 2).unwrap(), (PI / 2.0).powi(2) * 8.0, max_relative = 1e-15);
    }

    #[test]
    fn energy_index_errors() {
        assert!(matches!(energy(&fig1(), 30), Err(Error::IndexOutOfRange { .. })));
        let mut rm = fig2();
        rm.n_modes = 25;
        assert!(matches!(energy(&rm, 20), Err(Error::TooManyModes { .. })));
    }

    #[test]
    fn potential_values() {
        assert_relative_eq!(potential_value(&fig1(), 0.0).unwrap(), -2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(potential_value(&fig2(), 0.0).unwrap(), -20.0, max_relative = 1e-14);
        assert_relative_eq!(potential_value(&fig2(), 60.0).unwrap(), 400.0, max_relative = 1e-14);
        assert!(potential_value(&fig1(), 0.5).is_err());
        let isw = PotentialSpec::infinite_square_well(1.0, 4);
        assert_eq!(potential_value(&isw, 0.3).unwrap(), -PI * PI);
        assert!(potential_value(&isw, 0.5).is_err());
    }

    #[test]
    fn gegenbauer_values() {
        assert_eq!(gegenbauer(0, 3.7, -0.2), 1.0);
        assert_eq!(gegenbauer(1, 2.0, 0.5), 2.0);
        assert_relative_eq!(gegenbauer(2, 2.0, 0.5), 1.0, max_relative = 1e-15);
        // λ = 1/2 reduces to Legendre: P₃(u) = (5u³ − 3u)/2
        let u: f64 = 0.3;
        assert_relative_eq!(gegenbauer(3, 0.5, u), 0.5 * (5.0 * u.powi(3) - 3.0 * u), max_relative = 1e-14);
        // Cₙ^(1)(cos θ) = sin((n+1)θ)/sin θ
        let th: f64 = 0.7;
        assert_relative_eq!(gegenbauer(6, 1.0, th.cos()), (7.0 * th).sin() / th.sin(), max_relative = 1e-13);
    }

    #[test]
    fn build_rejects_extra_rm_state() {
        let spec = PotentialSpec::rosen_morse(1.0, 20, 0.0, 21);
        assert!(matches!(build_basis(&spec), Err(Error::TooManyModes { requested: 21, available: 20 })));
        let spec = PotentialSpec::rosen_morse(1.0, 20, 0.3, 21);
        assert!(build_basis(&spec).is_err());
    }

    #[test]
    fn validate_rejects_bad_parameters() {
        assert!(PotentialSpec::poschl_teller(-1.0, 2, 3).validate().is_err());
        assert!(PotentialSpec::poschl_teller(1.0, 0, 3).validate().is_err());
        assert!(PotentialSpec::rosen_morse(1.0, 4, 0.7, 3).validate().is_err());
        assert!(PotentialSpec::infinite_square_well(0.0, 3).validate().is_err());
        assert!(PotentialSpec::poschl_teller(1.0, 2, 0).validate().is_err());
    }

    #[test]
    fn figure_bases_have_increasing_spectra() {
        for spec in [fig1(), fig2()] {
            let b = build_basis(&spec).unwrap();
            assert_eq!(b.n_modes(), spec.n_modes);
            assert_eq!(b.energies()[0], 0.0);
            assert!(b.energies().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn odd_states_vanish_at_origin_and_parity_alternates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [fig1(), fig2(), PotentialSpec::infinite_square_well(1.0, 12), PotentialSpec::rosen_morse(1.0, 6, 0.3, 6)] {
            let b = build_basis(&spec).unwrap();
            let (_, hi) = b.domain();
            let span = if spec.family == Family::RosenMorse { 6.0 } else { hi };
            for n in 0..b.n_modes() {
                if n % 2 == 1 {
                    assert_eq!(b.eval(n, 0.0).unwrap(), 0.0);
                }
                for _ in 0..100 {
                    let x = rng.gen_range(-span..span);
                    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                    let d = b.eval(n, -x).unwrap() + sign * b.eval(n, x).unwrap();
                    assert!(d.abs() < 1e-12, "{} n={n} x={x}: {d}", spec.family);
                }
            }
        }
    }

    #[test]
    fn pt_ground_state_is_normalized_cos_squared() {
        let b = build_basis(&fig1()).unwrap();
        // ∫ cos⁴(πx) dx over [−½, ½] = 3/8
        let n0 = (8.0f64 / 3.0).sqrt();
        for x in [-0.4, -0.1, 0.0, 0.2, 0.45] {
            assert_relative_eq!(b.eval(0, x).unwrap(), n0 * (PI * x).cos().powi(2), max_relative = 1e-12);
        }
        assert!(b.eval(0, 0.0).unwrap() > b.eval(0, 0.1).unwrap());
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let b = build_basis(&fig1()).unwrap();
        assert!(matches!(b.eval(0, 0.6), Err(Error::OutsideDomain { .. })));
        assert!(matches!(b.eval(30, 0.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn rm_cutoff_covers_slowest_tail() {
        let (_, hi) = fig2().domain();
        assert!(hi >= RM_MIN_CUTOFF);
        assert!((1.0 / hi.cosh()) < RM_TAIL_TOLERANCE);
        let (_, hi) = PotentialSpec::rosen_morse(1.0, 20, 0.0, 5).domain();
        assert_eq!(hi, RM_MIN_CUTOFF);
    }

    #[test]
    fn eigen_residuals_are_small() {
        for spec in [fig1(), fig2(), PotentialSpec::infinite_square_well(1.0, 30)] {
            let b = build_basis(&spec).unwrap();
            for n in 0..b.n_modes() {
                let r = b.eigen_residual(n, 201).unwrap();
                assert!(r < 1e-6, "{:?} n={n}: {r:e}", spec.family);
            }
        }
    }
}
