//! Wave packets as amplitude vectors in an eigenbasis.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{EigenBasis, Family};

/// Name of the generator behind random phases, recorded in run manifests.
pub const PHASE_RNG: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseScheme {
    Equal,
    Random,
}

/// Identifies the basis a coefficient set indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisTag {
    pub family: String,
    pub alpha: f64,
    pub lambda: f64,
    pub n_modes: usize,
}

impl BasisTag {
    pub fn of(basis: &EigenBasis) -> Self {
        let spec = basis.spec();
        BasisTag {
            family: spec.family.to_string(),
            alpha: spec.effective_alpha(),
            lambda: if spec.family == Family::InfiniteSquareWell { 1.0 } else { spec.lambda() },
            n_modes: basis.n_modes(),
        }
    }
}

/// Complex amplitudes `cₙ` of a state `ψ = Σ cₙ φₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    amplitudes: Vec<Complex64>,
    basis: Option<BasisTag>,
}

impl CoefficientSet {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        CoefficientSet { amplitudes, basis: None }
    }

    /// Attach basis metadata; errors if the mode counts differ.
    pub fn tagged(mut self, basis: &EigenBasis) -> Result<Self> {
        self.check_basis(basis)?;
        self.basis = Some(BasisTag::of(basis));
        Ok(self)
    }

    /// Amplitude vector with a single unit entry.
    pub fn single_mode(n_modes: usize, n: usize) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n_modes];
        a[n] = Complex64::new(1.0, 0.0);
        CoefficientSet::new(a)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn basis_tag(&self) -> Option<&BasisTag> {
        self.basis.as_ref()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical("cannot normalize a zero or non-finite coefficient set".into()));
        }
        self.amplitudes.iter_mut().for_each(|c| *c /= n);
        Ok(self)
    }

    pub fn check_basis(&self, basis: &EigenBasis) -> Result<()> {
        if self.amplitudes.len() != basis.n_modes() {
            return Err(Error::BasisMismatch { expected: basis.n_modes(), got: self.amplitudes.len() });
        }
        if let Some(tag) = &self.basis {
            if tag.n_modes != basis.n_modes() || tag.family != basis.spec().family.to_string() {
                return Err(Error::BasisMismatch { expected: basis.n_modes(), got: tag.n_modes });
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩ = Σ conj(aₙ) bₙ`.
    pub fn inner(&self, other: &CoefficientSet) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Weights of the even and odd parity sectors.
    pub fn parity_weights(&self) -> (f64, f64) {
        self.amplitudes.iter().enumerate().fold((0.0, 0.0), |(e, o), (n, c)| {
            if n % 2 == 0 {
                (e + c.norm_sqr(), o)
            } else {
                (e, o + c.norm_sqr())
            }
        })
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        CoefficientSet { amplitudes, basis: self.basis.clone() }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&CoefficientJson::from(self))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CoefficientJson = serde_json::from_str(s)?;
        Ok(CoefficientSet {
            amplitudes: j.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
            basis: j.basis,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientJson {
    basis: Option<BasisTag>,
    amplitudes: Vec<[f64; 2]>,
}

impl From<&CoefficientSet> for CoefficientJson {
    fn from(c: &CoefficientSet) -> Self {
        CoefficientJson {
            basis: c.basis.clone(),
            amplitudes: c.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn apply_phases(moduli: Vec<f64>, phases: PhaseScheme, seed: u64) -> Vec<Complex64> {
    match phases {
        PhaseScheme::Equal => moduli.into_iter().map(|m| Complex64::new(m, 0.0)).collect(),
        PhaseScheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            moduli
                .into_iter()
                .map(|m| Complex64::from_polar(m, rng.gen_range(0.0..TAU)))
                .collect()
        }
    }
}

/// Packet with `|cₙ|² ∝ exp(−(n − n̄)²/2σ²)`, normalized over the retained modes.
pub fn gaussian_coefficients(
    n_modes: usize,
    n_bar: f64,
    sigma: f64,
    phases: PhaseScheme,
    seed: u64,
) -> Result<CoefficientSet> {
    if n_modes == 0 {
        return Err(Error::param("n_modes", "must be at least 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", "must be positive"));
    }
    if !n_bar.is_finite() {
        return Err(Error::param("n_bar", "must be finite"));
    }
    // Exponents are taken relative to the mode nearest n̄ so a distant centre
    // cannot underflow every weight.
    let nearest = n_bar.round().clamp(0.0, (n_modes - 1) as f64);
    let d0 = (nearest - n_bar).powi(2);
    let moduli = (0..n_modes)
        .map(|n| {
            let d = n as f64 - n_bar;
            (-(d * d - d0) / (4.0 * sigma * sigma)).exp()
        })
        .collect();
    CoefficientSet::new(apply_phases(moduli, phases, seed)).normalized()
}

/// Packet with `|cₙ|² ∝ exp(−n·decay)` and equal phases.
pub fn exponential_coefficients(n_modes: usize, decay: f64) -> Result<CoefficientSet> {
    if n_modes == 0 {
        return Err(Error::param("n_modes", "must be at least 1"));
    }
    if !(decay > 0.0) {
        return Err(Error::param("decay", "must be positive"));
    }
    // Relative to c₀ so an infinite decay rate leaves the ground state alone.
    let moduli = (0..n_modes)
        .map(|n| if n == 0 { 1.0 } else { (-0.5 * decay * n as f64).exp() })
        .collect();
    CoefficientSet::new(apply_phases(moduli, PhaseScheme::Equal, 0)).normalized()
}

/// How to build an initial packet for a given number of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weights", rename_all = "snake_case")]
pub enum PacketRecipe {
    Gaussian { n_bar: f64, sigma: f64, phases: PhaseScheme, seed: u64 },
    Exponential { decay: f64 },
}

impl PacketRecipe {
    pub fn build(&self, n_modes: usize) -> Result<CoefficientSet> {
        match *self {
            PacketRecipe::Gaussian { n_bar, sigma, phases, seed } => {
                gaussian_coefficients(n_modes, n_bar, sigma, phases, seed)
            }
            PacketRecipe::Exponential { decay } => exponential_coefficients(n_modes, decay),
        }
    }

    /// Build and tag against `basis`.
    pub fn build_for(&self, basis: &EigenBasis) -> Result<CoefficientSet> {
        self.build(basis.n_modes())?.tagged(basis)
    }
}

/// `cₙ → (−1)ⁿ cₙ`, i.e. `ψ(x) → ψ(−x)` for an even potential.
pub fn parity_transform(c: &CoefficientSet) -> CoefficientSet {
    c.with_amplitudes(
        c.amplitudes
            .iter()
            .enumerate()
            .map(|(n, &a)| if n % 2 == 0 { a } else { -a })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_is_normalized_and_symmetric() {
        let c = gaussian_coefficients(30, 15.0, 3.0, PhaseScheme::Equal, 0).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
        let a = c.amplitudes();
        assert!(a.iter().all(|z| z.im == 0.0 && z.re > 0.0));
        for k in 1..15 {
            assert!((a[15 + k].norm() - a[15 - k].norm()).abs() < 1e-15);
        }
        // |c_{n̄±1}|²/|c_{n̄}|² = e^{−1/18}
        assert!((a[16].norm_sqr() / a[15].norm_sqr() - (-1.0f64 / 18.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_rejects_bad_sigma() {
        assert!(gaussian_coefficients(10, 5.0, 0.0, PhaseScheme::Equal, 0).is_err());
        assert!(gaussian_coefficients(10, 5.0, -1.0, PhaseScheme::Equal, 0).is_err());
    }

    #[test]
    fn random_phases_are_seeded() {
        let a = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Random, 42).unwrap();
        let b = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Random, 42).unwrap();
        let c = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Random, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let eq = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Equal, 0).unwrap();
        for (x, y) in a.amplitudes().iter().zip(eq.amplitudes()) {
            assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_weights() {
        let c = exponential_coefficients(3, 2.0f64.ln()).unwrap();
        let w: Vec<f64> = c.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        for (got, want) in w.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let c = exponential_coefficients(2, f64::INFINITY).unwrap();
        assert_eq!(c.amplitudes()[0].re, 1.0);
        assert_eq!(c.amplitudes()[1].norm(), 0.0);
        let c = exponential_coefficients(8, 0.3).unwrap();
        assert!(c.amplitudes().windows(2).all(|w| w[0].norm() > w[1].norm()));
        assert!(exponential_coefficients(4, 0.0).is_err());
    }

    #[test]
    fn parity_leaves_even_mode_alone() {
        let c = CoefficientSet::single_mode(5, 2);
        assert_eq!(parity_transform(&c), c);
        let c = CoefficientSet::single_mode(5, 3);
        assert_eq!(parity_transform(&c).amplitudes()[3].re, -1.0);
    }

    #[test]
    fn json_keeps_amplitudes_bit_exact() {
        let c = gaussian_coefficients(7, 3.3, 1.7, PhaseScheme::Random, 9).unwrap();
        let back = CoefficientSet::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn parity_is_a_norm_preserving_involution(
            parts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
        ) {
            let c = CoefficientSet::new(parts.iter().map(|&(r, i)| Complex64::new(r, i)).collect());
            let p = parity_transform(&c);
            prop_assert_eq!(parity_transform(&p), c.clone());
            prop_assert!((p.norm_sqr() - c.norm_sqr()).abs() <= 1e-15 * c.norm_sqr().max(1.0));
        }

        #[test]
        fn gaussian_always_unit_norm(n in 1usize..60, n_bar in -5.0f64..70.0, sigma in 0.2f64..20.0, seed: u64) {
            let c = gaussian_coefficients(n, n_bar, sigma, PhaseScheme::Random, seed).unwrap();
            prop_assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
