//! Grid-free revival diagnostics computed as exact spectral sums.
//!
//! For an even potential with `Eₙ/α²` integral and of the form `±n² + 2Mn`,
//! the state at a quarter of the revival time is a superposition of the
//! initial packet and its mirror image:
//!
//! ```text
//! ψ(x, t_R/4)  = ½(1 − iθ)ψ(x, 0) + ½(1 + iθ)ψ(−x, 0)
//! ψ(x, t_R/2)  = ψ(−x, 0)
//! ψ(x, 3t_R/4) = ½(1 + iθ)ψ(x, 0) + ½(1 − iθ)ψ(−x, 0)
//! ```
//!
//! with `θ = (−1)^M`. In coefficient space the quarter target keeps the even
//! amplitudes and multiplies the odd ones by `−iθ`. The sign of the `n²` term
//! decides which of the two lines belongs to `t_R/4`: `n² + 2Mn` (Pöschl–Teller,
//! square well) follows the display above, while `2Mn − n²` (Rosen–Morse)
//! exchanges the quarter and three-quarter lines.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::evolve_coefficients;
use crate::spectral_basis::{build_basis, EigenBasis, Family, PotentialSpec};
use crate::time::TimePoint;
use crate::wavepacket::{parity_transform, CoefficientSet, PacketRecipe};

/// Default minimum fidelity for a revival peak.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.9;
/// Default distance (in units of `t_R`) within which a peak takes a quarterly label.
pub const DEFAULT_LABEL_TOLERANCE: f64 = 1.0 / 200.0;

/// Quarter-revival cat fidelity below which a detuned Rosen–Morse revival
/// counts as faded.
pub const DETUNE_FADE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatKind {
    Quarter,
    ThreeQuarter,
}

/// Which way round the `(1 ∓ iθ)/2` factors are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Quarter target multiplies odd amplitudes by `−iθ`.
    Direct,
    /// Quarter target multiplies odd amplitudes by `+iθ`.
    Exchanged,
}

/// The pairing realised by the closed-form spectrum of `family`.
pub fn matching_pairing(family: Family) -> Pairing {
    match family {
        Family::InfiniteSquareWell | Family::PoschlTeller => Pairing::Direct,
        Family::RosenMorse => Pairing::Exchanged,
    }
}

/// `Σ|cₙ|² e^{−iEₙt}`, divided by `Σ|cₙ|²`.
pub fn autocorrelation(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint) -> Result<Complex64> {
    let ct = evolve_coefficients(c, basis, t)?;
    Ok(c.inner(&ct) / c.norm_sqr())
}

/// `|⟨Pψ(0)|ψ(t)⟩|`, the overlap with the mirror image of the initial state.
pub fn mirror_fidelity(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint) -> Result<f64> {
    let ct = evolve_coefficients(c, basis, t)?;
    Ok((parity_transform(c).inner(&ct) / c.norm_sqr()).norm())
}

/// Coefficients of the cat-state target built from the initial packet.
pub fn cat_target(c: &CoefficientSet, theta: f64, which: CatKind, pairing: Pairing) -> CoefficientSet {
    let mut odd = Complex64::new(0.0, -theta);
    if which == CatKind::ThreeQuarter {
        odd = -odd;
    }
    if pairing == Pairing::Exchanged {
        odd = -odd;
    }
    let amps = c
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, &a)| if n % 2 == 0 { a } else { a * odd })
        .collect();
    c.with_amplitudes(amps)
}

/// Overlap modulus between `ψ(t)` and a cat target with an explicit pairing.
pub fn cat_fidelity_with(
    c: &CoefficientSet,
    basis: &EigenBasis,
    t: TimePoint,
    which: CatKind,
    pairing: Pairing,
) -> Result<f64> {
    let ct = evolve_coefficients(c, basis, t)?;
    let target = cat_target(c, basis.spec().theta(), which, pairing);
    Ok((target.inner(&ct) / c.norm_sqr()).norm())
}

/// Overlap modulus between `ψ(t)` and the family's quarter or three-quarter cat state.
pub fn cat_fidelity(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint, which: CatKind) -> Result<f64> {
    cat_fidelity_with(c, basis, t, which, matching_pairing(basis.spec().family))
}

/// Fidelities under both pairings, `(direct, exchanged)`.
pub fn cat_fidelity_both(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint, which: CatKind) -> Result<(f64, f64)> {
    Ok((
        cat_fidelity_with(c, basis, t, which, Pairing::Direct)?,
        cat_fidelity_with(c, basis, t, which, Pairing::Exchanged)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakKind {
    Full,
    Half,
    Quarter,
    ThreeQuarter,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    /// Fraction of `t_R`.
    pub time: f64,
    pub kind: PeakKind,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub threshold: f64,
    pub label_tolerance: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { threshold: DEFAULT_PEAK_THRESHOLD, label_tolerance: DEFAULT_LABEL_TOLERANCE }
    }
}

/// Fidelity time series and detected revival peaks.
#[derive(Debug, Clone, Serialize)]
pub struct RevivalReport {
    /// Fractions of `t_R`.
    pub times: Vec<TimePoint>,
    #[serde(serialize_with = "serialize_complex")]
    pub autocorr: Vec<Complex64>,
    pub mirror_fidelity: Vec<f64>,
    pub cat_quarter: Vec<f64>,
    pub cat_three_quarter: Vec<f64>,
    pub peaks: Vec<Peak>,
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

struct Sample {
    autocorr: Complex64,
    mirror: f64,
    quarter: f64,
    three_quarter: f64,
}

impl Sample {
    fn best(&self) -> f64 {
        self.autocorr.norm().max(self.mirror).max(self.quarter).max(self.three_quarter)
    }
}

fn sample(c: &CoefficientSet, basis: &EigenBasis, t: TimePoint) -> Result<Sample> {
    Ok(Sample {
        autocorr: autocorrelation(c, basis, t)?,
        mirror: mirror_fidelity(c, basis, t)?,
        quarter: cat_fidelity(c, basis, t, CatKind::Quarter)?,
        three_quarter: cat_fidelity(c, basis, t, CatKind::ThreeQuarter)?,
    })
}

/// Nearest quarterly label within `tol`, as `(kind, exact fraction)`.
fn quarterly_label(t: f64, tol: f64) -> Option<(PeakKind, TimePoint)> {
    let base = t.floor();
    let frac = t - base;
    let candidates = [
        (0.0, PeakKind::Full),
        (0.25, PeakKind::Quarter),
        (0.5, PeakKind::Half),
        (0.75, PeakKind::ThreeQuarter),
        (1.0, PeakKind::Full),
    ];
    let (q, kind) = candidates
        .iter()
        .copied()
        .min_by(|a, b| (frac - a.0).abs().total_cmp(&(frac - b.0).abs()))?;
    if (frac - q).abs() > tol {
        return None;
    }
    let quarters = base as i64 * 4 + (q * 4.0) as i64;
    Some((kind, TimePoint::ratio(quarters, 4)))
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Evaluate all fidelities on `times` and pick out revival peaks.
pub fn revival_scan(
    c: &CoefficientSet,
    basis: &EigenBasis,
    times: &[TimePoint],
    cfg: &ScanConfig,
) -> Result<RevivalReport> {
    if times.is_empty() {
        return Err(Error::Empty("revival scan needs at least one time"));
    }
    if times.windows(2).any(|w| w[1].fraction() < w[0].fraction()) {
        return Err(Error::param("t_grid", "times must be sorted"));
    }
    c.check_basis(basis)?;
    let samples = times
        .par_iter()
        .map(|&t| sample(c, basis, t))
        .collect::<Result<Vec<_>>>()?;
    let score: Vec<f64> = samples.iter().map(Sample::best).collect();

    let mut peaks: Vec<Peak> = Vec::new();
    for j in 0..times.len() {
        let s = score[j];
        let t = times[j].fraction();
        if t == 0.0 || s < cfg.threshold {
            continue;
        }
        let left_ok = j == 0 || s >= score[j - 1];
        let right_ok = j + 1 == times.len() || s > score[j + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let peak = match quarterly_label(t, cfg.label_tolerance) {
            Some((kind, exact)) => {
                let at = sample(c, basis, exact)?;
                let fidelity = match kind {
                    PeakKind::Full => at.autocorr.norm(),
                    PeakKind::Half => at.mirror,
                    PeakKind::Quarter => at.quarter,
                    PeakKind::ThreeQuarter => at.three_quarter,
                    PeakKind::Other => unreachable!(),
                };
                Peak { time: exact.fraction(), kind, fidelity }
            }
            None => {
                let lo = times[j.saturating_sub(1)].fraction();
                let hi = times[(j + 1).min(times.len() - 1)].fraction();
                let f = |x: f64| sample(c, basis, TimePoint::Real(x)).map(|s| s.best()).unwrap_or(0.0);
                let (time, fidelity) = golden_max(f, lo, hi);
                Peak { time, kind: PeakKind::Other, fidelity }
            }
        };
        if !peaks.iter().any(|p| p.kind == peak.kind && (p.time - peak.time).abs() < cfg.label_tolerance) {
            peaks.push(peak);
        }
    }

    Ok(RevivalReport {
        times: times.to_vec(),
        autocorr: samples.iter().map(|s| s.autocorr).collect(),
        mirror_fidelity: samples.iter().map(|s| s.mirror).collect(),
        cat_quarter: samples.iter().map(|s| s.quarter).collect(),
        cat_three_quarter: samples.iter().map(|s| s.three_quarter).collect(),
        peaks,
    })
}

impl RevivalReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_over_tR,autocorr_re,autocorr_im,autocorr_abs,mirror_fidelity,cat_quarter,cat_three_quarter\n");
        for i in 0..self.times.len() {
            let a = self.autocorr[i];
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i].fraction(),
                a.re,
                a.im,
                a.norm(),
                self.mirror_fidelity[i],
                self.cat_quarter[i],
                self.cat_three_quarter[i]
            );
        }
        out
    }
}

/// One row of a detuning scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuneRow {
    pub r: f64,
    pub time: TimePoint,
    pub autocorr_abs: f64,
    pub mirror_fidelity: f64,
    pub cat_quarter: f64,
    pub cat_three_quarter: f64,
}

/// Rebuild the Rosen–Morse basis at `A/α = M + r` for each `r` and evaluate
/// the fidelities at each time. `t_R` stays `2π/α²` throughout.
pub fn detune_scan(
    base: &PotentialSpec,
    recipe: &PacketRecipe,
    r_values: &[f64],
    times: &[TimePoint],
) -> Result<Vec<DetuneRow>> {
    if base.family != Family::RosenMorse {
        return Err(Error::param("family", "detune requires RM"));
    }
    if let Some(r) = r_values.iter().find(|r| !(0.0..=0.5).contains(*r)) {
        return Err(Error::param("detune_r", format!("r = {r} outside [0, 0.5]")));
    }
    if r_values.is_empty() || times.is_empty() {
        return Err(Error::Empty("detune scan needs r values and times"));
    }
    let per_r = r_values
        .par_iter()
        .map(|&r| -> Result<Vec<DetuneRow>> {
            let spec = PotentialSpec { detune_r: r, ..base.clone() };
            let basis = build_basis(&spec)?;
            let c = recipe.build_for(&basis)?;
            times
                .iter()
                .map(|&t| {
                    let s = sample(&c, &basis, t)?;
                    Ok(DetuneRow {
                        r,
                        time: t,
                        autocorr_abs: s.autocorr.norm(),
                        mirror_fidelity: s.mirror,
                        cat_quarter: s.quarter,
                        cat_three_quarter: s.three_quarter,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_r.into_iter().flatten().collect())
}

pub fn detune_csv(rows: &[DetuneRow]) -> String {
    let mut out = String::from("r,t_over_tR,autocorr_abs,mirror_fidelity,cat_quarter,cat_three_quarter\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.r,
            row.time.fraction(),
            row.autocorr_abs,
            row.mirror_fidelity,
            row.cat_quarter,
            row.cat_three_quarter
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_basis::build_basis;
    use crate::time::time_range;
    use crate::wavepacket::{exponential_coefficients, gaussian_coefficients, PhaseScheme};
    use std::f64::consts::{PI, TAU};

    fn fig1() -> (EigenBasis, CoefficientSet) {
        let b = build_basis(&PotentialSpec::poschl_teller(PI, 2, 30)).unwrap();
        (b, gaussian_coefficients(30, 15.0, 3.0, PhaseScheme::Equal, 0).unwrap())
    }

    fn fig2() -> (EigenBasis, CoefficientSet) {
        let b = build_basis(&PotentialSpec::rosen_morse(1.0, 20, 0.0, 20)).unwrap();
        (b, gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Equal, 0).unwrap())
    }

    /// ψ(t) amplitudes straight from the definition, phases computed in floating point.
    fn brute_force_evolve(c: &CoefficientSet, spec: &PotentialSpec, frac: f64) -> Vec<Complex64> {
        let a = spec.effective_alpha();
        let t = frac * TAU / (a * a);
        let lam = spec.lambda();
        c.amplitudes()
            .iter()
            .enumerate()
            .map(|(n, &cn)| {
                let n = n as f64;
                let e = match spec.family {
                    Family::PoschlTeller => (lam * a + n * a).powi(2) - (lam * a).powi(2),
                    Family::RosenMorse => (lam * a).powi(2) - (lam * a - n * a).powi(2),
                    Family::InfiniteSquareWell => (a * (n + 1.0)).powi(2) - a * a,
                };
                cn * Complex64::from_polar(1.0, -e * t)
            })
            .collect()
    }

    fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
    }

    #[test]
    fn pairing_matches_brute_force_per_family() {
        let specs = [
            PotentialSpec::poschl_teller(PI, 2, 30),
            PotentialSpec::poschl_teller(1.3, 3, 20),
            PotentialSpec::rosen_morse(1.0, 20, 0.0, 20),
            PotentialSpec::rosen_morse(0.7, 9, 0.0, 9),
            PotentialSpec::infinite_square_well(1.0, 25),
        ];
        for spec in specs {
            let c = gaussian_coefficients(spec.n_modes, spec.n_modes as f64 / 2.0, 3.0, PhaseScheme::Random, 5).unwrap();
            let theta = spec.theta();
            for (frac, which) in [(0.25, CatKind::Quarter), (0.75, CatKind::ThreeQuarter)] {
                let psi = brute_force_evolve(&c, &spec, frac);
                let direct = overlap(cat_target(&c, theta, which, Pairing::Direct).amplitudes(), &psi);
                let exchanged = overlap(cat_target(&c, theta, which, Pairing::Exchanged).amplitudes(), &psi);
                let (hit, miss) = match matching_pairing(spec.family) {
                    Pairing::Direct => (direct, exchanged),
                    Pairing::Exchanged => (exchanged, direct),
                };
                assert!((hit - 1.0).abs() < 1e-10, "{} {frac}: {hit}", spec.family);
                assert!(miss < 0.999, "{} {frac}: other pairing also matched ({miss})", spec.family);
            }
        }
    }

    #[test]
    fn autocorrelation_at_zero_and_full_revival() {
        for (b, c) in [fig1(), fig2()] {
            let a0 = autocorrelation(&c, &b, TimePoint::ZERO).unwrap();
            assert!((a0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!((autocorrelation(&c, &b, TimePoint::FULL).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_integer_detuning_revives_fully_at_half() {
        let b = build_basis(&PotentialSpec::rosen_morse(1.0, 20, 0.5, 20)).unwrap();
        let c = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Equal, 0).unwrap();
        let a = autocorrelation(&c, &b, TimePoint::HALF).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert!(cat_fidelity(&c, &b, TimePoint::QUARTER, CatKind::Quarter).unwrap() < 0.9);
    }

    #[test]
    fn mirror_fidelity_values() {
        let (b, c) = fig1();
        assert!((mirror_fidelity(&c, &b, TimePoint::HALF).unwrap() - 1.0).abs() < 1e-12);
        let single = CoefficientSet::single_mode(30, 3);
        assert!((mirror_fidelity(&single, &b, TimePoint::ZERO).unwrap() - 1.0).abs() < 1e-15);

        // detuned RM at t_R/2: |Σ (−1)ⁿ|cₙ|² e^{−iEₙ t}| with Eₙ = A² − (A − n)², A = 20.25
        let spec = PotentialSpec::rosen_morse(1.0, 20, 0.25, 20);
        let bd = build_basis(&spec).unwrap();
        let c = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Equal, 0).unwrap();
        let psi = brute_force_evolve(&c, &spec, 0.5);
        let mirror: Vec<Complex64> = parity_transform(&c).amplitudes().to_vec();
        let want = overlap(&mirror, &psi);
        let got = mirror_fidelity(&c, &bd, TimePoint::HALF).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        // equivalently |Σ |cₙ|² e^{−iπn/2}|
        let alt: Complex64 = c
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, z)| z.norm_sqr() * Complex64::from_polar(1.0, -PI * n as f64 / 2.0))
            .sum();
        assert!((alt.norm() - want).abs() < 1e-12);
    }

    #[test]
    fn cat_fidelity_at_zero_is_sector_norm() {
        for (b, c) in [fig1(), fig2()] {
            let (pe, po) = c.parity_weights();
            let want = (pe * pe + po * po).sqrt();
            for which in [CatKind::Quarter, CatKind::ThreeQuarter] {
                let got = cat_fidelity(&c, &b, TimePoint::ZERO, which).unwrap();
                assert!((got - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quarterly_identities_hold_for_many_packets() {
        let (b, _) = fig1();
        let (b2, _) = fig2();
        for basis in [&b, &b2] {
            let n = basis.n_modes();
            let packets = [
                gaussian_coefficients(n, n as f64 / 2.0, 3.0, PhaseScheme::Equal, 0).unwrap(),
                gaussian_coefficients(n, 4.0, 2.0, PhaseScheme::Random, 11).unwrap(),
                exponential_coefficients(n, 0.4).unwrap(),
            ];
            for c in &packets {
                assert!(1.0 - cat_fidelity(c, basis, TimePoint::QUARTER, CatKind::Quarter).unwrap() < 1e-10);
                assert!(1.0 - mirror_fidelity(c, basis, TimePoint::HALF).unwrap() < 1e-10);
                assert!(1.0 - cat_fidelity(c, basis, TimePoint::THREE_QUARTERS, CatKind::ThreeQuarter).unwrap() < 1e-10);
                assert!(1.0 - autocorrelation(c, basis, TimePoint::FULL).unwrap().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scan_finds_quarterly_peaks() {
        let (b, c) = fig1();
        let times = time_range(TimePoint::ZERO, TimePoint::FULL, 2001);
        let rep = revival_scan(&c, &b, &times, &ScanConfig::default()).unwrap();
        let kinds: Vec<(f64, PeakKind)> = rep.peaks.iter().map(|p| (p.time, p.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0.25, PeakKind::Quarter),
                (0.5, PeakKind::Half),
                (0.75, PeakKind::ThreeQuarter),
                (1.0, PeakKind::Full)
            ]
        );
        assert!(rep.peaks.iter().all(|p| p.fidelity >= 1.0 - 1e-10));
        assert!(rep
            .autocorr
            .iter()
            .map(|z| z.norm())
            .chain(rep.mirror_fidelity.iter().copied())
            .chain(rep.cat_quarter.iter().copied())
            .all(|f| f <= 1.0 + 1e-12));
    }

    #[test]
    fn scan_labels_peaks_off_the_grid_points() {
        let (b, c) = fig1();
        // 1999 intervals: t_R/4 is not a grid point.
        let times = time_range(TimePoint::ZERO, TimePoint::FULL, 2000);
        let rep = revival_scan(&c, &b, &times, &ScanConfig::default()).unwrap();
        let kinds: Vec<PeakKind> = rep.peaks.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PeakKind::Quarter, PeakKind::Half, PeakKind::ThreeQuarter, PeakKind::Full]);
    }

    #[test]
    fn two_mode_packet_beats_with_the_gap_period() {
        let (b, _) = fig1();
        let mut amps = vec![Complex64::new(0.0, 0.0); 30];
        amps[4] = Complex64::new(0.6, 0.0);
        amps[5] = Complex64::new(0.8, 0.0);
        let c = CoefficientSet::new(amps);
        // gap in units of α²: (25 + 20) − (16 + 16) = 13, so the beat period is t_R/13
        let period = 1.0 / 13.0;
        for k in 0..20 {
            let t = 0.013 * k as f64;
            let a = autocorrelation(&c, &b, TimePoint::Real(t)).unwrap().norm();
            let a2 = autocorrelation(&c, &b, TimePoint::Real(t + period)).unwrap().norm();
            assert!((a - a2).abs() < 1e-12);
            // |0.36 + 0.64 e^{−iωt}|
            let want = (Complex64::new(0.36, 0.0) + 0.64 * Complex64::from_polar(1.0, -TAU * 13.0 * t)).norm();
            assert!((a - want).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_threshold_above_one_finds_nothing() {
        let (b, c) = fig1();
        let times = time_range(TimePoint::ZERO, TimePoint::FULL, 401);
        let rep = revival_scan(&c, &b, &times, &ScanConfig { threshold: 1.1, ..Default::default() }).unwrap();
        assert!(rep.peaks.is_empty());
    }

    #[test]
    fn scan_errors() {
        let (b, c) = fig1();
        assert!(matches!(revival_scan(&c, &b, &[], &ScanConfig::default()), Err(Error::Empty(_))));
        let unsorted = [TimePoint::HALF, TimePoint::QUARTER];
        assert!(revival_scan(&c, &b, &unsorted, &ScanConfig::default()).is_err());
    }

    #[test]
    fn fidelities_ignore_global_phase_and_parity() {
        let (b, c) = fig2();
        let rotated = c.with_amplitudes(c.amplitudes().iter().map(|z| z * Complex64::from_polar(1.0, 1.234)).collect());
        let p = parity_transform(&c);
        for k in 0..17 {
            let t = TimePoint::Real(0.061 * k as f64);
            let m = mirror_fidelity(&c, &b, t).unwrap();
            assert!((m - mirror_fidelity(&rotated, &b, t).unwrap()).abs() < 1e-13);
            assert!((m - mirror_fidelity(&p, &b, t).unwrap()).abs() < 1e-13);
            let q = cat_fidelity(&c, &b, t, CatKind::Quarter).unwrap();
            assert!((q - cat_fidelity(&rotated, &b, t, CatKind::Quarter).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn detune_scan_trend() {
        let base = PotentialSpec::rosen_morse(1.0, 20, 0.0, 20);
        let recipe = PacketRecipe::Gaussian { n_bar: 10.0, sigma: 4.0, phases: PhaseScheme::Equal, seed: 0 };
        let rows = detune_scan(&base, &recipe, &[0.0, 0.25, 0.5], &[TimePoint::QUARTER, TimePoint::HALF]).unwrap();
        assert_eq!(rows.len(), 6);
        assert!((rows[0].cat_quarter - 1.0).abs() < 1e-10);
        assert!((rows[1].mirror_fidelity - 1.0).abs() < 1e-10);
        assert!((rows[5].autocorr_abs - 1.0).abs() < 1e-10);
        assert!(rows[0].cat_quarter > rows[2].cat_quarter && rows[2].cat_quarter > rows[4].cat_quarter);
        let pt = PotentialSpec::poschl_teller(PI, 2, 10);
        assert!(detune_scan(&pt, &recipe, &[0.0], &[TimePoint::HALF]).is_err());
        assert!(detune_scan(&base, &recipe, &[0.6], &[TimePoint::HALF]).is_err());
    }
}
