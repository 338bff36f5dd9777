use std::f64::consts::PI;

use qrevival::carpet::{density_overlap, render_carpet, Normalization};
use qrevival::propagation::wavefunction_at;
use qrevival::revival_metrics::{autocorrelation, cat_fidelity, detune_scan, mirror_fidelity, CatKind};
use qrevival::time::time_range;
use qrevival::wavepacket::gaussian_coefficients;
use qrevival::*;

fn fig1() -> (EigenBasis, CoefficientSet) {
    let b = build_basis(&PotentialSpec::poschl_teller(PI, 2, 30)).unwrap();
    let c = gaussian_coefficients(30, 15.0, 3.0, PhaseScheme::Equal, 0).unwrap();
    (b, c)
}

fn fig2() -> (EigenBasis, CoefficientSet) {
    let b = build_basis(&PotentialSpec::rosen_morse(1.0, 20, 0.0, 20)).unwrap();
    let c = gaussian_coefficients(20, 10.0, 4.0, PhaseScheme::Equal, 0).unwrap();
    (b, c)
}

fn fig2_recipe() -> PacketRecipe {
    PacketRecipe::Gaussian { n_bar: 10.0, sigma: 4.0, phases: PhaseScheme::Equal, seed: 0 }
}

#[test]
fn tiny_detuning_is_continuous() {
    let base = PotentialSpec::rosen_morse(1.0, 20, 0.0, 20);
    let times = [TimePoint::QUARTER, TimePoint::HALF, TimePoint::ratio(1, 3)];
    let rows = detune_scan(&base, &fig2_recipe(), &[0.0, 1e-6], &times).unwrap();
    let (exact, nudged) = rows.split_at(times.len());
    for (a, b) in exact.iter().zip(nudged) {
        assert!((a.autocorr_abs - b.autocorr_abs).abs() < 1e-4);
        assert!((a.mirror_fidelity - b.mirror_fidelity).abs() < 1e-4);
        assert!((a.cat_quarter - b.cat_quarter).abs() < 1e-4);
        assert!((a.cat_three_quarter - b.cat_three_quarter).abs() < 1e-4);
    }
}

#[test]
fn grid_overlaps_match_spectral_sums() {
    for (b, c) in [fig1(), fig2()] {
        let grid = SpatialGrid::covering(&b, 4001).unwrap();
        let psi0 = sample_wavefunction(&c, &b, &grid).unwrap();
        for t in [TimePoint::ratio(1, 5), TimePoint::ratio(1, 3), TimePoint::real(0.1234)] {
            let psi = wavefunction_at(&c, &b, &grid, t).unwrap();
            let on_grid = psi0.inner(&psi);
            let spectral = autocorrelation(&c, &b, t).unwrap();
            assert!((on_grid - spectral).norm() < 1e-6, "{t}: {on_grid} vs {spectral}");
        }
    }
}

#[test]
fn carpet_half_revival_is_the_mirror_image() {
    for (b, c) in [fig1(), fig2()] {
        let grid = SpatialGrid::covering(&b, 401).unwrap();
        let ts = time_range(TimePoint::ZERO, TimePoint::FULL, 41);
        let r = render_carpet(&c, &b, &grid, &ts, Normalization::None).unwrap();
        let w = r.width();
        // rows 0..=20 cover [0, 1/2]; row j + 20 sits at t_R/2 + τ
        for j in 0..=20 {
            for i in 0..w {
                assert!((r.get(i, j + 20) - r.get(w - 1 - i, j)).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn carpet_is_symmetric_about_the_full_revival() {
    for (b, c) in [fig1(), fig2()] {
        let grid = SpatialGrid::covering(&b, 301).unwrap();
        let ts = time_range(TimePoint::ZERO, TimePoint::FULL, 25);
        let r = render_carpet(&c, &b, &grid, &ts, Normalization::None).unwrap();
        let h = r.height();
        for j in 0..h {
            for i in 0..r.width() {
                assert!((r.get(i, j) - r.get(i, h - 1 - j)).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn quarter_revival_density_is_a_two_lump_cat() {
    for (b, c) in [fig1(), fig2()] {
        let grid = SpatialGrid::covering(&b, 2001).unwrap();
        let r = render_carpet(&c, &b, &grid, &[TimePoint::ZERO, TimePoint::QUARTER], Normalization::None).unwrap();
        let (rho0, rho_q) = (r.row(0), r.row(1));
        let w = r.width();
        let cat: Vec<f64> = (0..w).map(|i| 0.5 * (rho0[i] + rho0[w - 1 - i])).collect();
        let with_cat = density_overlap(rho_q, &cat).unwrap();
        let with_start = density_overlap(rho_q, rho0).unwrap();
        assert!(rho0[..w / 2].iter().sum::<f64>() < 1e-2 * rho0[w / 2..].iter().sum::<f64>());
        assert!(with_cat > with_start, "{with_cat} vs {with_start}");
    }
}

#[test]
fn quarterly_spectral_identities_hold_for_both_figures() {
    for (b, c) in [fig1(), fig2()] {
        assert!(cat_fidelity(&c, &b, TimePoint::QUARTER, CatKind::Quarter).unwrap() > 1.0 - 1e-10);
        assert!(mirror_fidelity(&c, &b, TimePoint::HALF).unwrap() > 1.0 - 1e-10);
        assert!(cat_fidelity(&c, &b, TimePoint::THREE_QUARTERS, CatKind::ThreeQuarter).unwrap() > 1.0 - 1e-10);
        assert!(autocorrelation(&c, &b, TimePoint::FULL).unwrap().norm() > 1.0 - 1e-10);
    }
}
