//! Reference values: frozen independent evaluations and quoted headline numbers.

use pulse_distortion::analytic::{
    self, estimate_zeta, gaussian_linear_closed, gaussian_linear_near_earth, relative_change, ChangeKind, NearEarthParams,
};
use pulse_distortion::multiphoton::{coherent_overlap, fock_overlap, squeezed_overlap};
use pulse_distortion::optimize::{maximize_shift, OptimizeConfig};
use pulse_distortion::overlap::{overlap, overlap_mixed, overlap_pure, Which};
use pulse_distortion::profiles::{jacobi_theta3, normalization, quartic_moment, DimensionfulFrame, Profile, ProfileKind};
use pulse_distortion::spacetime::{delta_near_limit_with, redshift_factor, SpacetimeConfig, EARTH_RADIUS_M, EARTH_SCHWARZSCHILD_RADIUS_M};
use pulse_distortion::{Coefficients, Complex64};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn frame() -> DimensionfulFrame {
    DimensionfulFrame::new(1.215e15, 1e12).unwrap()
}

fn near(delta1: f64, phi: f64, sigma_tilde: f64) -> NearEarthParams {
    NearEarthParams {
        delta1,
        delta2: 0.0,
        phi_tilde: phi,
        z0: 0.0,
        sigma_tilde,
        d_tilde: 2.0,
        delta_z0: 0.0,
        zeta: None,
    }
}

#[test]
fn theta3_matches_series() {
    // 1 + 2(q + q⁴ + q⁹ + q¹⁶)
    assert!((jacobi_theta3(0.1).unwrap() - 1.200_200_002).abs() < 1e-15);
    let series: f64 = 1.0 + 2.0 * (1..40).map(|n| 0.5f64.powi(n * n)).sum::<f64>();
    assert!((jacobi_theta3(0.5).unwrap() - series).abs() < 1e-15);
}

#[test]
fn gaussian_quartic_moment() {
    let p = Profile::gaussian_linear(1.3);
    assert!((quartic_moment(&p).unwrap() - 0.282_094_791_773_878_14).abs() < 1e-12);
}

#[test]
fn every_kind_is_normalized() {
    for kind in ProfileKind::ALL {
        let mut params = pulse_distortion::profiles::ProfileParams::new(kind);
        params.phi_tilde = 0.7;
        params.z0 = 3.0;
        let p = Profile::from_params(&params).unwrap();
        assert!((normalization(&p).unwrap() - 1.0).abs() < 1e-8, "{kind}");
    }
}

#[test]
fn earth_close_separation_delta1() {
    let (d1, d2) = delta_near_limit_with(EARTH_RADIUS_M, 4e5, EARTH_SCHWARZSCHILD_RADIUS_M, 0.1, &Coefficients::EXACT).unwrap();
    assert!(rel(d1, -1.740_307_644_011_929e-10) < 1e-14);
    let ell = 4e5 / EARTH_RADIUS_M;
    assert!(rel((d2 / d1).abs(), 3.0 * ell) < 0.01);
}

#[test]
fn distant_receiver_limit() {
    let cfg = SpacetimeConfig::new(EARTH_RADIUS_M, 1e30, EARTH_SCHWARZSCHILD_RADIUS_M).unwrap();
    assert!(rel(redshift_factor(&cfg).unwrap(), 1.000_000_000_348_061_6) < 1e-15);
}

#[test]
fn gaussian_closed_forms_match_quadrature() {
    let p = Profile::gaussian_linear(2.0);
    let (cp, cm) = gaussian_linear_closed(1.05, 2.0, 0.0).unwrap();
    let o = overlap(&p, 1.05, 0.0).unwrap();
    assert!(rel(o.delta_p, cp) < 1e-8);
    assert!(rel(o.delta_m, cm) < 1e-8);
    let chi: f64 = 1.05;
    assert!(rel(overlap_mixed(&p, chi, 0.0).unwrap(), (2.0f64).sqrt() * chi / (1.0 + chi.powi(4)).sqrt()) < 1e-8);

    let q = Profile::gaussian_quadratic(0.7, 50.0);
    let (qp, _) = analytic::gaussian_quadratic_closed(1.01, 0.7, 50.0, 0.2).unwrap();
    assert!(rel(overlap_pure(&q, 1.01, 0.2).unwrap(), qp) < 1e-7);
}

#[test]
fn linear_optimum_is_unshifted() {
    let p = Profile::gaussian_linear(1.5);
    let r = maximize_shift(&p, 1.05, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
    assert!(r.z_bar_opt.abs() < 1e-8);
    // δω_opt = −κω₀ when z̄_opt = 0
    let kappa = pulse_distortion::spacetime::kappa(1.05);
    assert!(rel(r.delta_omega_opt, -kappa * 1.215e15) < 1e-8);
}

#[test]
fn quadratic_stationary_point() {
    let p = Profile::gaussian_quadratic(0.5, 100.0);
    let r = maximize_shift(&p, 1.001, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
    let want = analytic::ClosedForms::default().gaussian_quadratic_shift_from(1e-3, 0.5, 100.0).unwrap();
    assert!(rel(r.z_bar_opt, want) < 1e-6, "{} vs {want}", r.z_bar_opt);
    assert!(overlap_pure(&p, 1.001, 0.0).unwrap() < r.delta_p_opt);
}

#[test]
fn near_earth_linear_headline() {
    // Δ_p − Δ_m = −2φ̃²δ₁² at δ₁ = 1e-3, φ̃ = 1
    let o = gaussian_linear_near_earth(1e-3, 1.0);
    assert!(rel(o.delta_p - o.delta_m, -2e-6) < 1e-9);
}

#[test]
fn relative_change_headlines() {
    assert!(rel(relative_change(ChangeKind::GaussianLinear, &near(1e-3, 1.0, 10.0)).unwrap(), -2e-6) < 0.01);
    assert!(rel(relative_change(ChangeKind::CombLinear, &near(1e-3, 1.0, 10.0)).unwrap(), -2e-8) < 0.01);
    assert_eq!(relative_change(ChangeKind::GaussianLinear, &near(1e-3, 0.0, 10.0)).unwrap(), 0.0);
}

#[test]
fn zeta_estimate_is_order_one() {
    let z = estimate_zeta(0.01).unwrap();
    assert!((0.9..=1.1).contains(&z));
    assert!(rel(estimate_zeta(0.1).unwrap(), estimate_zeta(0.05).unwrap()) < 0.05);
}

#[test]
fn multiphoton_reference_values() {
    assert!(rel(fock_overlap(0.999, 1000).unwrap(), 0.367_695_424_770_963_73) < 1e-13);
    let (p, m) = coherent_overlap(Complex64::new(1.0 - 1e-4, 0.0), 0.7, 1e4).unwrap();
    assert!(rel(p, (-1.0f64).exp()) < 1e-12);
    assert_eq!(m, 0.7);
    for n in [1e3, 1e4, 1e5] {
        let (p, _) = squeezed_overlap(Complex64::new(0.5, 0.0), 1.0, n).unwrap();
        assert!(rel(p, 4.0 / n) < 5.0 / n, "N={n}");
    }
}
