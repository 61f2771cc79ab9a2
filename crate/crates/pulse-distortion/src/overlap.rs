//! Overlap between the expected wavepacket and the received one after a
//! rigid shift z̄:
//!
//! Λ(χ, z̄) = ∫ f̃(χz + z̄) f̃(z/χ) exp{i[ψ(χz + z̄) − ψ(z/χ)]} dz,
//!
//! with Δ_p = |Λ| and Δ_m the same integral without the phase.

use crate::profiles::{MultiPeakProfile, Peak, Profile, SpectralProfile};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub delta_p: f64,
    pub delta_m: f64,
    pub lambda_p: Complex64,
    pub chi: f64,
    pub z_bar: f64,
}

/// Which state the overlap refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    Pure,
    Mixed,
}

/// Integration window and initial subdivision for a given (χ, z̄).
struct Layout {
    lo: f64,
    hi: f64,
    pieces: usize,
}

fn layout<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, with_phase: bool, cfg: &QuadratureConfig) -> Result<Option<Layout>> {
    if !(chi > 0.0 && chi.is_finite() && z_bar.is_finite()) {
        return Err(Error::Domain(format!("need chi > 0 and finite shift, got chi={chi}, z_bar={z_bar}")));
    }
    let w = profile.half_width();
    // f̃(χz+z̄) vanishes outside |χz+z̄| ≤ w, f̃(z/χ) outside |z| ≤ χw
    let lo = ((-w - z_bar) / chi).max(-chi * w);
    let hi = ((w - z_bar) / chi).min(chi * w);
    if lo >= hi {
        return Ok(None);
    }
    // narrowest feature in either factor, in the integration variable
    let feature = profile.feature_width() * (1.0 / chi).min(chi);
    let mut pitch = 0.5 * feature;
    if with_phase {
        let slope = |z: f64| (chi * profile.phase_derivative(chi * z + z_bar) - profile.phase_derivative(z / chi) / chi).abs();
        let mut max_slope = slope(lo).max(slope(hi));
        if !profile.phase_is_polynomial() {
            max_slope = max_slope.max(slope(0.5 * (lo + hi)));
        }
        if max_slope > 0.0 {
            pitch = pitch.min(PI / max_slope);
        }
    }
    let pieces = ((hi - lo) / pitch).ceil() as usize;
    if pieces > cfg.max_subintervals / 4 {
        return Err(Error::Precondition(format!(
            "phase varies too fast: {pieces} initial subintervals needed"
        )));
    }
    Ok(Some(Layout { lo, hi, pieces: pieces.max(1) }))
}

fn integrand<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, z: f64) -> Complex64 {
    let u = chi * z + z_bar;
    let v = z / chi;
    let m = profile.modulus(u) * profile.modulus(v);
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(m, profile.phase_difference(u, v))
}

/// Λ with an explicit quadrature configuration; also returns the evaluation count.
pub fn lambda_pure_with<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, cfg: &QuadratureConfig) -> Result<(Complex64, usize)> {
    let Some(l) = layout(profile, chi, z_bar, true, cfg)? else {
        return Ok((Complex64::new(0.0, 0.0), 0));
    };
    let r = integrate(|z| integrand(profile, chi, z_bar, z), l.lo, l.hi, l.pieces, cfg)?;
    Ok((r.value, r.evaluations))
}

/// Δ_m with an explicit quadrature configuration; also returns the evaluation count.
pub fn overlap_mixed_with<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, cfg: &QuadratureConfig) -> Result<(f64, usize)> {
    let Some(l) = layout(profile, chi, z_bar, false, cfg)? else {
        return Ok((0.0, 0));
    };
    let r = integrate(
        |z| Complex64::new(profile.modulus(chi * z + z_bar) * profile.modulus(z / chi), 0.0),
        l.lo,
        l.hi,
        l.pieces,
        cfg,
    )?;
    Ok((r.value.re, r.evaluations))
}

/// Complex pure-state overlap Λ.
pub fn lambda_pure<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64) -> Result<Complex64> {
    lambda_pure_with(profile, chi, z_bar, &QuadratureConfig::default()).map(|r| r.0)
}

/// Δ_p = |Λ|.
pub fn overlap_pure<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64) -> Result<f64> {
    lambda_pure(profile, chi, z_bar).map(|l| l.norm())
}

/// Δ_m, the overlap of the moduli.
pub fn overlap_mixed<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64) -> Result<f64> {
    overlap_mixed_with(profile, chi, z_bar, &QuadratureConfig::default()).map(|r| r.0)
}

pub fn overlap<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64) -> Result<OverlapResult> {
    let lambda_p = lambda_pure(profile, chi, z_bar)?;
    let delta_m = overlap_mixed(profile, chi, z_bar)?;
    Ok(OverlapResult {
        delta_p: lambda_p.norm(),
        delta_m,
        lambda_p,
        chi,
        z_bar,
    })
}

/// Objective value for `which`, with evaluation count.
pub fn objective_with<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, which: Which, cfg: &QuadratureConfig) -> Result<(f64, usize)> {
    match which {
        Which::Pure => lambda_pure_with(profile, chi, z_bar, cfg).map(|(l, n)| (l.norm(), n)),
        Which::Mixed => overlap_mixed_with(profile, chi, z_bar, cfg),
    }
}

/// d/dz̄ of the objective, from the analytic derivative of the integrand.
pub fn objective_gradient_with<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, z_bar: f64, which: Which, cfg: &QuadratureConfig) -> Result<(f64, usize)> {
    let with_phase = which == Which::Pure;
    let Some(l) = layout(profile, chi, z_bar, with_phase, cfg)? else {
        return Ok((0.0, 0));
    };
    match which {
        Which::Mixed => {
            let r = integrate(
                |z| Complex64::new(profile.modulus_derivative(chi * z + z_bar) * profile.modulus(z / chi), 0.0),
                l.lo,
                l.hi,
                l.pieces,
                cfg,
            )?;
            Ok((r.value.re, r.evaluations))
        }
        Which::Pure => {
            let lam = integrate(|z| integrand(profile, chi, z_bar, z), l.lo, l.hi, l.pieces, cfg)?;
            let dlam = integrate(
                |z| {
                    let u = chi * z + z_bar;
                    let v = z / chi;
                    let mv = profile.modulus(v);
                    if mv == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let d = Complex64::new(profile.modulus_derivative(u), profile.modulus(u) * profile.phase_derivative(u));
                    d * mv * Complex64::from_polar(1.0, profile.phase_difference(u, v))
                },
                l.lo,
                l.hi,
                l.pieces,
                cfg,
            )?;
            let norm = lam.value.norm();
            let grad = if norm > 0.0 {
                (lam.value.conj() * dlam.value).re / norm
            } else {
                0.0
            };
            Ok((grad, lam.evaluations + dlam.evaluations))
        }
    }
}

/// Overlaps of a multi-peak profile f̃ Σₙ G̃ₙ, by direct quadrature of the
/// product profile. The double sum over (n, m) is the product of the two
/// peak sums, the second one centred on the m-th peak.
pub fn overlap_multipeak(envelope: &Profile, peaks: &[Peak], chi: f64, z_bar: f64) -> Result<(f64, f64)> {
    let profile = MultiPeakProfile::new(envelope.clone(), peaks.to_vec())?;
    let r = overlap(&profile, chi, z_bar)?;
    Ok((r.delta_p, r.delta_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::PeakShape;

    fn kinds() -> Vec<Profile> {
        vec![
            Profile::gaussian_linear(1.3),
            Profile::gaussian_quadratic(0.6, 4.0),
            Profile::comb(10.0, 2.0, 0.7, false, 0.0).unwrap(),
            Profile::comb(8.0, 1.5, 0.5, true, 0.3).unwrap(),
        ]
    }

    #[test]
    fn flat_spacetime_fixed_point() {
        for p in kinds() {
            let r = overlap(&p, 1.0, 0.0).unwrap();
            assert!((r.lambda_p - Complex64::new(1.0, 0.0)).norm() < 1e-10, "{:?}", p.kind());
            assert!((r.delta_m - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_mixed_closed_form() {
        let chi: f64 = 1.05;
        let p = Profile::gaussian_linear(2.0);
        let m = overlap_mixed(&p, chi, 0.0).unwrap();
        let exact = 2f64.sqrt() * chi / (1.0 + chi.powi(4)).sqrt();
        assert!((m - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn phase_sign_conjugates() {
        let a = lambda_pure(&Profile::gaussian_linear(1.4), 1.07, 0.3).unwrap();
        let b = lambda_pure(&Profile::gaussian_linear(-1.4), 1.07, 0.3).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn far_shift_kills_the_overlap() {
        let p = Profile::gaussian_linear(0.0);
        assert!(overlap_pure(&p, 1.02, 25.0).unwrap() < 1e-6);
        assert_eq!(overlap_mixed(&p, 1.0, 40.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_phase_pure_equals_mixed() {
        let p = Profile::comb(10.0, 2.0, 0.0, false, 0.0).unwrap();
        let r = overlap(&p, 1.01, 0.2).unwrap();
        assert!((r.delta_p - r.delta_m).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-13,
            ..Default::default()
        };
        for p in kinds() {
            for which in [Which::Pure, Which::Mixed] {
                let (chi, zb, h) = (1.03, 0.4, 1e-5);
                let (g, _) = objective_gradient_with(&p, chi, zb, which, &cfg).unwrap();
                let up = objective_with(&p, chi, zb + h, which, &cfg).unwrap().0;
                let down = objective_with(&p, chi, zb - h, which, &cfg).unwrap().0;
                let fd = (up - down) / (2.0 * h);
                assert!((g - fd).abs() < 1e-6, "{:?} {which:?}: {g} vs {fd}", p.kind());
            }
        }
    }

    #[test]
    fn multipeak_single_flat_peak_reduces() {
        let env = Profile::gaussian_quadratic(0.7, 2.0);
        let peaks = [Peak {
            center: 0.0,
            width: 1.0,
            shape: PeakShape::Flat,
        }];
        let (p, m) = overlap_multipeak(&env, &peaks, 1.04, 0.15).unwrap();
        let r = overlap(&env, 1.04, 0.15).unwrap();
        assert!((p - r.delta_p).abs() < 1e-9);
        assert!((m - r.delta_m).abs() < 1e-9);
    }

    #[test]
    fn multipeak_two_peaks_identity() {
        let env = Profile::gaussian_linear(0.3);
        let peaks = [
            Peak {
                center: -1.0,
                width: 0.2,
                shape: PeakShape::Gaussian,
            },
            Peak {
                center: 1.5,
                width: 0.3,
                shape: PeakShape::Gaussian,
            },
        ];
        let (p, m) = overlap_multipeak(&env, &peaks, 1.0, 0.0).unwrap();
        assert!((p - 1.0).abs() < 1e-10 && (m - 1.0).abs() < 1e-10);
    }

    #[test]
    fn multipeak_reproduces_comb() {
        let (s, d, phi) = (10.0, 2.0, 0.8);
        let comb = Profile::comb(s, d, phi, false, 0.0).unwrap();
        let n = comb.n_max().unwrap();
        let peaks: Vec<Peak> = (-n..=n)
            .map(|k| Peak {
                center: k as f64 * d,
                width: 1.0 / s,
                shape: PeakShape::Gaussian,
            })
            .collect();
        let env = Profile::gaussian_linear(phi);
        for (chi, zb) in [(1.0, 0.0), (1.02, 0.1), (0.97, -0.3)] {
            let (p, m) = overlap_multipeak(&env, &peaks, chi, zb).unwrap();
            let r = overlap(&comb, chi, zb).unwrap();
            assert!((p - r.delta_p).abs() < 1e-7, "{p} vs {}", r.delta_p);
            assert!((m - r.delta_m).abs() < 1e-7, "{m} vs {}", r.delta_m);
        }
    }
}
