//! Closed-form and near-Earth expressions for the optimal overlaps.
//!
//! Exact forms take χ and are evaluated through χ − 1 and logarithms so that
//! the tiny distortions of real orbits (δ₁ ~ 1e-10) survive in double
//! precision. The quadratic-phase Gaussian uses the convention
//! ψ(z) = −φ̃²(z + z₀)², and its coefficients are the ones that agree with
//! direct quadrature (see [`printed`] for the literal transcription).

use crate::{Coefficients, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Optimal overlaps with their logarithms kept for cancellation-free ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalOverlaps {
    pub delta_p: f64,
    pub delta_m: f64,
    pub z_bar_opt: f64,
    pub ln_delta_p: f64,
    pub ln_delta_m: f64,
}

impl OptimalOverlaps {
    fn from_logs(ln_delta_p: f64, ln_delta_m: f64, z_bar_opt: f64) -> Self {
        OptimalOverlaps {
            delta_p: ln_delta_p.exp(),
            delta_m: ln_delta_m.exp(),
            z_bar_opt,
            ln_delta_p,
            ln_delta_m,
        }
    }

    /// From expansions of the form 1 − x_p and 1 − x_m.
    fn from_deficits(deficit_p: f64, deficit_m: f64, z_bar_opt: f64) -> Self {
        OptimalOverlaps {
            delta_p: 1.0 - deficit_p,
            delta_m: 1.0 - deficit_m,
            z_bar_opt,
            ln_delta_p: (-deficit_p).ln_1p(),
            ln_delta_m: (-deficit_m).ln_1p(),
        }
    }

    /// η = Δ_p/Δ_m − 1.
    pub fn eta(&self) -> f64 {
        (self.ln_delta_p - self.ln_delta_m).exp_m1()
    }

    /// 1 − Δ_p.
    pub fn deficit_p(&self) -> f64 {
        -self.ln_delta_p.exp_m1()
    }

    /// 1 − Δ_m.
    pub fn deficit_m(&self) -> f64 {
        -self.ln_delta_m.exp_m1()
    }
}

/// Powers of χ built from χ − 1.
#[derive(Debug, Clone, Copy)]
struct Chi {
    chi: f64,
    sq_m1: f64,
    quad_p1: f64,
    quad_m1: f64,
}

impl Chi {
    fn new(chi_minus_one: f64) -> Result<Chi> {
        let chi = 1.0 + chi_minus_one;
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::Domain(format!("chi must be positive, got {chi}")));
        }
        let sq_m1 = chi_minus_one * (2.0 + chi_minus_one);
        let quad_m1 = sq_m1 * (2.0 + sq_m1);
        Ok(Chi {
            chi,
            sq_m1,
            quad_p1: 2.0 + quad_m1,
            quad_m1,
        })
    }

    /// ln √(c χ²/(1+χ⁴)); c = 2 is the exact Gaussian prefactor.
    fn ln_prefactor(&self, c: f64) -> f64 {
        0.5 * ((0.5 * c).ln() + (-self.sq_m1 * self.sq_m1 / self.quad_p1).ln_1p())
    }
}

/// Closed forms evaluated with a given coefficient table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub coeffs: Coefficients,
}

impl Default for ClosedForms {
    fn default() -> Self {
        ClosedForms {
            coeffs: Coefficients::EXACT,
        }
    }
}

/// Pieces of the quadratic-phase Gaussian overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTerms {
    pub xi: f64,
    pub a1: f64,
    pub a2: f64,
    /// z̄-independent exponent 4(χ²−1)²φ̃⁴z₀²/((χ⁴+1)ξ).
    pub offset: f64,
}

impl ClosedForms {
    pub fn new(coeffs: Coefficients) -> Self {
        ClosedForms { coeffs }
    }

    /// ln Δ_p, ln Δ_m of the linear-phase Gaussian at shift z̄, from χ − 1.
    pub fn gaussian_linear_logs(&self, chi_minus_one: f64, phi: f64, z_bar: f64) -> Result<(f64, f64)> {
        let c = &self.coeffs;
        let x = Chi::new(chi_minus_one)?;
        let ln_m = x.ln_prefactor(c.gauss_prefactor) - c.gauss_shift * z_bar * z_bar / x.quad_p1;
        let ln_p = ln_m - c.gauss_linear_phase * x.sq_m1 * x.sq_m1 / x.quad_p1 * phi * phi;
        Ok((ln_p, ln_m))
    }

    pub fn gaussian_linear_closed(&self, chi: f64, phi: f64, z_bar: f64) -> Result<(f64, f64)> {
        let (ln_p, ln_m) = self.gaussian_linear_logs(chi - 1.0, phi, z_bar)?;
        Ok((ln_p.exp(), ln_m.exp()))
    }

    pub fn gaussian_linear_optimal_from(&self, chi_minus_one: f64, phi: f64) -> Result<OptimalOverlaps> {
        let (ln_p, ln_m) = self.gaussian_linear_logs(chi_minus_one, phi, 0.0)?;
        Ok(OptimalOverlaps::from_logs(ln_p, ln_m, 0.0))
    }

    pub fn quadratic_terms_from(&self, chi_minus_one: f64, phi: f64, z0: f64) -> Result<QuadraticTerms> {
        let c = &self.coeffs;
        let x = Chi::new(chi_minus_one)?;
        let phi4 = phi.powi(4);
        let ratio = x.quad_m1 / x.quad_p1;
        let xi = 1.0 + c.quad_xi * phi4 * ratio * ratio;
        let a1 = x.chi * x.chi * x.sq_m1 * phi4 * z0 / (x.quad_p1 * x.quad_p1 * xi);
        let a2 = (1.0 + c.quad_a2_phase * phi4) / (x.quad_p1 * xi);
        let offset = c.quad_offset * x.sq_m1 * x.sq_m1 * phi4 * z0 * z0 / (x.quad_p1 * xi);
        Ok(QuadraticTerms { xi, a1, a2, offset })
    }

    pub fn gaussian_quadratic_logs(&self, chi_minus_one: f64, phi: f64, z0: f64, z_bar: f64) -> Result<(f64, f64)> {
        let c = &self.coeffs;
        let x = Chi::new(chi_minus_one)?;
        let t = self.quadratic_terms_from(chi_minus_one, phi, z0)?;
        let ln_pre = x.ln_prefactor(c.gauss_prefactor);
        let ln_m = ln_pre - c.gauss_shift * z_bar * z_bar / x.quad_p1;
        let ln_p = ln_pre - c.quad_xi_power * t.xi.ln() - t.offset - c.quad_a1 * t.a1 * z_bar - c.quad_a2 * t.a2 * z_bar * z_bar;
        Ok((ln_p, ln_m))
    }

    pub fn gaussian_quadratic_closed(&self, chi: f64, phi: f64, z0: f64, z_bar: f64) -> Result<(f64, f64)> {
        let (ln_p, ln_m) = self.gaussian_quadratic_logs(chi - 1.0, phi, z0, z_bar)?;
        Ok((ln_p.exp(), ln_m.exp()))
    }

    /// Stationary point z̄_opt = −32a₁/a₂ of the pure overlap.
    pub fn gaussian_quadratic_shift_from(&self, chi_minus_one: f64, phi: f64, z0: f64) -> Result<f64> {
        let c = &self.coeffs;
        let t = self.quadratic_terms_from(chi_minus_one, phi, z0)?;
        Ok(-c.quad_a1 * t.a1 / (2.0 * c.quad_a2 * t.a2))
    }

    pub fn gaussian_quadratic_optimal_from(&self, chi_minus_one: f64, phi: f64, z0: f64) -> Result<OptimalOverlaps> {
        let z_opt = self.gaussian_quadratic_shift_from(chi_minus_one, phi, z0)?;
        let (ln_p, _) = self.gaussian_quadratic_logs(chi_minus_one, phi, z0, z_opt)?;
        let (_, ln_m) = self.gaussian_quadratic_logs(chi_minus_one, phi, z0, 0.0)?;
        Ok(OptimalOverlaps::from_logs(ln_p, ln_m, z_opt))
    }

    /// Δ_p ≈ 1 − (1 + 2φ̃²)δ₁², Δ_m ≈ 1 − δ₁².
    pub fn gaussian_linear_near_earth(&self, delta1: f64, phi: f64) -> OptimalOverlaps {
        let d2 = delta1 * delta1;
        OptimalOverlaps::from_deficits((1.0 + self.coeffs.near_linear_phase * phi * phi) * d2, d2, 0.0)
    }

    /// Second-order expansion of the exact quadratic-phase optimum:
    /// Δ_p ≈ 1 − (1 + 16φ̃⁴ + 8φ̃⁴z₀²/(1+16φ̃⁴))δ₁², z̄_opt ≈ −32φ̃⁴z₀δ₁/(1+16φ̃⁴).
    pub fn gaussian_quadratic_near_earth_corrected(&self, delta1: f64, phi: f64, z0: f64) -> OptimalOverlaps {
        let c = &self.coeffs;
        let phi4 = phi.powi(4);
        let denom = 1.0 + c.quad_a2_phase * phi4;
        let coeff = 1.0 + c.near_quad_phase * phi4 + c.near_quad_offset * phi4 * z0 * z0 / denom;
        let d2 = delta1 * delta1;
        OptimalOverlaps::from_deficits(coeff * d2, d2, -32.0 * phi4 * z0 * delta1 / denom)
    }
}

/// Δ_m = √2χ/√(1+χ⁴)·exp[−z̄²/(4(χ⁴+1))], Δ_p = Δ_m·exp[−(χ²−1)²φ̃²/(χ⁴+1)].
pub fn gaussian_linear_closed(chi: f64, phi_tilde: f64, z_bar: f64) -> Result<(f64, f64)> {
    ClosedForms::default().gaussian_linear_closed(chi, phi_tilde, z_bar)
}

/// Complex Λ of the linear-phase Gaussian; its modulus is Δ_p.
pub fn gaussian_linear_lambda(chi: f64, phi_tilde: f64, z_bar: f64) -> Result<Complex64> {
    let (p, _) = gaussian_linear_closed(chi, phi_tilde, z_bar)?;
    let c4 = chi.powi(4);
    let arg = -phi_tilde * z_bar * (chi * chi + 1.0) / (c4 + 1.0);
    Ok(Complex64::from_polar(p, arg))
}

pub fn gaussian_linear_optimal(chi: f64, phi_tilde: f64) -> Result<OptimalOverlaps> {
    ClosedForms::default().gaussian_linear_optimal_from(chi - 1.0, phi_tilde)
}

pub fn gaussian_linear_near_earth(delta1: f64, phi_tilde: f64) -> OptimalOverlaps {
    ClosedForms::default().gaussian_linear_near_earth(delta1, phi_tilde)
}

/// ξ, a₁, a₂ of the quadratic-phase Gaussian.
pub fn quadratic_terms(chi: f64, phi_tilde: f64, z0: f64) -> Result<QuadraticTerms> {
    ClosedForms::default().quadratic_terms_from(chi - 1.0, phi_tilde, z0)
}

/// Δ_p = √(2χ²/(1+χ⁴))·ξ^(−1/4)·exp[−4(χ²−1)²φ̃⁴z₀²/((χ⁴+1)ξ)]·exp[−16a₁z̄ − a₂z̄²/4]
/// with ξ = 1 + 16φ̃⁴(χ⁴−1)²/(χ⁴+1)², a₁ = χ²(χ²−1)φ̃⁴z₀/((χ⁴+1)²ξ),
/// a₂ = (1+16φ̃⁴)/((χ⁴+1)ξ); Δ_m as for the linear phase.
pub fn gaussian_quadratic_closed(chi: f64, phi_tilde: f64, z0: f64, z_bar: f64) -> Result<(f64, f64)> {
    ClosedForms::default().gaussian_quadratic_closed(chi, phi_tilde, z0, z_bar)
}

/// Complex Λ of the quadratic-phase Gaussian from the complex Gaussian integral.
pub fn gaussian_quadratic_lambda(chi: f64, phi_tilde: f64, z0: f64, z_bar: f64) -> Result<Complex64> {
    if !(chi > 0.0) {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    let p2 = phi_tilde * phi_tilde;
    let a = chi * chi + 1.0 / (chi * chi);
    let c = chi * chi - 1.0 / (chi * chi);
    let b = chi * (z_bar + z0) - z0 / chi;
    let alpha = Complex64::new(0.25 * a, p2 * c);
    let beta = Complex64::new(-0.5 * chi * z_bar, -2.0 * p2 * b);
    // (z̄+z₀)² − z₀² = z̄(z̄ + 2z₀)
    let gamma = Complex64::new(-0.25 * z_bar * z_bar, -p2 * z_bar * (z_bar + 2.0 * z0));
    let value = (PI / alpha).sqrt() * (beta * beta / (4.0 * alpha) + gamma).exp() / (2.0 * PI).sqrt();
    Ok(value)
}

pub fn gaussian_quadratic_optimal(chi: f64, phi_tilde: f64, z0: f64) -> Result<OptimalOverlaps> {
    ClosedForms::default().gaussian_quadratic_optimal_from(chi - 1.0, phi_tilde, z0)
}

/// Near-Earth expansion as printed:
/// Δ_p ≈ 1 − (1 + 32φ̃⁴ + 8φ̃⁴z₀²)δ₁² + 2⁹φ̃⁴z₀²δ₁⁴/(1+16φ̃⁴), Δ_m ≈ 1 − δ₁².
///
/// The δ₁² coefficient disagrees with the expansion of the exact optimum;
/// see [`gaussian_quadratic_near_earth_corrected`].
pub fn gaussian_quadratic_near_earth(delta1: f64, phi_tilde: f64, z0: f64) -> OptimalOverlaps {
    let phi4 = phi_tilde.powi(4);
    let d2 = delta1 * delta1;
    let deficit_p = (1.0 + 32.0 * phi4 + 8.0 * phi4 * z0 * z0) * d2 - 512.0 * phi4 * z0 * z0 * d2 * d2 / (1.0 + 16.0 * phi4);
    OptimalOverlaps::from_deficits(deficit_p, d2, 0.0)
}

pub fn gaussian_quadratic_near_earth_corrected(delta1: f64, phi_tilde: f64, z0: f64) -> OptimalOverlaps {
    ClosedForms::default().gaussian_quadratic_near_earth_corrected(delta1, phi_tilde, z0)
}

/// Linear-phase comb in the near-Earth regime, as printed:
/// Δ_p ≈ (1 − δ₁² − σ̃²δ₁²/2)·exp[−2φ̃²δ₁²/σ̃²], Δ_m drops the exponential.
///
/// Direct quadrature agrees with Δ_m only for d̃ ≪ 1, and finds a phase
/// penalty near 2φ̃²δ₁² rather than 2φ̃²δ₁²/σ̃².
pub fn comb_linear_near_earth_optimal(delta1: f64, sigma_tilde: f64, phi_tilde: f64) -> OptimalOverlaps {
    let d2 = delta1 * delta1;
    let deficit_m = d2 + 0.5 * sigma_tilde * sigma_tilde * d2;
    let ln_m = (-deficit_m).ln_1p();
    let ln_p = ln_m - 2.0 * d2 * phi_tilde * phi_tilde / (sigma_tilde * sigma_tilde);
    OptimalOverlaps {
        delta_p: ln_p.exp(),
        delta_m: 1.0 - deficit_m,
        z_bar_opt: 0.0,
        ln_delta_p: ln_p,
        ln_delta_m: ln_m,
    }
}

/// Inputs of the near-Earth comb expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearEarthParams {
    pub delta1: f64,
    pub delta2: f64,
    pub phi_tilde: f64,
    pub z0: f64,
    pub sigma_tilde: f64,
    pub d_tilde: f64,
    pub delta_z0: f64,
    /// Sum constant ζ; estimated from the profile when absent.
    pub zeta: Option<f64>,
}

/// Limits on the perturbative smallness conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityLimits {
    pub phase: f64,
    pub offset: f64,
    pub comb: f64,
}

impl Default for ValidityLimits {
    fn default() -> Self {
        ValidityLimits {
            phase: 0.1,
            offset: 0.1,
            comb: 0.1,
        }
    }
}

impl NearEarthParams {
    /// Checks φ̃δ₁ ≪ 1, z₀²δ₁² ≪ 1 and d̃²σ̃⁴δ₁² ≪ 1.
    pub fn check(&self, limits: &ValidityLimits) -> Result<()> {
        let d = self.delta1;
        let checks = [
            ("phi_tilde*delta1", (self.phi_tilde * d).abs(), limits.phase),
            ("z0^2*delta1^2", (self.z0 * d).powi(2), limits.offset),
            ("d_tilde^2*sigma_tilde^4*delta1^2", (self.d_tilde * self.sigma_tilde.powi(2) * d).powi(2), limits.comb),
        ];
        for (name, value, limit) in checks {
            if !(value < limit) {
                return Err(Error::Validity(format!("{name} = {value:e} is not below {limit}")));
            }
        }
        Ok(())
    }
}

/// Regime of the quadratic-phase comb result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombQuadraticCase {
    /// φ̃ of order one; the phase drops out.
    ModeratePhase,
    /// Strong phase, centre offset of order δ₁².
    StrongPhaseCentered,
    /// Strong phase, finite centre offset.
    StrongPhaseOffset,
}

/// Which printing of the strong-phase, finite-offset bracket to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transcription {
    MainText,
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombQuadraticOptions {
    /// Case (i) when φ̃ ≤ this.
    pub moderate_phase_max: f64,
    /// Case (ii.i) when |δz₀| ≤ this · δ₁².
    pub centered_offset_factor: f64,
    pub transcription: Transcription,
    pub limits: ValidityLimits,
}

impl Default for CombQuadraticOptions {
    fn default() -> Self {
        CombQuadraticOptions {
            moderate_phase_max: 2.0,
            centered_offset_factor: 10.0,
            transcription: Transcription::MainText,
            limits: ValidityLimits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombQuadraticResult {
    pub overlaps: OptimalOverlaps,
    pub case: CombQuadraticCase,
    pub zeta: f64,
    pub sigma_ratio: f64,
}

/// Argument at which ζ is estimated: (1/2)(1 + σ̃²δ₁² − 32δ₁²φ̃⁴/σ̃²)d̃².
pub fn zeta_argument(p: &NearEarthParams) -> f64 {
    let d2 = p.delta1 * p.delta1;
    let s2 = p.sigma_tilde * p.sigma_tilde;
    0.5 * (1.0 + s2 * d2 - 32.0 * d2 * p.phi_tilde.powi(4) / s2) * p.d_tilde * p.d_tilde
}

/// Quadratic-phase comb optimum in the near-Earth regime, with
/// z̄_opt = 8φ̃²(δz₀ − 4δ₁²)δ₁/(1+Σ) and Σ = σ̃²/(16ζd̃²φ̃²).
pub fn comb_quadratic_optimal(p: &NearEarthParams, opts: &CombQuadraticOptions) -> Result<CombQuadraticResult> {
    p.check(&opts.limits)?;
    let zeta = match p.zeta {
        Some(z) => z,
        None => estimate_zeta(zeta_argument(p))?,
    };
    if !(zeta > 0.0) {
        return Err(Error::Domain(format!("zeta must be positive, got {zeta}")));
    }
    let (d, s, dt, phi, dz) = (p.delta1, p.sigma_tilde, p.d_tilde, p.phi_tilde, p.delta_z0);
    let (d2, s2, dt2, phi2) = (d * d, s * s, dt * dt, phi * phi);
    let phi4 = phi2 * phi2;
    let sigma_ratio = if phi == 0.0 {
        f64::INFINITY
    } else {
        s2 / (16.0 * zeta * dt2 * phi2)
    };
    let one_plus = 1.0 + sigma_ratio;
    let z_bar_opt = if phi == 0.0 {
        0.0
    } else {
        8.0 * phi2 * (dz - 4.0 * d2) * d / one_plus
    };
    let deficit_m = d2 + 0.5 * s2 * d2;
    let case = if phi <= opts.moderate_phase_max {
        CombQuadraticCase::ModeratePhase
    } else if dz.abs() <= opts.centered_offset_factor * d2 {
        CombQuadraticCase::StrongPhaseCentered
    } else {
        CombQuadraticCase::StrongPhaseOffset
    };
    let gain = 16.0 * phi4 / s2 * d2;
    let deficit_p = match case {
        CombQuadraticCase::ModeratePhase => deficit_m,
        CombQuadraticCase::StrongPhaseCentered => deficit_m - gain,
        CombQuadraticCase::StrongPhaseOffset => {
            let zeta_term = zeta * dt2 * s2;
            let loss = match opts.transcription {
                Transcription::MainText => {
                    let bracket = 8.0 + phi2 * one_plus + zeta_term * one_plus + s2 * s2 * phi2 / one_plus + 256.0 * dt2 * s2 * phi2 / one_plus
                        - 16.0 * zeta_term * phi4;
                    8.0 * dt2 * phi2 / one_plus * bracket
                }
                Transcription::Appendix => {
                    let bracket = s2 * s2 * phi2 + 8.0 * one_plus + phi2 * one_plus * one_plus + zeta_term * one_plus * one_plus + 256.0 * dt2 * s2 * phi2
                        - 16.0 * zeta_term * phi4 * one_plus;
                    8.0 * phi2 / (dt2 * one_plus * one_plus) * bracket
                }
            };
            deficit_m - gain + loss * dz * dz * d2
        }
    };
    Ok(CombQuadraticResult {
        overlaps: OptimalOverlaps::from_deficits(deficit_p, deficit_m, z_bar_opt),
        case,
        zeta,
        sigma_ratio,
    })
}

/// ζ = x Σ_{n≥1} cosh⁻²(nx), the constant in Σ cosh⁻²(nx) ≈ ζ/x.
pub fn estimate_zeta(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 0.3) {
        return Err(Error::Domain(format!("zeta estimate needs 0 < x <= 0.3, got {x}")));
    }
    let mut sum = 0.0;
    let mut n = 1.0;
    loop {
        let term = (n * x).cosh().powi(-2);
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
        n += 1.0;
    }
    Ok(x * sum)
}

/// Profile family for [`relative_change`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangeKind {
    GaussianLinear,
    CombLinear,
    GaussianQuadratic,
    CombQuadratic,
}

/// η = Δ_p,opt/Δ_m,opt − 1 from the matching optimal-overlap expression,
/// with χ = 1 + δ₁ for the exact Gaussian forms.
pub fn relative_change(kind: ChangeKind, p: &NearEarthParams) -> Result<f64> {
    Ok(match kind {
        ChangeKind::GaussianLinear => ClosedForms::default().gaussian_linear_optimal_from(p.delta1, p.phi_tilde)?.eta(),
        ChangeKind::CombLinear => comb_linear_near_earth_optimal(p.delta1, p.sigma_tilde, p.phi_tilde).eta(),
        ChangeKind::GaussianQuadratic => ClosedForms::default().gaussian_quadratic_optimal_from(p.delta1, p.phi_tilde, p.z0)?.eta(),
        ChangeKind::CombQuadratic => comb_quadratic_optimal(p, &CombQuadraticOptions::default())?.overlaps.eta(),
    })
}

/// Literal transcriptions that quadrature does not support, kept for comparison.
pub mod printed {
    use super::*;

    /// a₁ = χ²((χ²−1)²/(χ⁴+1)²)(φ̃²/ξ)z₀.
    pub fn gaussian_quadratic_a1(chi: f64, phi_tilde: f64, z0: f64) -> Result<f64> {
        let t = quadratic_terms(chi, phi_tilde, z0)?;
        let c2 = chi * chi;
        let q = c2 * c2 + 1.0;
        Ok(c2 * (c2 - 1.0).powi(2) / (q * q) * phi_tilde * phi_tilde / t.xi * z0)
    }

    /// Stationary point −32a₁/a₂ with the printed a₁.
    pub fn gaussian_quadratic_shift(chi: f64, phi_tilde: f64, z0: f64) -> Result<f64> {
        let t = quadratic_terms(chi, phi_tilde, z0)?;
        Ok(-32.0 * gaussian_quadratic_a1(chi, phi_tilde, z0)? / t.a2)
    }

    /// η ≈ −8{(4 + z₀²) − 64z₀²δ₁⁴/(1+16φ̃²)}φ̃⁴δ₁².
    pub fn gaussian_quadratic_eta(delta1: f64, phi_tilde: f64, z0: f64) -> f64 {
        let d2 = delta1 * delta1;
        let p2 = phi_tilde * phi_tilde;
        -8.0 * ((4.0 + z0 * z0) - 64.0 * z0 * z0 * d2 * d2 / (1.0 + 16.0 * p2)) * p2 * p2 * d2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_linear_trivial_cases() {
        assert_eq!(gaussian_linear_closed(1.0, 0.0, 0.0).unwrap(), (1.0, 1.0));
        let o = gaussian_linear_optimal(1.0, 2.0).unwrap();
        assert_eq!((o.delta_p, o.delta_m, o.z_bar_opt), (1.0, 1.0, 0.0));
        let o = gaussian_linear_optimal(1.3, 0.0).unwrap();
        assert_eq!(o.delta_p, o.delta_m);
        let chi: f64 = 1.07;
        let exact = 2f64.sqrt() * chi / (1.0 + chi.powi(4)).sqrt();
        assert!((gaussian_linear_optimal(chi, 1.0).unwrap().delta_m - exact).abs() < 1e-15);
    }

    #[test]
    fn shift_envelope_variance() {
        // at χ = 1 the mixed overlap is a Gaussian in z̄ with variance 2(χ⁴+1) = 4
        for zb in [0.3, 1.0, 2.5] {
            let (_, m) = gaussian_linear_closed(1.0, 0.0, zb).unwrap();
            assert!((m - (-zb * zb / 8.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_lambda_modulus() {
        let l = gaussian_linear_lambda(1.04, 1.3, 0.4).unwrap();
        let (p, _) = gaussian_linear_closed(1.04, 1.3, 0.4).unwrap();
        assert!((l.norm() - p).abs() < 1e-15);
    }

    #[test]
    fn quadratic_closed_matches_complex_integral() {
        for &(chi, phi, z0, zb) in &[(1.01, 0.7, 50.0, 0.2), (1.05, 0.3, 3.0, -0.5), (0.95, 1.2, 10.0, 0.0)] {
            let (p, _) = gaussian_quadratic_closed(chi, phi, z0, zb).unwrap();
            let l = gaussian_quadratic_lambda(chi, phi, z0, zb).unwrap();
            assert!((p - l.norm()).abs() < 1e-13 * p.max(1e-300), "{chi} {phi} {z0} {zb}: {p} vs {}", l.norm());
        }
    }

    #[test]
    fn quadratic_reductions() {
        let (p, m) = gaussian_quadratic_closed(1.03, 0.0, 7.0, 0.4).unwrap();
        let (pl, ml) = gaussian_linear_closed(1.03, 0.0, 0.4).unwrap();
        assert!((p - pl).abs() < 1e-15 && (m - ml).abs() < 1e-15);
        let t = quadratic_terms(1.0, 0.9, 30.0).unwrap();
        assert_eq!((t.xi, t.a1), (1.0, 0.0));
        let (p, _) = gaussian_quadratic_closed(1.0, 0.9, 30.0, 0.7).unwrap();
        assert!((p - (-t.a2 * 0.49 / 4.0f64).exp()).abs() < 1e-15);
        assert_eq!(gaussian_quadratic_optimal(1.02, 0.5, 0.0).unwrap().z_bar_opt, 0.0);
    }

    #[test]
    fn quadratic_optimum_is_stationary() {
        let (chi, phi, z0) = (1.001, 0.5, 100.0);
        let o = gaussian_quadratic_optimal(chi, phi, z0).unwrap();
        let h = 1e-4;
        let up = gaussian_quadratic_closed(chi, phi, z0, o.z_bar_opt + h).unwrap().0;
        let down = gaussian_quadratic_closed(chi, phi, z0, o.z_bar_opt - h).unwrap().0;
        assert!(o.delta_p > up && o.delta_p > down);
        // reference value from an independent high-precision evaluation
        assert!((o.z_bar_opt + 0.100_049_800_1).abs() < 1e-9, "{}", o.z_bar_opt);
        assert!((o.delta_p - 0.997_503_625_0).abs() < 1e-9, "{}", o.delta_p);
        let naive = gaussian_quadratic_closed(chi, phi, z0, 0.0).unwrap().0;
        assert!((naive - 0.995_015_489_8).abs() < 1e-9, "{naive}");
    }

    #[test]
    fn near_earth_shift_bound() {
        let (phi, z0) = (0.5, 100.0);
        for d in [1e-3, 1e-4, 1e-6] {
            let o = gaussian_quadratic_optimal(1.0 + d, phi, z0).unwrap();
            assert!(o.z_bar_opt.abs() <= 2.0 * z0 * d * (1.0 + 10.0 * d));
        }
    }

    #[test]
    fn near_earth_linear_values() {
        let o = gaussian_linear_near_earth(0.0, 3.0);
        assert_eq!((o.delta_p, o.delta_m), (1.0, 1.0));
        let o = gaussian_linear_near_earth(1e-3, 1.0);
        assert!((o.delta_p - o.delta_m + 2e-6).abs() < 1e-15);
        let o = gaussian_quadratic_near_earth(1e-3, 0.0, 40.0);
        assert_eq!(o.delta_p, o.delta_m);
    }

    #[test]
    fn printed_quartic_term_bound() {
        // 2⁹φ̃⁴z₀²δ₁⁴/(1+16φ̃⁴) ≤ 32z₀²δ₁⁴
        for phi in [0.1f64, 0.5, 1.0, 4.0] {
            let phi4 = phi.powi(4);
            let (z0, d): (f64, f64) = (50.0, 1e-3);
            let term = 512.0 * phi4 * z0 * z0 * d.powi(4) / (1.0 + 16.0 * phi4);
            assert!(term <= 32.0 * z0 * z0 * d.powi(4));
        }
    }

    #[test]
    fn relative_change_headlines() {
        let base = NearEarthParams {
            delta1: 1e-3,
            delta2: 0.0,
            phi_tilde: 1.0,
            z0: 0.0,
            sigma_tilde: 10.0,
            d_tilde: 0.2,
            delta_z0: 0.0,
            zeta: None,
        };
        let ga = relative_change(ChangeKind::GaussianLinear, &base).unwrap();
        assert!((ga + 2e-6).abs() < 0.01 * 2e-6);
        let co = relative_change(ChangeKind::CombLinear, &base).unwrap();
        assert!((co + 2e-8).abs() < 0.01 * 2e-8);
        let zero = NearEarthParams { phi_tilde: 0.0, ..base };
        for k in [ChangeKind::GaussianLinear, ChangeKind::CombLinear, ChangeKind::GaussianQuadratic] {
            assert_eq!(relative_change(k, &zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn eta_survives_earth_scale() {
        let d = -1.74e-10;
        let o = ClosedForms::default().gaussian_linear_optimal_from(d, 1.0).unwrap();
        assert!((o.eta() + 2.0 * d * d).abs() < 1e-3 * 2.0 * d * d);
    }

    #[test]
    fn zeta_estimates() {
        let z = estimate_zeta(0.01).unwrap();
        assert!((0.9..=1.1).contains(&z));
        let a = estimate_zeta(0.1).unwrap();
        let b = estimate_zeta(0.05).unwrap();
        assert!((a - b).abs() < 0.05 * b);
        assert!(estimate_zeta(0.0).is_err() && estimate_zeta(0.5).is_err());
    }

    fn comb_params(phi: f64, dz: f64) -> NearEarthParams {
        NearEarthParams {
            delta1: 1e-4,
            delta2: 0.0,
            phi_tilde: phi,
            z0: 0.0,
            sigma_tilde: 40.0,
            d_tilde: 0.5,
            delta_z0: dz,
            zeta: None,
        }
    }

    #[test]
    fn comb_quadratic_cases() {
        let opts = CombQuadraticOptions::default();
        let r = comb_quadratic_optimal(&comb_params(1.0, 0.3), &opts).unwrap();
        assert_eq!(r.case, CombQuadraticCase::ModeratePhase);
        assert_eq!(r.overlaps.delta_p, r.overlaps.delta_m);
        let d2 = 1e-8;
        assert!((r.overlaps.delta_m - (1.0 - d2 - 800.0 * d2)).abs() < 1e-15);

        let r = comb_quadratic_optimal(&comb_params(10.0, 0.0), &opts).unwrap();
        assert_eq!(r.case, CombQuadraticCase::StrongPhaseCentered);
        let gain = 16.0 * 1e4 / 1600.0 * d2;
        assert!((r.overlaps.delta_p - r.overlaps.delta_m - gain).abs() < 1e-15);

        let r = comb_quadratic_optimal(&comb_params(10.0, 0.5), &opts).unwrap();
        assert_eq!(r.case, CombQuadraticCase::StrongPhaseOffset);
        let appendix = CombQuadraticOptions {
            transcription: Transcription::Appendix,
            ..opts
        };
        assert!(comb_quadratic_optimal(&comb_params(10.0, 0.5), &appendix).is_ok());
    }

    #[test]
    fn comb_offset_case_reduces_when_offset_vanishes() {
        let forced = CombQuadraticOptions {
            centered_offset_factor: -1.0,
            ..Default::default()
        };
        for t in [Transcription::MainText, Transcription::Appendix] {
            let opts = CombQuadraticOptions { transcription: t, ..forced };
            let off = comb_quadratic_optimal(&comb_params(10.0, 0.0), &opts).unwrap();
            let centered = comb_quadratic_optimal(&comb_params(10.0, 0.0), &CombQuadraticOptions::default()).unwrap();
            assert_eq!(off.case, CombQuadraticCase::StrongPhaseOffset);
            assert!((off.overlaps.delta_p - centered.overlaps.delta_p).abs() < 1e-15);
        }
    }

    #[test]
    fn comb_quadratic_validity() {
        let mut p = comb_params(1.0, 0.0);
        p.delta1 = 1e-2;
        assert!(matches!(comb_quadratic_optimal(&p, &CombQuadraticOptions::default()), Err(Error::Validity(_))));
    }
}
