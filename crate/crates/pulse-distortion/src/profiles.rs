//! Normalized spectral profiles F(z) = f̃(z) e^{iψ(z)} in the shifted,
//! rescaled frequency z = (ω − ω₀)/σ.

use crate::quadrature::{integrate_real, QuadratureConfig};
use crate::{Coefficients, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Weight of the comb series that may be dropped by truncation, relative to θ₃.
pub const COMB_TRUNCATION_WEIGHT: f64 = 1e-14;
/// Smallest accepted d̃σ̃ (peaks well separated).
pub const MIN_COMB_SEPARATION: f64 = 10.0;
/// Smallest accepted σ̃ (peaks narrow against the envelope).
pub const MIN_COMB_RATIO: f64 = 5.0;
/// Gaussian half-width of the integration domain.
pub const ENVELOPE_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    GaussianLinear,
    GaussianQuadratic,
    CombLinear,
    CombQuadratic,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 4] = [
        ProfileKind::GaussianLinear,
        ProfileKind::GaussianQuadratic,
        ProfileKind::CombLinear,
        ProfileKind::CombQuadratic,
    ];

    pub fn is_comb(self) -> bool {
        matches!(self, ProfileKind::CombLinear | ProfileKind::CombQuadratic)
    }

    pub fn is_quadratic(self) -> bool {
        matches!(self, ProfileKind::GaussianQuadratic | ProfileKind::CombQuadratic)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::GaussianLinear => "gaussian-linear",
            ProfileKind::GaussianQuadratic => "gaussian-quadratic",
            ProfileKind::CombLinear => "comb-linear",
            ProfileKind::CombQuadratic => "comb-quadratic",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown profile kind '{s}'")))
    }
}

/// Parameter record of a profile. Fields that a kind does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub kind: ProfileKind,
    /// Phase strength φ̃.
    pub phi_tilde: f64,
    /// Carrier position ω₀/σ; centres the Gaussian quadratic phase at −z₀.
    pub z0: f64,
    /// Envelope-to-peak width ratio σ̃ = σ/μ (combs).
    pub sigma_tilde: f64,
    /// Peak spacing d̃ = d/σ (combs).
    pub d_tilde: f64,
    /// Centre offset of the quadratic comb phase.
    pub delta_z0: f64,
}

impl ProfileParams {
    pub fn new(kind: ProfileKind) -> Self {
        ProfileParams {
            kind,
            phi_tilde: 0.0,
            z0: 0.0,
            sigma_tilde: 10.0,
            d_tilde: 2.0,
            delta_z0: 0.0,
        }
    }
}

/// Anything that can be fed to the overlap integrals: a nonnegative modulus
/// and a real phase, both with derivatives.
pub trait SpectralProfile: Sync {
    fn modulus(&self, z: f64) -> f64;
    fn modulus_derivative(&self, z: f64) -> f64;
    fn phase(&self, z: f64) -> f64;
    fn phase_derivative(&self, z: f64) -> f64;
    /// ψ(u) − ψ(v); overridden where a cancellation-free form exists.
    fn phase_difference(&self, u: f64, v: f64) -> f64 {
        self.phase(u) - self.phase(v)
    }
    /// The profile is treated as zero outside |z| ≤ half_width.
    fn half_width(&self) -> f64;
    /// Narrowest structure in the modulus; sets the initial quadrature pitch.
    fn feature_width(&self) -> f64;
    /// Whether the phase is at most quadratic, so its derivative is affine.
    fn phase_is_polynomial(&self) -> bool {
        true
    }

    fn evaluate(&self, z: f64) -> Complex64 {
        Complex64::from_polar(self.modulus(z), self.phase(z))
    }

    /// dF/dz.
    fn derivative(&self, z: f64) -> Complex64 {
        let m = self.modulus(z);
        Complex64::new(self.modulus_derivative(z), m * self.phase_derivative(z))
            * Complex64::from_polar(1.0, self.phase(z))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CombShape {
    n_max: i64,
    amplitude: f64,
    theta3: f64,
    cross_weight: f64,
    reach: f64,
}

/// An immutable, normalized spectral profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    params: ProfileParams,
    comb: Option<CombShape>,
}

fn gaussian_amplitude() -> f64 {
    (2.0 * PI).powf(-0.25)
}

impl Profile {
    pub fn gaussian_linear(phi_tilde: f64) -> Profile {
        Profile {
            params: ProfileParams {
                phi_tilde,
                ..ProfileParams::new(ProfileKind::GaussianLinear)
            },
            comb: None,
        }
    }

    pub fn gaussian_quadratic(phi_tilde: f64, z0: f64) -> Profile {
        Profile {
            params: ProfileParams {
                phi_tilde,
                z0,
                ..ProfileParams::new(ProfileKind::GaussianQuadratic)
            },
            comb: None,
        }
    }

    /// Gaussian-enveloped comb with peaks at n·d̃. `quadratic` selects the
    /// phase −φ̃²(z+δz₀)² instead of −φ̃z.
    pub fn comb(sigma_tilde: f64, d_tilde: f64, phi_tilde: f64, quadratic: bool, delta_z0: f64) -> Result<Profile> {
        Self::comb_with(sigma_tilde, d_tilde, phi_tilde, quadratic, delta_z0, &Coefficients::EXACT)
    }

    pub fn comb_with(
        sigma_tilde: f64,
        d_tilde: f64,
        phi_tilde: f64,
        quadratic: bool,
        delta_z0: f64,
        coeffs: &Coefficients,
    ) -> Result<Profile> {
        let kind = if quadratic {
            ProfileKind::CombQuadratic
        } else {
            ProfileKind::CombLinear
        };
        let params = ProfileParams {
            kind,
            phi_tilde,
            z0: 0.0,
            sigma_tilde,
            d_tilde,
            delta_z0,
        };
        Self::from_params_with(&params, coeffs)
    }

    pub fn from_params(params: &ProfileParams) -> Result<Profile> {
        Self::from_params_with(params, &Coefficients::EXACT)
    }

    pub fn from_params_with(params: &ProfileParams, coeffs: &Coefficients) -> Result<Profile> {
        let finite = [params.phi_tilde, params.z0, params.sigma_tilde, params.d_tilde, params.delta_z0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("profile parameters must be finite".into()));
        }
        let comb = if params.kind.is_comb() {
            Some(comb_shape(params.sigma_tilde, params.d_tilde, coeffs)?)
        } else {
            None
        };
        Ok(Profile { params: *params, comb })
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    pub fn kind(&self) -> ProfileKind {
        self.params.kind
    }

    /// Comb truncation index, if this is a comb.
    pub fn n_max(&self) -> Option<i64> {
        self.comb.as_ref().map(|c| c.n_max)
    }

    /// θ₃(0, q) with q = exp[−σ̃²d̃²/(2(1+σ̃²))], if this is a comb.
    pub fn theta3_factor(&self) -> Option<f64> {
        self.comb.as_ref().map(|c| c.theta3)
    }

    /// Off-diagonal peak-overlap weight folded into the comb normalization,
    /// relative to θ₃. This is what neglecting cross-peak overlap would cost.
    pub fn cross_peak_residue(&self) -> Option<f64> {
        self.comb.as_ref().map(|c| c.cross_weight / c.theta3)
    }

    /// Same profile with the comb truncated at a different index.
    pub fn with_n_max(&self, n_max: i64) -> Result<Profile> {
        let mut out = self.clone();
        if let Some(c) = out.comb.as_mut() {
            let p = &self.params;
            let (theta3, cross) = comb_weights(p.sigma_tilde, p.d_tilde, n_max);
            let base = ((1.0 + p.sigma_tilde * p.sigma_tilde) / (2.0 * PI)).powf(0.25);
            c.n_max = n_max;
            c.theta3 = theta3;
            c.cross_weight = cross;
            c.amplitude = base / (theta3 + cross).sqrt();
        }
        Ok(out)
    }

    fn phase_center(&self) -> f64 {
        match self.params.kind {
            ProfileKind::GaussianQuadratic => self.params.z0,
            ProfileKind::CombQuadratic => self.params.delta_z0,
            _ => 0.0,
        }
    }

    /// Sum over peaks of exp[−σ̃²(z−nd̃)²/4] and of its z-derivative.
    fn comb_sum(&self, c: &CombShape, z: f64) -> (f64, f64) {
        let s = self.params.sigma_tilde;
        let d = self.params.d_tilde;
        let lo = (((z - c.reach) / d).ceil() as i64).max(-c.n_max);
        let hi = (((z + c.reach) / d).floor() as i64).min(c.n_max);
        let mut value = 0.0;
        let mut slope = 0.0;
        for n in lo..=hi {
            let u = z - n as f64 * d;
            let g = (-0.25 * s * s * u * u).exp();
            value += g;
            slope -= 0.5 * s * s * u * g;
        }
        (value, slope)
    }
}

fn comb_weights(sigma_tilde: f64, d_tilde: f64, n_max: i64) -> (f64, f64) {
    let s2 = sigma_tilde * sigma_tilde;
    let scale = s2 * d_tilde * d_tilde / (8.0 * (1.0 + s2));
    let mut diagonal = 0.0;
    let mut cross = 0.0;
    for n in -n_max..=n_max {
        for m in -n_max..=n_max {
            let (nf, mf) = (n as f64, m as f64);
            let e = -scale * (2.0 * (nf * nf + mf * mf) + s2 * (nf - mf) * (nf - mf));
            if e < -745.0 {
                continue;
            }
            if n == m {
                diagonal += e.exp();
            } else {
                cross += e.exp();
            }
        }
    }
    (diagonal, cross)
}

fn comb_shape(sigma_tilde: f64, d_tilde: f64, coeffs: &Coefficients) -> Result<CombShape> {
    if !(sigma_tilde >= MIN_COMB_RATIO) {
        return Err(Error::Precondition(format!(
            "comb needs sigma_tilde >= {MIN_COMB_RATIO}, got {sigma_tilde}"
        )));
    }
    if !(d_tilde > 0.0 && d_tilde * sigma_tilde >= MIN_COMB_SEPARATION) {
        return Err(Error::Precondition(format!(
            "comb needs d_tilde * sigma_tilde >= {MIN_COMB_SEPARATION}, got {}",
            d_tilde * sigma_tilde
        )));
    }
    let s2 = sigma_tilde * sigma_tilde;
    let q = (-0.5 * s2 / (1.0 + s2) * d_tilde * d_tilde).exp();
    let n_max = comb_truncation(q)?;
    let (theta3, cross) = comb_weights(sigma_tilde, d_tilde, n_max);
    let base = ((1.0 + s2) / coeffs.comb_norm_two_pi).powf(0.25);
    Ok(CombShape {
        n_max,
        amplitude: base / (theta3 + cross).sqrt(),
        theta3,
        cross_weight: cross,
        reach: 20.0 / sigma_tilde,
    })
}

/// Smallest n_max with 2Σ_{n>n_max} q^{n²} below [`COMB_TRUNCATION_WEIGHT`].
fn comb_truncation(q: f64) -> Result<i64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("comb nome {q} outside [0, 1)")));
    }
    let ln_q = q.ln();
    for n in 0..1_000_000i64 {
        let next = ((n + 1) * (n + 1)) as f64;
        // tail bound: 2 q^{(n+1)²} / (1 − q^{2n+3})
        let tail = 2.0 * (next * ln_q).exp() / (1.0 - ((2 * n + 3) as f64 * ln_q).exp());
        if tail < COMB_TRUNCATION_WEIGHT {
            return Ok(n);
        }
    }
    Err(Error::Precondition(format!("comb truncation did not reach tolerance for q = {q}")))
}

impl SpectralProfile for Profile {
    fn modulus(&self, z: f64) -> f64 {
        let envelope = (-0.25 * z * z).exp();
        match &self.comb {
            None => gaussian_amplitude() * envelope,
            Some(c) => c.amplitude * envelope * self.comb_sum(c, z).0,
        }
    }

    fn modulus_derivative(&self, z: f64) -> f64 {
        let envelope = (-0.25 * z * z).exp();
        match &self.comb {
            None => -0.5 * z * gaussian_amplitude() * envelope,
            Some(c) => {
                let (sum, slope) = self.comb_sum(c, z);
                c.amplitude * envelope * (slope - 0.5 * z * sum)
            }
        }
    }

    fn phase(&self, z: f64) -> f64 {
        let phi = self.params.phi_tilde;
        if self.params.kind.is_quadratic() {
            let u = z + self.phase_center();
            -phi * phi * u * u
        } else {
            -phi * z
        }
    }

    fn phase_derivative(&self, z: f64) -> f64 {
        let phi = self.params.phi_tilde;
        if self.params.kind.is_quadratic() {
            -2.0 * phi * phi * (z + self.phase_center())
        } else {
            -phi
        }
    }

    fn phase_difference(&self, u: f64, v: f64) -> f64 {
        let phi = self.params.phi_tilde;
        if self.params.kind.is_quadratic() {
            -phi * phi * (u - v) * (u + v + 2.0 * self.phase_center())
        } else {
            -phi * (u - v)
        }
    }

    fn half_width(&self) -> f64 {
        match &self.comb {
            None => ENVELOPE_HALF_WIDTH,
            Some(c) => {
                let outer = c.n_max as f64 * self.params.d_tilde + 10.0 / self.params.sigma_tilde;
                ENVELOPE_HALF_WIDTH.max(outer)
            }
        }
    }

    fn feature_width(&self) -> f64 {
        match &self.comb {
            None => 1.0,
            Some(_) => 1.0 / self.params.sigma_tilde,
        }
    }
}

/// Jacobi θ₃(0, q) = 1 + 2Σ_{n≥1} q^{n²}.
pub fn jacobi_theta3(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("nome {q} outside [0, 1)")));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let ln_q = q.ln();
    let mut sum = 0.0;
    let mut n = 1.0f64;
    loop {
        let term = (n * n * ln_q).exp();
        sum += term;
        if term < 1e-16 * (1.0 + 2.0 * sum) {
            break;
        }
        n += 1.0;
    }
    Ok(1.0 + 2.0 * sum)
}

/// ∫|F|² dz by quadrature over the profile's domain.
pub fn normalization<P: SpectralProfile + ?Sized>(profile: &P) -> Result<f64> {
    let z = profile.half_width();
    let pieces = (2.0 * z / (0.5 * profile.feature_width())).ceil() as usize;
    let cfg = QuadratureConfig::default();
    integrate_real(|x| profile.modulus(x).powi(2), -z, z, pieces, &cfg)
}

/// ∫|F|⁴ dz by quadrature; the continuum purity of the mixed state.
pub fn quartic_moment<P: SpectralProfile + ?Sized>(profile: &P) -> Result<f64> {
    let z = profile.half_width();
    let pieces = (2.0 * z / (0.5 * profile.feature_width())).ceil() as usize;
    let cfg = QuadratureConfig::default();
    integrate_real(|x| profile.modulus(x).powi(4), -z, z, pieces, &cfg)
}

/// Carrier and width of the pulse in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionfulFrame {
    pub omega0: f64,
    pub sigma: f64,
}

/// Largest accepted σ/ω₀.
pub const MAX_RELATIVE_WIDTH: f64 = 1e-2;

impl DimensionfulFrame {
    pub fn new(omega0: f64, sigma: f64) -> Result<Self> {
        if !(omega0 > 0.0 && sigma > 0.0 && omega0.is_finite() && sigma.is_finite()) {
            return Err(Error::Domain("omega0 and sigma must be positive".into()));
        }
        if sigma / omega0 >= MAX_RELATIVE_WIDTH {
            return Err(Error::Validity(format!(
                "sigma/omega0 = {:e} is not small (limit {MAX_RELATIVE_WIDTH:e})",
                sigma / omega0
            )));
        }
        Ok(DimensionfulFrame { omega0, sigma })
    }

    /// Carrier in units of the width, z₀ = ω₀/σ.
    pub fn z0(&self) -> f64 {
        self.omega0 / self.sigma
    }
}

/// Shape of one sub-peak of a multi-peak profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PeakShape {
    /// G̃(u) = exp(−u²/4).
    Gaussian,
    /// G̃(u) = 1.
    Flat,
}

impl PeakShape {
    fn value(self, u: f64) -> (f64, f64) {
        match self {
            PeakShape::Gaussian => {
                let g = (-0.25 * u * u).exp();
                (g, -0.5 * u * g)
            }
            PeakShape::Flat => (1.0, 0.0),
        }
    }
}

/// A sub-peak at `center` (in z) with width `width` (in units of σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub width: f64,
    pub shape: PeakShape,
}

/// f̃(z) Σₙ G̃ₙ((z − cₙ)/wₙ) under an envelope profile, renormalized by quadrature.
#[derive(Debug, Clone)]
pub struct MultiPeakProfile {
    envelope: Profile,
    peaks: Vec<Peak>,
    scale: f64,
}

impl MultiPeakProfile {
    pub fn new(envelope: Profile, peaks: Vec<Peak>) -> Result<Self> {
        if peaks.is_empty() {
            return Err(Error::Precondition("multi-peak profile needs at least one peak".into()));
        }
        if peaks.iter().any(|p| !(p.width > 0.0) || !p.center.is_finite()) {
            return Err(Error::Precondition("peak widths must be positive".into()));
        }
        let mut out = MultiPeakProfile {
            envelope,
            peaks,
            scale: 1.0,
        };
        let norm = normalization(&out)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Precondition(format!("multi-peak profile has norm {norm}")));
        }
        out.scale = norm.sqrt().recip();
        Ok(out)
    }

    /// The factor that brought ∫|F|² to one.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn peak_sum(&self, z: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for p in &self.peaks {
            let (g, dg) = p.shape.value((z - p.center) / p.width);
            value += g;
            slope += dg / p.width;
        }
        (value, slope)
    }
}

impl SpectralProfile for MultiPeakProfile {
    fn modulus(&self, z: f64) -> f64 {
        self.scale * self.envelope.modulus(z) * self.peak_sum(z).0
    }

    fn modulus_derivative(&self, z: f64) -> f64 {
        let (g, dg) = self.peak_sum(z);
        self.scale * (self.envelope.modulus_derivative(z) * g + self.envelope.modulus(z) * dg)
    }

    fn phase(&self, z: f64) -> f64 {
        self.envelope.phase(z)
    }

    fn phase_derivative(&self, z: f64) -> f64 {
        self.envelope.phase_derivative(z)
    }

    fn phase_difference(&self, u: f64, v: f64) -> f64 {
        self.envelope.phase_difference(u, v)
    }

    fn half_width(&self) -> f64 {
        let reach = self
            .peaks
            .iter()
            .filter(|p| p.shape != PeakShape::Flat)
            .map(|p| p.center.abs() + 10.0 * p.width)
            .fold(0.0, f64::max);
        self.envelope.half_width().max(reach)
    }

    fn feature_width(&self) -> f64 {
        self.peaks
            .iter()
            .filter(|p| p.shape != PeakShape::Flat)
            .map(|p| p.width)
            .fold(self.envelope.feature_width(), f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta3_reference_values() {
        assert_eq!(jacobi_theta3(0.0).unwrap(), 1.0);
        assert!((jacobi_theta3(0.1).unwrap() - 1.200_200_002).abs() < 1e-12);
        let half: f64 = 1.0 + 2.0 * (1..40).map(|n| 0.5f64.powi(n * n)).sum::<f64>();
        assert!((jacobi_theta3(0.5).unwrap() - half).abs() < 1e-15);
        assert!(jacobi_theta3(1.0).is_err());
        assert!(jacobi_theta3(-0.1).is_err());
    }

    #[test]
    fn theta3_matches_product_form() {
        // θ₃(0,q) = Π_{m≥1} (1 − q^{2m})(1 + q^{2m−1})²
        for q in [0.1f64, 0.3, 0.5, 0.9] {
            let mut prod = 1.0;
            for m in 1..4000 {
                let q2m = q.powi(2 * m);
                let q2m1 = q.powi(2 * m - 1);
                prod *= (1.0 - q2m) * (1.0 + q2m1) * (1.0 + q2m1);
            }
            let series = jacobi_theta3(q).unwrap();
            assert!((series - prod).abs() < 1e-12 * series, "q={q}: {series} vs {prod}");
        }
    }

    #[test]
    fn gaussian_values() {
        let p = Profile::gaussian_linear(1.7);
        let f0 = p.evaluate(0.0);
        assert!((f0.re - (2.0 * PI).powf(-0.25)).abs() < 1e-16);
        assert!(f0.im.abs() < 1e-16);
        assert!(p.modulus(9.0) < 1e-8 * p.modulus(0.0));
        assert!((normalization(&p).unwrap() - 1.0).abs() < 1e-12);
        let quartic = quartic_moment(&p).unwrap();
        assert!((quartic - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn quadratic_phase_vertex_and_reduction() {
        let p = Profile::gaussian_quadratic(0.8, 3.0);
        assert_eq!(p.phase(-3.0), 0.0);
        let flat = Profile::gaussian_quadratic(0.0, 3.0);
        let lin = Profile::gaussian_linear(0.0);
        for z in [-2.0, -0.3, 0.0, 1.1] {
            assert_eq!(flat.evaluate(z), lin.evaluate(z));
        }
        assert!((normalization(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comb_is_normalized() {
        let p = Profile::comb(10.0, 2.0, 0.0, false, 0.0).unwrap();
        let n = normalization(&p).unwrap();
        assert!((n - 1.0).abs() < 1e-8, "norm {n}");
        assert!(p.theta3_factor().unwrap() > 1.0);
        let q = (-0.5 * 100.0 / 101.0 * 4.0f64).exp();
        assert!((p.theta3_factor().unwrap() - jacobi_theta3(q).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn comb_at_separation_boundary_is_normalized() {
        let p = Profile::comb(5.0, 2.0, 0.0, false, 0.0).unwrap();
        let n = normalization(&p).unwrap();
        assert!((n - 1.0).abs() < 1e-10, "norm {n}");
        // without the cross-peak term the norm would be off by this much
        assert!(p.cross_peak_residue().unwrap() > 1e-6);
    }

    #[test]
    fn comb_truncation_is_stable() {
        let p = Profile::comb(10.0, 1.5, 0.3, false, 0.0).unwrap();
        let n = p.n_max().unwrap();
        let doubled = p.with_n_max(2 * n).unwrap();
        let a = normalization(&p).unwrap();
        let b = normalization(&doubled).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn comb_preconditions() {
        assert!(matches!(Profile::comb(4.0, 5.0, 0.0, false, 0.0), Err(Error::Precondition(_))));
        assert!(matches!(Profile::comb(10.0, 0.5, 0.0, false, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn comb_midpoint_suppression() {
        let (s, d) = (6.0, 2.0);
        let p = Profile::comb(s, d, 0.0, false, 0.0).unwrap();
        let peak = p.modulus(d);
        let mid = p.modulus(0.5 * d);
        // two peak tails, each lifted by the envelope ratio between d/2 and d
        let bound = 2.5 * (-s * s * d * d / 16.0).exp() * (3.0 * d * d / 16.0).exp();
        assert!(mid / peak < bound, "{} vs {bound}", mid / peak);
    }

    #[test]
    fn wide_spacing_leaves_single_peak() {
        let s: f64 = 8.0;
        let p = Profile::comb(s, 30.0, 0.0, false, 0.0).unwrap();
        // single term: amplitude² ∫ exp(−(1+σ̃²)z²/2) = 1
        let width = 1.0 / (1.0 + s * s).sqrt();
        let expected = ((1.0 + s * s) / (2.0 * PI)).powf(0.25);
        assert!((p.modulus(0.0) - expected).abs() < 1e-12);
        let ratio = p.modulus(width) / p.modulus(0.0);
        assert!((ratio - (-0.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn comb_peaks_sit_on_the_lattice() {
        let p = Profile::comb(20.0, 1.0, 0.0, false, 0.0).unwrap();
        for n in -2i32..=2 {
            let c = n as f64;
            // peak pulled toward the origin by ~ c/σ̃²; locate it by bisection on the slope
            let (mut lo, mut hi) = (c - 0.2, c + 0.2);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p.modulus_derivative(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let peak = 0.5 * (lo + hi);
            let pull = c / (1.0 + 400.0);
            assert!((peak - (c - pull)).abs() < 1e-6, "n={n}: {peak}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            Profile::gaussian_quadratic(0.9, 2.0),
            Profile::comb(7.0, 2.0, 0.4, true, 0.5).unwrap(),
        ];
        for p in &profiles {
            for z in [-1.3, -0.2, 0.45, 2.01] {
                let h = 1e-6;
                let fd = (p.evaluate(z + h) - p.evaluate(z - h)) / (2.0 * h);
                let exact = p.derivative(z);
                assert!((fd - exact).norm() < 1e-6 * (1.0 + exact.norm()), "{z}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn frame_checks() {
        let f = DimensionfulFrame::new(1.215e15, 1e12).unwrap();
        assert!((f.z0() - 1215.0).abs() < 1e-9);
        assert!(DimensionfulFrame::new(1.0, 0.1).is_err());
        assert!(DimensionfulFrame::new(-1.0, 0.001).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ProfileKind::ALL {
            assert_eq!(k.name().parse::<ProfileKind>().unwrap(), k);
        }
    }

    #[test]
    fn multipeak_flat_is_the_envelope() {
        let env = Profile::gaussian_linear(0.5);
        let mp = MultiPeakProfile::new(
            env.clone(),
            vec![Peak {
                center: 0.0,
                width: 1.0,
                shape: PeakShape::Flat,
            }],
        )
        .unwrap();
        assert!((mp.scale() - 1.0).abs() < 1e-12);
        for z in [-3.0, 0.0, 1.2] {
            assert!((mp.evaluate(z) - env.evaluate(z)).norm() < 1e-13);
        }
    }
}
