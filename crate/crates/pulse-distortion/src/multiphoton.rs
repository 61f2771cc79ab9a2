//! N-photon overlaps composed from the single-photon Λ and Δ_m.
//!
//! Fock states give Δᴺ, coherent states exp[−(1−ReΛ)N], and single-mode
//! squeezed states [(1 + (1−ReΛ)N/2)² + (ImΛ)²N²/4]^(−1/2). The mixed overlap
//! is unchanged by N for the coherent and squeezed families.

use crate::{Coefficients, Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonKind {
    Fock,
    Coherent,
    Squeezed,
}

impl PhotonKind {
    pub const ALL: [PhotonKind; 3] = [PhotonKind::Fock, PhotonKind::Coherent, PhotonKind::Squeezed];

    pub fn name(self) -> &'static str {
        match self {
            PhotonKind::Fock => "fock",
            PhotonKind::Coherent => "coherent",
            PhotonKind::Squeezed => "squeezed",
        }
    }
}

impl fmt::Display for PhotonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhotonKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PhotonKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown photon statistics '{s}' (expected fock, coherent or squeezed)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub kind: PhotonKind,
    /// Mean photon number N.
    pub n_mean: f64,
}

impl PhotonStatistics {
    pub fn new(kind: PhotonKind, n_mean: f64) -> Result<Self> {
        let s = PhotonStatistics { kind, n_mean };
        s.check()?;
        Ok(s)
    }

    /// A single photon.
    pub fn single() -> Self {
        PhotonStatistics {
            kind: PhotonKind::Fock,
            n_mean: 1.0,
        }
    }

    /// Squeezed vacuum with squeezing parameter s, holding N = 2 sinh²(s).
    pub fn from_squeezing(s: f64) -> Result<Self> {
        Self::new(PhotonKind::Squeezed, 2.0 * s.sinh().powi(2))
    }

    /// Squeezing parameter s with N = 2 sinh²(s).
    pub fn squeezing(&self) -> f64 {
        (0.5 * self.n_mean).sqrt().asinh()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n_mean;
        match self.kind {
            PhotonKind::Fock if !(n >= 1.0 && n.fract() == 0.0 && n.is_finite()) => {
                Err(Error::Domain(format!("Fock photon number must be an integer >= 1, got {n}")))
            }
            _ if !(n >= 0.0 && n.is_finite()) => Err(Error::Domain(format!("mean photon number must be >= 0, got {n}"))),
            _ => Ok(()),
        }
    }

    /// N-photon (Δ_p, Δ_m) from the single-photon Λ and Δ_m.
    pub fn apply(&self, lambda: Complex64, delta_m: f64) -> Result<(f64, f64)> {
        self.apply_with(lambda, delta_m, &Coefficients::EXACT)
    }

    pub fn apply_with(&self, lambda: Complex64, delta_m: f64, c: &Coefficients) -> Result<(f64, f64)> {
        self.check()?;
        match self.kind {
            PhotonKind::Fock => Ok((fock_overlap(lambda.norm(), self.n_mean as u64)?, delta_m)),
            PhotonKind::Coherent => coherent_overlap_with(lambda, delta_m, self.n_mean, c),
            PhotonKind::Squeezed => squeezed_overlap_with(lambda, delta_m, self.n_mean, c),
        }
    }

    /// N-photon ln Δ_p from single-photon deficits, keeping precision when
    /// 1 − Δ is far below machine epsilon. `ln_delta_p` is ln|Λ|,
    /// `real_deficit` is 1 − ReΛ and `imag` is ImΛ.
    pub fn ln_pure_from_deficits(&self, ln_delta_p: f64, real_deficit: f64, imag: f64) -> Result<f64> {
        self.check()?;
        let c = Coefficients::EXACT;
        let n = self.n_mean;
        Ok(match self.kind {
            PhotonKind::Fock => n * ln_delta_p,
            PhotonKind::Coherent => -c.coherent_rate * real_deficit * n,
            PhotonKind::Squeezed => {
                let x = c.squeezed_real * real_deficit * n;
                let y = imag * imag * n * n * c.squeezed_imag;
                -0.5 * (x * (2.0 + x) + y).ln_1p()
            }
        })
    }
}

fn check_single(lambda: Complex64, n: f64) -> Result<()> {
    if !(lambda.norm() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("|Λ| = {} exceeds 1", lambda.norm())));
    }
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("mean photon number must be >= 0, got {n}")));
    }
    Ok(())
}

/// Δᴺ for an N-photon Fock state.
pub fn fock_overlap(delta: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("single-photon overlap {delta} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::Domain("Fock photon number must be >= 1".into()));
    }
    Ok(delta.powf(n as f64))
}

/// Coherent-state (Δ_p, Δ_m) for mean photon number N.
pub fn coherent_overlap(lambda: Complex64, delta_m: f64, n: f64) -> Result<(f64, f64)> {
    coherent_overlap_with(lambda, delta_m, n, &Coefficients::EXACT)
}

pub fn coherent_overlap_with(lambda: Complex64, delta_m: f64, n: f64, c: &Coefficients) -> Result<(f64, f64)> {
    check_single(lambda, n)?;
    Ok(((-c.coherent_rate * (1.0 - lambda.re) * n).exp(), delta_m))
}

/// Squeezed-state (Δ_p, Δ_m) for mean photon number N.
pub fn squeezed_overlap(lambda: Complex64, delta_m: f64, n: f64) -> Result<(f64, f64)> {
    squeezed_overlap_with(lambda, delta_m, n, &Coefficients::EXACT)
}

pub fn squeezed_overlap_with(lambda: Complex64, delta_m: f64, n: f64, c: &Coefficients) -> Result<(f64, f64)> {
    check_single(lambda, n)?;
    let real = 1.0 + c.squeezed_real * (1.0 - lambda.re) * n;
    let imag = lambda.im * lambda.im * n * n * c.squeezed_imag;
    Ok(((real * real + imag).sqrt().recip(), delta_m))
}

/// Exact overlap of two coherent states of mean photon number N whose mode
/// functions overlap by Λ, summed over the photon-number basis.
pub fn coherent_fock_series(lambda: Complex64, n: f64) -> Complex64 {
    // Σ_k e^{−N} N^k/k! Λ^k
    let mut term = Complex64::new((-n).exp(), 0.0);
    let mut sum = term;
    let mut k = 1.0;
    while k < 10.0 * n + 200.0 {
        term *= lambda * (n / k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Exact overlap of two squeezed vacua with N = 2 sinh²(s) whose mode
/// functions overlap by Λ, summed over the photon-number basis.
pub fn squeezed_fock_series(lambda: Complex64, n: f64) -> Complex64 {
    let s = (0.5 * n).sqrt().asinh();
    let t2 = s.tanh().powi(2);
    // Σ_k (2k)!/(4^k k!²) (t²Λ²)^k / cosh s
    let x = lambda * lambda * t2;
    let mut coeff = 1.0;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    for k in 1..200_000 {
        coeff *= (2 * k - 1) as f64 / (2 * k) as f64;
        power *= x;
        let term = power * coeff;
        sum += term;
        if term.norm() < 1e-17 {
            break;
        }
    }
    sum / s.cosh()
}
