//! Redshift factor between two static observers in Schwarzschild spacetime.
//!
//! The sender sits at `r_a`, the receiver at `r_b`. The received spectrum is
//! rescaled as F′(ω) = χ F(χ² ω) with
//! χ = ((1 − 3r_s/(2r_b)) / (1 − r_s/r_a))^(1/4).

use crate::{Coefficients, Error, Result};
use serde::{Deserialize, Serialize};

/// Earth's Schwarzschild radius 2GM/c² in metres.
pub const EARTH_SCHWARZSCHILD_RADIUS_M: f64 = 8.87e-3;
/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6.371e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeConfig {
    pub r_a: f64,
    pub r_b: f64,
    pub r_s: f64,
}

impl SpacetimeConfig {
    pub fn new(r_a: f64, r_b: f64, r_s: f64) -> Result<Self> {
        let cfg = SpacetimeConfig { r_a, r_b, r_s };
        cfg.check()?;
        Ok(cfg)
    }

    /// Sender at `r_a`, receiver a distance `separation` further out.
    pub fn with_separation(r_a: f64, separation: f64, r_s: f64) -> Result<Self> {
        Self::new(r_a, r_a + separation, r_s)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.r_a.is_finite() && self.r_b.is_finite() && self.r_s.is_finite()) {
            return Err(Error::Domain("radii must be finite".into()));
        }
        if self.r_a <= 0.0 || self.r_b <= 0.0 || self.r_s < 0.0 {
            return Err(Error::Domain("radii must be positive".into()));
        }
        if self.r_a <= self.r_s {
            return Err(Error::Domain(format!(
                "sender radius {} inside the Schwarzschild radius {}",
                self.r_a, self.r_s
            )));
        }
        if self.r_b <= 1.5 * self.r_s {
            return Err(Error::Domain(format!(
                "receiver radius {} inside the photon sphere {}",
                self.r_b,
                1.5 * self.r_s
            )));
        }
        Ok(())
    }

    fn sender_ratio(&self) -> f64 {
        self.r_s / self.r_a
    }

    fn receiver_ratio(&self) -> f64 {
        self.r_s / self.r_b
    }
}

/// χ together with its expansion in powers of r_s/r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedshiftFactor {
    pub chi: f64,
    /// χ − 1 computed without cancellation.
    pub chi_minus_one: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl RedshiftFactor {
    pub fn from_config(cfg: &SpacetimeConfig) -> Result<Self> {
        let chi_minus_one = chi_minus_one(cfg)?;
        let (delta1, delta2) = delta_expansion_with(cfg, f64::INFINITY, &Coefficients::EXACT)?;
        Ok(RedshiftFactor {
            chi: 1.0 + chi_minus_one,
            chi_minus_one,
            delta1,
            delta2,
        })
    }

    /// An explicit χ with δ₁ = χ − 1 and δ₂ = 0.
    pub fn from_chi(chi: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::Domain(format!("chi must be positive, got {chi}")));
        }
        Ok(RedshiftFactor {
            chi,
            chi_minus_one: chi - 1.0,
            delta1: chi - 1.0,
            delta2: 0.0,
        })
    }

    /// χ = 1 + δ₁ with δ₁ kept at full precision.
    pub fn from_delta1(delta1: f64) -> Result<Self> {
        if !(delta1 > -1.0 && delta1.is_finite()) {
            return Err(Error::Domain(format!("delta1 must exceed -1, got {delta1}")));
        }
        Ok(RedshiftFactor {
            chi: 1.0 + delta1,
            chi_minus_one: delta1,
            delta1,
            delta2: 0.0,
        })
    }

    pub fn kappa(&self) -> f64 {
        kappa_from_chi_minus_one(self.chi_minus_one)
    }
}

/// Exact redshift factor; no series truncation.
pub fn redshift_factor(cfg: &SpacetimeConfig) -> Result<f64> {
    Ok(1.0 + chi_minus_one(cfg)?)
}

/// χ − 1 through `ln_1p`/`exp_m1`, accurate when r_s/r is tiny.
pub fn chi_minus_one(cfg: &SpacetimeConfig) -> Result<f64> {
    cfg.check()?;
    let num = -1.5 * cfg.receiver_ratio();
    let den = -cfg.sender_ratio();
    if 1.0 + num <= 0.0 || 1.0 + den <= 0.0 {
        return Err(Error::Domain("non-positive factor under the fourth root".into()));
    }
    Ok((0.25 * (num.ln_1p() - den.ln_1p())).exp_m1())
}

/// Default bound on r_s/r_a and r_s/r_b for the δ expansion.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 1e-3;
/// Default bound on L/r_a for the close-separation expansion.
pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 1e-2;

/// First- and second-order parts of χ − 1 in r_s/r.
pub fn delta_expansion(cfg: &SpacetimeConfig) -> Result<(f64, f64)> {
    delta_expansion_with(cfg, DEFAULT_RATIO_THRESHOLD, &Coefficients::EXACT)
}

pub fn delta_expansion_with(
    cfg: &SpacetimeConfig,
    threshold: f64,
    c: &Coefficients,
) -> Result<(f64, f64)> {
    cfg.check()?;
    let a = cfg.sender_ratio();
    let b = cfg.receiver_ratio();
    if a >= threshold || b >= threshold {
        return Err(Error::Validity(format!(
            "r_s/r_a = {a:e}, r_s/r_b = {b:e} exceed {threshold:e}"
        )));
    }
    let delta1 = c.delta1_sender * a - c.delta1_receiver * b;
    let delta2 = c.delta2_sender_sq * a * a - c.delta2_mixed * a * b - c.delta2_receiver_sq * b * b;
    Ok((delta1, delta2))
}

/// Expansion for a receiver a short distance `separation` above the sender.
pub fn delta_near_limit(r_a: f64, separation: f64, r_s: f64) -> Result<(f64, f64)> {
    delta_near_limit_with(r_a, separation, r_s, DEFAULT_SEPARATION_THRESHOLD, &Coefficients::EXACT)
}

pub fn delta_near_limit_with(
    r_a: f64,
    separation: f64,
    r_s: f64,
    threshold: f64,
    c: &Coefficients,
) -> Result<(f64, f64)> {
    if !(r_a > 0.0 && r_s >= 0.0 && separation >= 0.0) {
        return Err(Error::Domain("need r_a > 0, r_s >= 0, separation >= 0".into()));
    }
    let ell = separation / r_a;
    if ell >= threshold {
        return Err(Error::Validity(format!("L/r_a = {ell:e} exceeds {threshold:e}")));
    }
    let a = r_s / r_a;
    let delta1 = -c.near_delta1 * a;
    let delta2 = c.near_separation * a * ell - c.near_sender_sq * a * a;
    Ok((delta1, delta2))
}

/// κ = (χ² − 1)/χ², the fractional rigid shift of the carrier.
pub fn kappa(chi: f64) -> f64 {
    (chi * chi - 1.0) / (chi * chi)
}

/// κ from χ − 1 without cancellation.
pub fn kappa_from_chi_minus_one(d: f64) -> f64 {
    d * (2.0 + d) / ((1.0 + d) * (1.0 + d))
}

/// Classical redshift δω = (σ/χ²)(z̄ − (χ²−1) z₀) in rad/s.
pub fn classical_redshift(z_bar: f64, chi: f64, sigma: f64, z0: f64) -> f64 {
    classical_redshift_from(z_bar, chi - 1.0, sigma, z0)
}

/// As [`classical_redshift`], taking χ − 1.
pub fn classical_redshift_from(z_bar: f64, chi_minus_one: f64, sigma: f64, z0: f64) -> f64 {
    let d = chi_minus_one;
    let chi_sq = (1.0 + d) * (1.0 + d);
    sigma / chi_sq * (z_bar - d * (2.0 + d) * z0)
}
