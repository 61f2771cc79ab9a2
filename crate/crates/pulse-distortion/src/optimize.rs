//! Best rigid shift z̄ of the received spectrum.
//!
//! A coarse scan over [−W, W] finds the global maximum cell, golden-section
//! search narrows it, and a bisection on the analytic derivative polishes
//! the maximizer below the resolution that function values alone allow.

use crate::overlap::{lambda_pure_with, objective_gradient_with, objective_with, overlap_mixed_with, Which};
use crate::profiles::{DimensionfulFrame, ProfileKind, SpectralProfile};
use crate::quadrature::QuadratureConfig;
use crate::spacetime::classical_redshift_from;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    /// Half-width W of the scan window in envelope widths.
    pub half_window: f64,
    /// Minimum number of scan points.
    pub scan_points: usize,
    /// Largest allowed scan pitch; combs need less than d̃/4.
    pub max_pitch: Option<f64>,
    /// Tolerance on z̄_opt.
    pub shift_tol: f64,
    /// Scan spread below which the objective counts as flat.
    pub flat_spread: f64,
    /// Scan values within this of the maximum tie.
    pub tie_tol: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            half_window: 10.0,
            scan_points: 201,
            max_pitch: None,
            shift_tol: 1e-10,
            flat_spread: 1e-13,
            tie_tol: 1e-13,
            quadrature: QuadratureConfig {
                abs_tol: 1e-13,
                ..QuadratureConfig::default()
            },
        }
    }
}

impl OptimizeConfig {
    /// Default settings with the scan pitch adapted to a comb spacing.
    pub fn for_profile(kind: ProfileKind, d_tilde: f64) -> Self {
        let mut cfg = OptimizeConfig::default();
        if kind.is_comb() {
            cfg.max_pitch = Some(0.2 * d_tilde);
        }
        cfg
    }

    fn grid(&self) -> Vec<f64> {
        let mut n = self.scan_points.max(3);
        if let Some(pitch) = self.max_pitch {
            let needed = (2.0 * self.half_window / pitch).ceil() as usize + 1;
            n = n.max(needed);
        }
        if n.is_multiple_of(2) {
            n += 1;
        }
        let step = 2.0 * self.half_window / (n - 1) as f64;
        let mid = (n / 2) as i64;
        (0..n as i64).map(|i| (i - mid) as f64 * step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub which: Which,
    pub z_bar_opt: f64,
    /// Δ_p at z̄_opt.
    pub delta_p_opt: f64,
    /// Δ_m at z̄_opt.
    pub delta_m_opt: f64,
    /// Λ at z̄_opt.
    pub lambda_opt: Complex64,
    /// Classical redshift δω at z̄_opt [rad/s].
    pub delta_omega_opt: f64,
    /// Objective derivative at z̄_opt.
    pub gradient: f64,
    pub n_evals: usize,
    pub converged: bool,
    /// The scan could not resolve the distortion at this χ.
    pub flat_objective: bool,
}

impl OptimizationResult {
    /// The optimized objective.
    pub fn value(&self) -> f64 {
        match self.which {
            Which::Pure => self.delta_p_opt,
            Which::Mixed => self.delta_m_opt,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes Δ(z̄) for the pure or mixed state.
pub fn maximize_shift<P: SpectralProfile + ?Sized>(
    profile: &P,
    chi: f64,
    which: Which,
    frame: &DimensionfulFrame,
    cfg: &OptimizeConfig,
) -> Result<OptimizationResult> {
    maximize_shift_from(profile, chi - 1.0, which, frame, cfg)
}

/// As [`maximize_shift`], taking χ − 1 so the classical redshift keeps full precision.
pub fn maximize_shift_from<P: SpectralProfile + ?Sized>(
    profile: &P,
    chi_minus_one: f64,
    which: Which,
    frame: &DimensionfulFrame,
    cfg: &OptimizeConfig,
) -> Result<OptimizationResult> {
    let chi = 1.0 + chi_minus_one;
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    let q = &cfg.quadrature;
    let grid = cfg.grid();
    let scanned: Vec<(f64, usize)> = grid
        .par_iter()
        .map(|&z| objective_with(profile, chi, z, which, q))
        .collect::<Result<_>>()?;
    let mut evals: usize = scanned.iter().map(|s| s.1).sum();
    let values: Vec<f64> = scanned.iter().map(|s| s.0).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut flat = max - min < cfg.flat_spread;

    // best cell, ties resolved toward the smallest |z̄|
    let best = (0..grid.len())
        .filter(|&i| values[i] >= max - cfg.tie_tol)
        .min_by(|&i, &j| grid[i].abs().total_cmp(&grid[j].abs()))
        .expect("scan grid is never empty");

    let (z_opt, converged) = if flat {
        (grid[best], false)
    } else {
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let f = |z: f64| objective_with(profile, chi, z, which, q);
        let g = |z: f64| objective_gradient_with(profile, chi, z, which, q);
        refine(f, g, lo, hi, grid[best], cfg.shift_tol, &mut evals)?
    };

    let (lambda, n1) = lambda_pure_with(profile, chi, z_opt, q)?;
    let (delta_m, n2) = overlap_mixed_with(profile, chi, z_opt, q)?;
    let (gradient, n3) = objective_gradient_with(profile, chi, z_opt, which, q)?;
    evals += n1 + n2 + n3;
    let value = match which {
        Which::Pure => lambda.norm(),
        Which::Mixed => delta_m,
    };
    if chi != 1.0 && 1.0 - value < cfg.flat_spread {
        flat = true;
    }
    Ok(OptimizationResult {
        which,
        z_bar_opt: z_opt,
        delta_p_opt: lambda.norm(),
        delta_m_opt: delta_m,
        lambda_opt: lambda,
        delta_omega_opt: classical_redshift_from(z_opt, chi_minus_one, frame.sigma, frame.z0()),
        gradient,
        n_evals: evals,
        converged,
        flat_objective: flat,
    })
}

/// Golden-section narrowing of [lo, hi] around the scan maximum, then
/// bisection on the sign of the derivative.
fn refine<F, G>(f: F, g: G, mut lo: f64, mut hi: f64, start: f64, tol: f64, evals: &mut usize) -> Result<(f64, bool)>
where
    F: Fn(f64) -> Result<(f64, usize)>,
    G: Fn(f64) -> Result<(f64, usize)>,
{
    let mut call = |z: f64| -> Result<f64> {
        let (v, n) = f(z)?;
        *evals += n;
        Ok(v)
    };
    // golden section until the values stop being distinguishable
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = call(c)?;
    let mut fd = call(d)?;
    while hi - lo > 1e-6 * (1.0 + start.abs()) {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = call(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = call(d)?;
        }
        if (fc - fd).abs() < 4.0 * f64::EPSILON {
            break;
        }
    }
    let mut slope = |z: f64| -> Result<f64> {
        let (v, n) = g(z)?;
        *evals += n;
        Ok(v)
    };
    // widen until the derivative changes sign across the bracket
    let mut width = (hi - lo).max(1e-9);
    let centre = 0.5 * (lo + hi);
    let (mut a, mut b) = (centre - width, centre + width);
    let mut ga = slope(a)?;
    let mut gb = slope(b)?;
    let mut widenings = 0;
    while !(ga >= 0.0 && gb <= 0.0) {
        widenings += 1;
        if widenings > 40 {
            return Ok((centre, false));
        }
        width *= 2.0;
        a = centre - width;
        b = centre + width;
        ga = slope(a)?;
        gb = slope(b)?;
    }
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        if iterations > 200 {
            return Ok((0.5 * (a + b), false));
        }
        let mid = 0.5 * (a + b);
        let gm = slope(mid)?;
        if gm == 0.0 {
            return Ok((mid, true));
        }
        if gm > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b), true))
}

/// Overlap at z̄ = 0, i.e. after the rigid shift δω = −κω₀ alone.
pub fn naive_corrected_overlap<P: SpectralProfile + ?Sized>(profile: &P, chi: f64, which: Which) -> Result<f64> {
    let q = OptimizeConfig::default().quadrature;
    objective_with(profile, chi, 0.0, which, &q).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::overlap;
    use crate::profiles::Profile;

    fn frame() -> DimensionfulFrame {
        DimensionfulFrame::new(1.215e15, 1e12).unwrap()
    }

    #[test]
    fn gaussian_linear_optimum_is_unshifted() {
        for phi in [0.0, 1.0, 3.0] {
            let p = Profile::gaussian_linear(phi);
            let r = maximize_shift(&p, 1.05, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
            assert!(r.converged);
            assert!(r.z_bar_opt.abs() < 1e-8, "{}", r.z_bar_opt);
            let exact = analytic::gaussian_linear_optimal(1.05, phi).unwrap();
            assert!((r.delta_p_opt - exact.delta_p).abs() < 1e-10 * exact.delta_p);
        }
    }

    #[test]
    fn flat_spacetime_optimum() {
        let p = Profile::gaussian_quadratic(0.5, 20.0);
        let r = maximize_shift(&p, 1.0, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
        assert!(r.z_bar_opt.abs() < 1e-9);
        assert!((r.delta_p_opt - 1.0).abs() < 1e-12);
        assert!(!r.flat_objective);
    }

    #[test]
    fn quadratic_optimum_matches_stationary_point() {
        let (chi, phi, z0) = (1.001, 0.5, 100.0);
        let p = Profile::gaussian_quadratic(phi, z0);
        let r = maximize_shift(&p, chi, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
        let exact = analytic::gaussian_quadratic_optimal(chi, phi, z0).unwrap();
        assert!(r.converged);
        assert!((r.z_bar_opt - exact.z_bar_opt).abs() < 1e-6 * exact.z_bar_opt.abs());
        assert!(r.gradient.abs() < 1e-9);
        let naive = naive_corrected_overlap(&p, chi, Which::Pure).unwrap();
        assert!(naive < r.delta_p_opt);
    }

    #[test]
    fn classical_redshift_of_linear_gaussian() {
        let f = frame();
        let chi = 1.02;
        let p = Profile::gaussian_linear(1.0);
        let r = maximize_shift(&p, chi, Which::Mixed, &f, &OptimizeConfig::default()).unwrap();
        let expected = -crate::spacetime::kappa(chi) * f.omega0;
        assert!((r.delta_omega_opt - expected).abs() < 1e-7 * expected.abs());
    }

    #[test]
    fn comb_optimum_beats_probes() {
        let p = Profile::comb(10.0, 2.0, 1.0, false, 0.0).unwrap();
        let cfg = OptimizeConfig::for_profile(ProfileKind::CombLinear, 2.0);
        let r = maximize_shift(&p, 1.02, Which::Pure, &frame(), &cfg).unwrap();
        for k in 0..20 {
            let z = -9.5 + k as f64;
            let v = overlap::overlap_pure(&p, 1.02, z).unwrap();
            assert!(r.delta_p_opt >= v - 1e-9);
        }
    }

    #[test]
    fn earth_scale_distortion_is_flagged() {
        let p = Profile::gaussian_linear(1.0);
        let r = maximize_shift_from(&p, -1.7e-10, Which::Pure, &frame(), &OptimizeConfig::default()).unwrap();
        assert!(r.flat_objective);
    }

    #[test]
    fn tie_prefers_small_shift() {
        let cfg = OptimizeConfig {
            scan_points: 11,
            ..Default::default()
        };
        let grid = cfg.grid();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[5], 0.0);
        let comb = OptimizeConfig::for_profile(ProfileKind::CombLinear, 0.5);
        let g = comb.grid();
        assert!(g[1] - g[0] < 0.5 / 4.0);
    }
}
