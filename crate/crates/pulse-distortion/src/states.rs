//! Single-photon density matrices on a grid of rectangular frequency windows.
//!
//! Bin n covers a window of width λ (in units of the envelope width) centred
//! at z_n. A pure state has amplitudes √λ·F(z_n); the completely mixed state
//! keeps only the diagonal λ|F(z_n)|². Both are renormalized after
//! discretization and the pre-normalization residue is kept as a grid
//! quality metric.

use crate::profiles::SpectralProfile;
use crate::quadrature::{integrate_real, QuadratureConfig};
use crate::{Error, Result};
use num_complex::Complex64;

/// Largest admissible window width λ.
pub const MAX_WINDOW: f64 = 0.05;
/// Smallest admissible span of the grid, in envelope widths.
pub const MIN_SPAN: f64 = 10.0;
/// Profile weight allowed outside the grid.
pub const LEAK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub n_bins: usize,
    /// Window width λ = σ*/σ.
    pub lambda: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl FrequencyGrid {
    pub fn new(n_bins: usize, lambda: f64, z_min: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Domain("a grid needs at least two bins".into()));
        }
        if !(lambda > 0.0 && lambda <= MAX_WINDOW) {
            return Err(Error::Precondition(format!("window width {lambda} outside (0, {MAX_WINDOW}]")));
        }
        let span = n_bins as f64 * lambda;
        if span < MIN_SPAN {
            return Err(Error::Precondition(format!("grid span {span} below {MIN_SPAN} envelope widths")));
        }
        if !z_min.is_finite() {
            return Err(Error::Domain("grid origin must be finite".into()));
        }
        Ok(FrequencyGrid {
            n_bins,
            lambda,
            z_min,
            z_max: z_min + span,
        })
    }

    /// Grid symmetric about z = 0.
    pub fn centered(n_bins: usize, lambda: f64) -> Result<Self> {
        Self::new(n_bins, lambda, -0.5 * n_bins as f64 * lambda)
    }

    /// Grid of the given span centred on zero, with λ = span / n_bins.
    pub fn spanning(span: f64, n_bins: usize) -> Result<Self> {
        Self::centered(n_bins, span / n_bins as f64)
    }

    pub fn center(&self, n: usize) -> f64 {
        self.z_min + (n as f64 + 0.5) * self.lambda
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_bins).map(move |n| self.center(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(Vec<Complex64>),
    MixedDiagonal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub grid: FrequencyGrid,
    pub data: StateData,
    /// 1 − (trace before renormalization).
    pub residue: f64,
    /// Native windows of the state per grid bin. A redshifted state is the
    /// unitary image of the emitted one, whose windows are narrower by χ².
    pub windows_per_bin: f64,
}

impl DiscreteState {
    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(a) => a.iter().map(|x| x.norm_sqr()).sum(),
            StateData::MixedDiagonal(p) => p.iter().sum(),
        }
    }

    /// Diagonal of the density matrix in the window basis.
    pub fn diagonal(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(a) => a.iter().map(|x| x.norm_sqr()).collect(),
            StateData::MixedDiagonal(p) => p.clone(),
        }
    }
}

/// Weight of |F(u)|² outside u ∈ [lo, hi].
fn leaked_weight<P: SpectralProfile + ?Sized>(profile: &P, lo: f64, hi: f64) -> Result<f64> {
    let w = profile.half_width();
    let (a, b) = (lo.max(-w), hi.min(w));
    if a >= b {
        return Ok(1.0);
    }
    let cfg = QuadratureConfig::default();
    let pieces = ((b - a) / (0.5 * profile.feature_width())).ceil().max(1.0) as usize;
    let inside = integrate_real(|u| profile.modulus(u).powi(2), a, b, pieces, &cfg)?;
    let total = crate::profiles::normalization(profile)?;
    Ok((total - inside).max(0.0))
}

/// Received spectrum sampled on the grid: √λ·χ·F(χ²z_n + z̄).
fn sampled<P: SpectralProfile + ?Sized>(profile: &P, grid: &FrequencyGrid, chi: f64, z_bar: f64) -> Result<Vec<Complex64>> {
    if !(chi > 0.0 && chi.is_finite() && z_bar.is_finite()) {
        return Err(Error::Domain(format!("need chi > 0 and finite shift, got chi={chi}, z_bar={z_bar}")));
    }
    let chi2 = chi * chi;
    let leak = leaked_weight(profile, chi2 * grid.z_min + z_bar, chi2 * grid.z_max + z_bar)?;
    if leak > LEAK_TOLERANCE {
        return Err(Error::SupportEscape(format!("profile weight {leak:e} falls outside the grid")));
    }
    let scale = grid.lambda.sqrt() * chi;
    Ok(grid.centers().map(|z| profile.evaluate(chi2 * z + z_bar) * scale).collect())
}

fn renormalized_pure(grid: FrequencyGrid, mut amps: Vec<Complex64>, windows_per_bin: f64) -> Result<DiscreteState> {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if !(norm > 0.0) {
        return Err(Error::SupportEscape("state has no weight on the grid".into()));
    }
    let s = norm.sqrt().recip();
    amps.iter_mut().for_each(|a| *a *= s);
    Ok(DiscreteState {
        grid,
        data: StateData::Pure(amps),
        residue: 1.0 - norm,
        windows_per_bin,
    })
}

fn renormalized_mixed(grid: FrequencyGrid, mut probs: Vec<f64>, windows_per_bin: f64) -> Result<DiscreteState> {
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::SupportEscape("state has no weight on the grid".into()));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(DiscreteState {
        grid,
        data: StateData::MixedDiagonal(probs),
        residue: 1.0 - total,
        windows_per_bin,
    })
}

/// Pure state with amplitudes √λ·F(z_n).
pub fn pure_state<P: SpectralProfile + ?Sized>(profile: &P, grid: &FrequencyGrid) -> Result<DiscreteState> {
    renormalized_pure(*grid, sampled(profile, grid, 1.0, 0.0)?, 1.0)
}

/// Completely mixed state with probabilities λ|F(z_n)|².
pub fn mixed_state<P: SpectralProfile + ?Sized>(profile: &P, grid: &FrequencyGrid) -> Result<DiscreteState> {
    let amps = sampled(profile, grid, 1.0, 0.0)?;
    renormalized_mixed(*grid, amps.iter().map(|a| a.norm_sqr()).collect(), 1.0)
}

/// State received after propagation with redshift factor χ, rigidly shifted
/// by z̄. The profile is evaluated at the rescaled arguments, not interpolated,
/// so `state` must be an emitted state built from the same profile.
pub fn apply_redshift<P: SpectralProfile + ?Sized>(
    profile: &P,
    state: &DiscreteState,
    chi: f64,
    z_bar: f64,
) -> Result<DiscreteState> {
    if state.windows_per_bin != 1.0 {
        return Err(Error::Precondition("redshift applies to emitted states only".into()));
    }
    let amps = sampled(profile, &state.grid, chi, z_bar)?;
    let windows = chi * chi;
    match state.data {
        StateData::Pure(_) => renormalized_pure(state.grid, amps, windows),
        StateData::MixedDiagonal(_) => renormalized_mixed(state.grid, amps.iter().map(|a| a.norm_sqr()).collect(), windows),
    }
}

/// Tr ρ² in the state's own window basis. A grid bin holding k native
/// windows of locally equal weight p/k contributes p²/k.
pub fn purity(state: &DiscreteState) -> f64 {
    match &state.data {
        StateData::Pure(_) => 1.0,
        StateData::MixedDiagonal(p) => p.iter().map(|x| x * x).sum::<f64>() / state.windows_per_bin,
    }
}

/// Tr ρ² of the diagonal as stored on the grid, ignoring the native window
/// width; grows by χ² under redshift because the spectrum narrows.
pub fn grid_purity(state: &DiscreteState) -> f64 {
    state.diagonal().iter().map(|x| x * x).sum()
}

/// Overlap between two states on the same grid: |⟨a|b⟩| for two pure
/// states, Σ√(p q) for two diagonal ones, √⟨a|diag q|a⟩ for a mixed pair.
pub fn fidelity(a: &DiscreteState, b: &DiscreteState) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(match (&a.data, &b.data) {
        (StateData::Pure(x), StateData::Pure(y)) => x.iter().zip(y).map(|(u, v)| u.conj() * v).sum::<Complex64>().norm(),
        (StateData::MixedDiagonal(p), StateData::MixedDiagonal(q)) => p.iter().zip(q).map(|(u, v)| (u * v).sqrt()).sum(),
        (StateData::Pure(x), StateData::MixedDiagonal(q)) | (StateData::MixedDiagonal(q), StateData::Pure(x)) => {
            x.iter().zip(q).map(|(u, v)| u.norm_sqr() * v).sum::<f64>().sqrt()
        }
    })
}

/// Purity of the diagonal state built from sharp-frequency kets, where the
/// squared delta function is replaced by the inverse window width. Grows as
/// 1/λ under refinement, which is why windows are needed at all.
pub fn naive_diagonal_purity<P: SpectralProfile + ?Sized>(profile: &P, grid: &FrequencyGrid) -> f64 {
    grid.centers().map(|z| profile.modulus(z).powi(4)).sum::<f64>()
}
